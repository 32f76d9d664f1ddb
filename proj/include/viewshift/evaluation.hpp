#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "viewshift/dataset.hpp"
#include "viewshift/decision_tree.hpp"
#include "viewshift/one_class_svm.hpp"
#include "viewshift/random_forest.hpp"

namespace viewshift {

/// Positive class = impactful (label 1).
struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  void add(int truth, int predicted);
};

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Standard metrics; any 0/0 ratio is reported as 0.
Metrics metrics_from(const Confusion& c);

using ModelSpec = std::variant<TreeOptions, ForestOptions, OcsvmOptions>;

std::string model_name(const ModelSpec& spec);

struct FoldResult {
  Confusion confusion;
  Metrics metrics;
};

struct CvReport {
  std::string model;
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  std::vector<FoldResult> per_fold;
  Metrics mean;  // unweighted mean over folds
  std::vector<std::size_t> fold_of_row;
};

/// Stratified assignment: each class is shuffled with `seed` and dealt round
/// robin, so per-class fold sizes differ by at most one. Throws
/// InsufficientRows when a class has fewer rows than folds.
std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds, std::uint64_t seed);

/// Rewrites the full dataset using only what the training rows reveal (for
/// example, per-fold categorical vocabularies). Row order must be preserved.
using FoldTransform = std::function<Dataset(const Dataset&, std::span<const std::size_t> train_rows)>;

/// Stratified k-fold cross-validation. The one-class model trains on the
/// positive training rows only (standardized over the whole training fold)
/// and predicts inliers as positive.
CvReport cross_validate(const ModelSpec& spec, const Dataset& data, std::size_t folds, std::uint64_t seed,
                        const FoldTransform& transform = {});

struct Importance {
  std::size_t feature = 0;
  std::string name;
  double importance = 0.0;
};

/// Gini decrease per feature (node-size weighted, averaged over trees),
/// normalized to sum to 1, descending with ties by feature index. Features
/// that never reduce impurity are omitted.
std::vector<Importance> feature_importance(const DecisionTree& tree);
std::vector<Importance> feature_importance(const RandomForest& forest);

}  // namespace viewshift
