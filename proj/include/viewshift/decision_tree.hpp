#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "viewshift/dataset.hpp"
#include "viewshift/random.hpp"

namespace viewshift {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;   // rows with value <= threshold
  int right = -1;
  int predicted = 0;
  std::array<std::size_t, 2> counts{};  // training rows per class reaching this node
  double impurity = 0.0;                // Gini

  bool leaf() const { return feature < 0; }
  std::size_t samples() const { return counts[0] + counts[1]; }
};

/// Binary CART classifier. nodes[0] is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes;
  std::size_t max_depth = 5;
  std::vector<std::string> feature_names;

  /// Throws ArityMismatch when the row width differs from the training data.
  int predict(std::span<const double> row) const;
  std::size_t depth() const;
};

struct TreeOptions {
  std::size_t max_depth = 5;
  std::size_t min_samples_split = 2;
  std::size_t mtry = 0;  // features tried per split; 0 means all
};

/// Greedy CART on Gini impurity. Thresholds are midpoints between consecutive
/// distinct values; ties go to the lowest feature index, then the lowest
/// threshold. A node becomes a leaf when pure, at the depth cap, below
/// min_samples_split, or when no feature varies. Leaves predict the majority
/// class, ties to class 0. Throws EmptyDataset.
DecisionTree train_tree(const Dataset& data, const TreeOptions& options = {});

/// Trains on the given row indices (repeats allowed, as in a bootstrap
/// sample). When options.mtry is below the feature count, `rng` draws a fresh
/// feature subset at every split.
DecisionTree train_tree_on(const Dataset& data, std::span<const std::size_t> sample, const TreeOptions& options,
                           Rng* rng);

/// Gini impurity 1 - p0^2 - p1^2.
double gini(std::size_t n0, std::size_t n1);

}  // namespace viewshift
