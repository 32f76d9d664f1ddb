#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "viewshift/decision_tree.hpp"

namespace viewshift {

struct ForestOptions {
  std::size_t n_trees = 100;
  std::size_t max_depth = 5;
  std::size_t min_samples_split = 2;
  std::size_t mtry = 0;  // 0 means ceil(sqrt(features))
  std::uint64_t seed = 1;
  bool bootstrap = true;  // false trains every tree on the rows as given
  unsigned threads = 0;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
  std::size_t mtry = 0;
  std::uint64_t seed = 0;

  std::size_t n_trees() const { return trees.size(); }
};

struct Vote {
  int predicted = 0;
  std::array<std::size_t, 2> votes{};
};

/// Bagged CART trees. Tree t draws its bootstrap sample and split features
/// from an RNG seeded with seed + t, so serial and parallel training agree.
/// Throws EmptyDataset.
RandomForest train_forest(const Dataset& data, const ForestOptions& options = {});

/// Majority vote; a tie predicts class 0.
Vote predict(const RandomForest& forest, std::span<const double> row);

}  // namespace viewshift
