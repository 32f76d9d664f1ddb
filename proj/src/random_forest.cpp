#include "viewshift/random_forest.hpp"

#include <cmath>
#include <numeric>

#include "viewshift/errors.hpp"
#include "viewshift/parallel.hpp"

namespace viewshift {

RandomForest train_forest(const Dataset& data, const ForestOptions& options) {
  if (data.size() == 0) throw EmptyDataset("cannot train a forest on zero rows");
  if (data.features() == 0) throw EmptyDataset("cannot train a forest without features");
  if (options.n_trees == 0) throw DomainError("n_trees must be at least 1");
  data.check();

  RandomForest forest;
  forest.seed = options.seed;
  forest.mtry = options.mtry != 0
                    ? std::min(options.mtry, data.features())
                    : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(data.features()))));
  forest.trees.resize(options.n_trees);

  const TreeOptions tree_options{options.max_depth, options.min_samples_split, forest.mtry};
  const std::size_t n = data.size();
  parallel_for(
      options.n_trees,
      [&](std::size_t t) {
        Rng rng(options.seed + t);
        std::vector<std::size_t> sample(n);
        if (options.bootstrap) {
          for (auto& s : sample) s = uniform_index(rng, n);
        } else {
          std::iota(sample.begin(), sample.end(), 0);
        }
        forest.trees[t] = train_tree_on(data, sample, tree_options, &rng);
      },
      options.threads);
  return forest;
}

Vote predict(const RandomForest& forest, std::span<const double> row) {
  Vote v;
  for (const auto& tree : forest.trees) ++v.votes[tree.predict(row)];
  v.predicted = v.votes[1] > v.votes[0] ? 1 : 0;
  return v;
}

}  // namespace viewshift
