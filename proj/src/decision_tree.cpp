#include "viewshift/decision_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "viewshift/errors.hpp"

namespace viewshift {

double gini(std::size_t n0, std::size_t n1) {
  const double n = static_cast<double>(n0 + n1);
  if (n == 0.0) return 0.0;
  const double p0 = static_cast<double>(n0) / n;
  const double p1 = static_cast<double>(n1) / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

int DecisionTree::predict(std::span<const double> row) const {
  if (row.size() != feature_names.size()) {
    throw ArityMismatch("row has " + std::to_string(row.size()) + " features, tree expects " +
                        std::to_string(feature_names.size()));
  }
  int i = 0;
  while (!nodes[i].leaf()) {
    i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  }
  return nodes[i].predicted;
}

std::size_t DecisionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes[i].leaf()) {
      stack.push_back({nodes[i].left, d + 1});
      stack.push_back({nodes[i].right, d + 1});
    }
  }
  return best;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = std::numeric_limits<double>::infinity();  // n-weighted child Gini * n
};

class Builder {
 public:
  Builder(const Dataset& data, const TreeOptions& options, Rng* rng)
      : data_(data), options_(options), rng_(rng), all_features_(data.features()) {
    std::iota(all_features_.begin(), all_features_.end(), 0);
  }

  DecisionTree build(std::vector<std::size_t> sample) {
    tree_.max_depth = options_.max_depth;
    tree_.feature_names = data_.feature_names;
    grow(std::move(sample), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> rows, std::size_t depth) {
    TreeNode node;
    for (auto r : rows) ++node.counts[data_.labels[r]];
    node.impurity = gini(node.counts[0], node.counts[1]);
    node.predicted = node.counts[1] > node.counts[0] ? 1 : 0;
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(node);

    const bool pure = node.counts[0] == 0 || node.counts[1] == 0;
    if (pure || depth >= options_.max_depth || rows.size() < options_.min_samples_split) return id;

    const Split best = find_split(rows);
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (data_.rows[r][best.feature] <= best.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& n = tree_.nodes[id];
    n.feature = best.feature;
    n.threshold = best.threshold;
    n.left = l;
    n.right = r;
    return id;
  }

  std::vector<std::size_t> candidate_features() {
    const std::size_t d = all_features_.size();
    if (options_.mtry == 0 || options_.mtry >= d || rng_ == nullptr) return all_features_;
    std::vector<std::size_t> pool = all_features_;
    for (std::size_t i = 0; i < options_.mtry; ++i) {
      std::swap(pool[i], pool[i + uniform_index(*rng_, d - i)]);
    }
    pool.resize(options_.mtry);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  Split find_split(const std::vector<std::size_t>& rows) {
    constexpr double kTieEpsilon = 1e-12;
    Split best;
    std::array<std::size_t, 2> total{};
    for (auto r : rows) ++total[data_.labels[r]];
    std::vector<std::pair<double, int>> column(rows.size());
    for (const std::size_t f : candidate_features()) {
      for (std::size_t i = 0; i < rows.size(); ++i) column[i] = {data_.rows[rows[i]][f], data_.labels[rows[i]]};
      std::sort(column.begin(), column.end());
      std::array<std::size_t, 2> left{};
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        ++left[column[i].second];
        const double lo = column[i].first;
        const double hi = column[i + 1].first;
        if (!(lo < hi)) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = column.size() - nl;
        const std::size_t r0 = total[0] - left[0];
        const std::size_t r1 = total[1] - left[1];
        const double score = 2.0 * static_cast<double>(left[0] * left[1]) / static_cast<double>(nl) +
                             2.0 * static_cast<double>(r0 * r1) / static_cast<double>(nr);
        if (score < best.score - kTieEpsilon) {
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid < hi)) mid = lo;
          best = {static_cast<int>(f), mid, score};
        }
      }
    }
    return best;
  }

  const Dataset& data_;
  const TreeOptions& options_;
  Rng* rng_;
  std::vector<std::size_t> all_features_;
  DecisionTree tree_;
};

}  // namespace

DecisionTree train_tree_on(const Dataset& data, std::span<const std::size_t> sample, const TreeOptions& options,
                           Rng* rng) {
  if (sample.empty() || data.size() == 0) throw EmptyDataset("cannot train a tree on zero rows");
  if (data.features() == 0) throw EmptyDataset("cannot train a tree without features");
  data.check();
  return Builder(data, options, rng).build({sample.begin(), sample.end()});
}

DecisionTree train_tree(const Dataset& data, const TreeOptions& options) {
  if (data.size() == 0) throw EmptyDataset("cannot train a tree on zero rows");
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  return train_tree_on(data, all, options, nullptr);
}

}  // namespace viewshift
