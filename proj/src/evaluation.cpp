#include "viewshift/evaluation.hpp"

#include <algorithm>
#include <numeric>

#include "viewshift/errors.hpp"
#include "viewshift/random.hpp"

namespace viewshift {

void Confusion::add(int truth, int predicted) {
  if (truth == 1) {
    ++(predicted == 1 ? tp : fn);
  } else {
    ++(predicted == 1 ? fp : tn);
  }
}

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

Metrics metrics_from(const Confusion& c) {
  const auto tp = static_cast<double>(c.tp);
  const auto fp = static_cast<double>(c.fp);
  const auto fn = static_cast<double>(c.fn);
  const auto tn = static_cast<double>(c.tn);
  Metrics m;
  m.accuracy = ratio(tp + tn, tp + tn + fp + fn);
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
  return m;
}

std::string model_name(const ModelSpec& spec) {
  switch (spec.index()) {
    case 0: return "dt";
    case 1: return "rf";
    default: return "ocsvm";
  }
}

std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw DomainError("need at least two folds");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw DomainError("labels must be 0 or 1");
    by_class[labels[i]].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < folds) {
      throw InsufficientRows("class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                             " rows, fewer than " + std::to_string(folds) + " folds");
    }
  }
  Rng rng(seed);
  std::vector<std::size_t> fold_of(labels.size());
  std::size_t offset = 0;
  for (auto& members : by_class) {
    shuffle(std::span(members), rng);
    for (std::size_t i = 0; i < members.size(); ++i) fold_of[members[i]] = (offset + i) % folds;
    // Continue the deal where the previous class stopped so fold totals stay balanced.
    offset = (offset + members.size()) % folds;
  }
  return fold_of;
}

namespace {

std::vector<int> fit_and_predict(const ModelSpec& spec, const Dataset& train, const Dataset& test) {
  std::vector<int> out;
  out.reserve(test.size());
  if (const auto* tree_opts = std::get_if<TreeOptions>(&spec)) {
    const auto tree = train_tree(train, *tree_opts);
    for (const auto& r : test.rows) out.push_back(tree.predict(r));
  } else if (const auto* forest_opts = std::get_if<ForestOptions>(&spec)) {
    const auto forest = train_forest(train, *forest_opts);
    for (const auto& r : test.rows) out.push_back(predict(forest, r).predicted);
  } else {
    const auto& svm_opts = std::get<OcsvmOptions>(spec);
    std::vector<std::vector<double>> positives;
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (train.labels[i] == 1) positives.push_back(train.rows[i]);
    }
    const auto scaling = Standardization::fit(train.rows);
    const auto svm = train_ocsvm(positives, svm_opts, &scaling);
    for (const auto& r : test.rows) out.push_back(svm.inlier(r) ? 1 : 0);
  }
  return out;
}

}  // namespace

CvReport cross_validate(const ModelSpec& spec, const Dataset& data, std::size_t folds, std::uint64_t seed,
                        const FoldTransform& transform) {
  data.check();
  CvReport report;
  report.model = model_name(spec);
  report.folds = folds;
  report.seed = seed;
  report.fold_of_row = stratified_folds(data.labels, folds, seed);

  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < data.size(); ++i) {
      (report.fold_of_row[i] == f ? test_rows : train_rows).push_back(i);
    }
    const Dataset prepared = transform ? transform(data, train_rows) : Dataset{};
    const Dataset& source = transform ? prepared : data;
    if (source.size() != data.size()) throw DomainError("fold transform changed the row count");
    const Dataset train = source.subset(train_rows);
    const Dataset test = source.subset(test_rows);
    const auto predicted = fit_and_predict(spec, train, test);
    FoldResult fold;
    for (std::size_t i = 0; i < test.size(); ++i) fold.confusion.add(test.labels[i], predicted[i]);
    fold.metrics = metrics_from(fold.confusion);
    report.per_fold.push_back(fold);
  }

  const double k = static_cast<double>(folds);
  for (const auto& fold : report.per_fold) {
    report.mean.accuracy += fold.metrics.accuracy / k;
    report.mean.precision += fold.metrics.precision / k;
    report.mean.recall += fold.metrics.recall / k;
    report.mean.f1 += fold.metrics.f1 / k;
  }
  return report;
}

namespace {

std::vector<double> raw_importance(const DecisionTree& tree) {
  std::vector<double> imp(tree.feature_names.size(), 0.0);
  if (tree.nodes.empty()) return imp;
  const double total = static_cast<double>(tree.nodes[0].samples());
  for (const auto& node : tree.nodes) {
    if (node.leaf()) continue;
    const auto& l = tree.nodes[node.left];
    const auto& r = tree.nodes[node.right];
    const double decrease = static_cast<double>(node.samples()) * node.impurity -
                            static_cast<double>(l.samples()) * l.impurity -
                            static_cast<double>(r.samples()) * r.impurity;
    imp[node.feature] += std::max(0.0, decrease) / total;
  }
  return imp;
}

std::vector<Importance> rank(const std::vector<double>& imp, const std::vector<std::string>& names) {
  const double sum = std::accumulate(imp.begin(), imp.end(), 0.0);
  std::vector<Importance> out;
  if (!(sum > 0.0)) return out;
  for (std::size_t f = 0; f < imp.size(); ++f) {
    if (imp[f] > 0.0) out.push_back({f, names[f], imp[f] / sum});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.importance > b.importance; });
  return out;
}

}  // namespace

std::vector<Importance> feature_importance(const DecisionTree& tree) {
  return rank(raw_importance(tree), tree.feature_names);
}

std::vector<Importance> feature_importance(const RandomForest& forest) {
  if (forest.trees.empty()) return {};
  std::vector<double> total(forest.trees.front().feature_names.size(), 0.0);
  for (const auto& tree : forest.trees) {
    const auto imp = raw_importance(tree);
    for (std::size_t f = 0; f < imp.size(); ++f) total[f] += imp[f] / static_cast<double>(forest.trees.size());
  }
  return rank(total, forest.trees.front().feature_names);
}

}  // namespace viewshift
