#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "viewshift/dataset.hpp"
#include "viewshift/errors.hpp"
#include "viewshift/evaluation.hpp"
#include "viewshift/model_io.hpp"

using namespace viewshift;

namespace {

Dataset make(std::vector<std::vector<double>> rows, std::vector<int> labels) {
  Dataset d;
  for (std::size_t j = 0; j < rows.front().size(); ++j) d.feature_names.push_back("f" + std::to_string(j));
  d.rows = std::move(rows);
  d.labels = std::move(labels);
  return d;
}

// Label depends on two of five features plus label noise.
Dataset noisy(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> r(5);
    for (auto& x : r) x = normal(rng);
    const double score = r[0] + r[1] * r[1] - 1.0 + 0.6 * normal(rng);
    labels.push_back(score > 0 ? 1 : 0);
    rows.push_back(r);
  }
  return make(rows, labels);
}

// Exhaustive best root split by weighted child Gini.
std::pair<int, double> best_root_split(const Dataset& d) {
  double best = gini(0, 0) + 10.0;
  std::pair<int, double> out{-1, 0.0};
  for (std::size_t f = 0; f < d.features(); ++f) {
    std::vector<double> values;
    for (const auto& r : d.rows) values.push_back(r[f]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t v = 1; v < values.size(); ++v) {
      const double t = (values[v - 1] + values[v]) / 2.0;
      std::size_t l[2] = {0, 0}, r[2] = {0, 0};
      for (std::size_t i = 0; i < d.size(); ++i) (d.rows[i][f] <= t ? l : r)[d.labels[i]]++;
      const double nl = static_cast<double>(l[0] + l[1]), nr = static_cast<double>(r[0] + r[1]);
      const double w = (nl * gini(l[0], l[1]) + nr * gini(r[0], r[1])) / (nl + nr);
      if (w < best - 1e-12) {
        best = w;
        out = {static_cast<int>(f), t};
      }
    }
  }
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2] : (v[v.size() / 2 - 1] + v[v.size() / 2]) / 2.0;
}

}  // namespace

TEST_CASE("Gini impurity") {
  CHECK(gini(2, 0) == 0.0);
  CHECK(gini(1, 1) == 0.5);
  CHECK(gini(3, 1) == doctest::Approx(0.375));
}

TEST_CASE("a single threshold separates a sorted feature") {
  const Dataset d = make({{1}, {2}, {3}, {4}}, {0, 0, 1, 1});
  const DecisionTree t = train_tree(d);
  CHECK(t.nodes[0].feature == 0);
  CHECK(t.nodes[0].threshold == 2.5);
  CHECK(t.depth() == 1);
  const std::vector<double> low{2.5}, high{2.6};
  CHECK(t.predict(low) == 0);
  CHECK(t.predict(high) == 1);
  const std::vector<double> wide{1, 2};
  CHECK_THROWS_AS(t.predict(wide), ArityMismatch);
  CHECK_THROWS_AS(train_tree(Dataset{}), EmptyDataset);
}

TEST_CASE("XOR needs depth two") {
  const Dataset d = make({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0});
  const DecisionTree deep = train_tree(d, {2, 2, 0});
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(deep.predict(d.rows[i]) == d.labels[i]);
  const DecisionTree shallow = train_tree(d, {1, 2, 0});
  std::size_t right = 0;
  for (std::size_t i = 0; i < d.size(); ++i) right += shallow.predict(d.rows[i]) == d.labels[i];
  CHECK(right == 2);
}

TEST_CASE("root split matches exhaustive search and the depth cap holds") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Dataset d = noisy(80, seed);
    const DecisionTree t = train_tree(d, {3, 2, 0});
    const auto [f, thr] = best_root_split(d);
    CHECK(t.nodes[0].feature == f);
    CHECK(t.nodes[0].threshold == doctest::Approx(thr));
    CHECK(t.depth() <= 3);
    std::size_t leaf_rows = 0;
    for (const auto& n : t.nodes) {
      if (n.leaf()) leaf_rows += n.samples();
    }
    CHECK(leaf_rows == d.size());
  }
}

TEST_CASE("forest votes are the majority of tree predictions") {
  const Dataset d = noisy(120, 4);
  ForestOptions o;
  o.n_trees = 25;
  o.seed = 9;
  o.threads = 1;
  const RandomForest f = train_forest(d, o);
  CHECK(f.n_trees() == 25);
  CHECK(f.mtry == 3);
  for (const auto& row : d.rows) {
    std::size_t ones = 0;
    for (const auto& t : f.trees) ones += t.predict(row) == 1;
    const Vote v = predict(f, row);
    CHECK(v.votes[1] == ones);
    CHECK(v.votes[0] + v.votes[1] == 25);
    CHECK(v.predicted == (2 * ones > 25 ? 1 : 0));
  }
  o.threads = 4;
  CHECK(forest_to_json(train_forest(d, o)) == forest_to_json(f));
  o.seed = 10;
  CHECK(forest_to_json(train_forest(d, o)) != forest_to_json(f));
}

TEST_CASE("a forest without resampling is the single tree") {
  const Dataset d = noisy(60, 2);
  ForestOptions o;
  o.n_trees = 3;
  o.bootstrap = false;
  o.mtry = d.features();
  const RandomForest f = train_forest(d, o);
  const std::string single = tree_to_json(train_tree(d, {o.max_depth, o.min_samples_split, 0}));
  for (const auto& t : f.trees) CHECK(tree_to_json(t) == single);
}

TEST_CASE("forest cross-validation is not worse than a single tree") {
  std::vector<double> tree_acc, forest_acc;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Dataset d = noisy(200, 100 + seed);
    tree_acc.push_back(cross_validate(TreeOptions{}, d, 5, seed).mean.accuracy);
    ForestOptions o;
    o.n_trees = 50;
    o.seed = seed;
    forest_acc.push_back(cross_validate(o, d, 5, seed).mean.accuracy);
  }
  CHECK(median(forest_acc) >= median(tree_acc));
}

TEST_CASE("one-class SVM invariants") {
  Rng rng(21);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> rows(200, std::vector<double>(2));
  for (auto& r : rows) {
    r[0] = normal(rng);
    r[1] = 3.0 * normal(rng) + 10.0;
  }
  for (double nu : {0.1, 0.3, 0.5}) {
    OcsvmOptions o;
    o.nu = nu;
    const OneClassSvm m = train_ocsvm(rows, o);
    const double total = std::accumulate(m.coefficients.begin(), m.coefficients.end(), 0.0);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    const double cap = 1.0 / (nu * static_cast<double>(rows.size()));
    for (double a : m.coefficients) {
      CHECK(a > 0.0);
      CHECK(a <= cap + 1e-12);
    }
    std::size_t outliers = 0;
    for (const auto& r : rows) outliers += !m.inlier(r);
    const double n = static_cast<double>(rows.size());
    // Outlier fraction <= nu <= support vector fraction, up to solver tolerance.
    CHECK(static_cast<double>(outliers) / n <= nu + 0.02);
    CHECK(static_cast<double>(m.support_vectors.size()) / n >= nu - 0.02);
    const std::vector<double> far{50.0, -40.0};
    CHECK_FALSE(m.inlier(far));
    // Optimality: rows off the support are inside, rows at the cap are
    // outside, free support vectors sit on the boundary.
    for (const auto& r : rows) {
      const auto z = m.standardization.apply(r);
      double a = 0.0;
      for (std::size_t s = 0; s < m.support_vectors.size(); ++s) {
        if (m.support_vectors[s] == z) a = m.coefficients[s];
      }
      const double f = m.decision(r);
      if (a == 0.0) {
        CHECK(f >= -2e-4);
      } else if (a >= cap - 1e-12) {
        CHECK(f <= 2e-4);
      } else {
        CHECK(std::abs(f) <= 2e-4);
      }
    }
    const std::vector<double> wrong{0.0};
    CHECK_THROWS_AS(m.decision(wrong), ArityMismatch);
    CHECK(ocsvm_to_json(ocsvm_from_json(ocsvm_to_json(m))) == ocsvm_to_json(m));
    CHECK(ocsvm_from_json(ocsvm_to_json(m)).decision(far) == doctest::Approx(m.decision(far)));
  }

  const std::vector<std::vector<double>> same(10, std::vector<double>{1.0, 2.0});
  CHECK_THROWS_AS(train_ocsvm(same), DegenerateData);
  const std::vector<std::vector<double>> one(1, std::vector<double>{1.0, 2.0});
  CHECK_THROWS_AS(train_ocsvm(one), DomainError);
  OcsvmOptions bad;
  bad.nu = 0.0;
  CHECK_THROWS_AS(train_ocsvm(rows, bad), DomainError);
  bad.nu = 1.5;
  CHECK_THROWS_AS(train_ocsvm(rows, bad), DomainError);
}

TEST_CASE("metrics from a confusion matrix") {
  const Metrics m = metrics_from({3, 1, 2, 4});
  CHECK(m.precision == doctest::Approx(0.75));
  CHECK(m.recall == doctest::Approx(0.6));
  CHECK(m.accuracy == doctest::Approx(0.7));
  CHECK(m.f1 == doctest::Approx(2.0 / 3.0));

  // Always predicting "impactful" on 4 positives and 6 negatives.
  Confusion always;
  for (int i = 0; i < 10; ++i) always.add(i < 4 ? 1 : 0, 1);
  const Metrics a = metrics_from(always);
  CHECK(a.recall == 1.0);
  CHECK(a.precision == doctest::Approx(0.4));
  CHECK(a.accuracy == doctest::Approx(0.4));

  const Metrics none = metrics_from({0, 0, 0, 5});
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK(none.accuracy == 1.0);
}

TEST_CASE("stratified folds balance each class") {
  std::vector<int> labels;
  for (int i = 0; i < 23; ++i) labels.push_back(i < 9 ? 1 : 0);
  const auto folds = stratified_folds(labels, 5, 3);
  REQUIRE(folds.size() == labels.size());
  for (int cls : {0, 1}) {
    std::vector<std::size_t> per(5, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) per[folds[i]]++;
    }
    CHECK(*std::max_element(per.begin(), per.end()) - *std::min_element(per.begin(), per.end()) <= 1);
  }
  CHECK(stratified_folds(labels, 5, 3) == folds);
  const std::vector<int> few = {1, 1, 0, 0, 0, 0};
  CHECK_THROWS_AS(stratified_folds(few, 3, 1), InsufficientRows);

  const Dataset d = noisy(50, 8);
  const CvReport r = cross_validate(TreeOptions{}, d, 5, 3);
  CHECK(r.per_fold.size() == 5);
  std::size_t seen = 0;
  for (const auto& f : r.per_fold) {
    const auto& c = f.confusion;
    seen += c.tp + c.fp + c.fn + c.tn;
  }
  CHECK(seen == d.size());
  double acc = 0;
  for (const auto& f : r.per_fold) acc += f.metrics.accuracy;
  CHECK(r.mean.accuracy == doctest::Approx(acc / 5));
  CHECK(cv_report_to_json(r) == cv_report_to_json(cross_validate(TreeOptions{}, d, 5, 3)));
}

TEST_CASE("Gini importance by hand") {
  const Dataset d = make({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 0, 0, 1});
  const DecisionTree t = train_tree(d);
  const auto imp = feature_importance(t);
  REQUIRE(imp.size() == 2);
  CHECK(imp[0].name == "f1");
  CHECK(imp[0].importance == doctest::Approx(2.0 / 3.0));
  CHECK(imp[1].name == "f0");
  CHECK(imp[1].importance == doctest::Approx(1.0 / 3.0));

  const Dataset single = make({{1, 5}, {2, 5}, {3, 5}, {4, 5}}, {0, 0, 1, 1});
  const auto only = feature_importance(train_tree(single));
  REQUIRE(only.size() == 1);
  CHECK(only[0].feature == 0);
  CHECK(only[0].importance == 1.0);

  ForestOptions o;
  o.n_trees = 20;
  const auto fimp = feature_importance(train_forest(noisy(150, 5), o));
  double sum = 0;
  for (const auto& i : fimp) sum += i.importance;
  CHECK(sum == doctest::Approx(1.0));
  CHECK(std::is_sorted(fimp.begin(), fimp.end(), [](const Importance& a, const Importance& b) {
    return a.importance > b.importance;
  }));
}

TEST_CASE("ablation and dataset serialization") {
  const Dataset d = noisy(10, 1);
  const Dataset a = ablate(d, "f2");
  CHECK(a.features() == 4);
  CHECK(a.rows[3].size() == 4);
  CHECK(a.rows[3][2] == d.rows[3][3]);
  CHECK_THROWS_AS(ablate(d, "f9"), UnknownFeature);
  const Dataset back = parse_dataset_csv(dataset_csv(d));
  CHECK(back.feature_names == d.feature_names);
  CHECK(back.labels == d.labels);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.features(); ++j) CHECK(back.rows[i][j] == doctest::Approx(d.rows[i][j]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(parse_dataset_csv("a,b\n1\n"), InputError);
}

TEST_CASE("tree and forest serialization round trips") {
  const Dataset d = noisy(100, 6);
  const DecisionTree t = train_tree(d);
  const DecisionTree tb = tree_from_json(tree_to_json(t));
  ForestOptions o;
  o.n_trees = 10;
  const RandomForest f = train_forest(d, o);
  const RandomForest fb = forest_from_json(forest_to_json(f));
  for (const auto& row : d.rows) {
    CHECK(tb.predict(row) == t.predict(row));
    CHECK(predict(fb, row).votes == predict(f, row).votes);
  }
  CHECK(tree_to_json(tb) == tree_to_json(t));
  CHECK_THROWS_AS(tree_from_json("[]"), ParseError);
}
