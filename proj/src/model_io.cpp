#include "viewshift/model_io.hpp"

#include "json.hpp"
#include "viewshift/errors.hpp"

namespace viewshift {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json node_json(const DecisionTree& tree, int i) {
  const auto& n = tree.nodes[i];
  ordered_json out;
  if (n.leaf()) {
    out["class"] = n.predicted;
  } else {
    out["feature"] = n.feature;
    out["name"] = tree.feature_names[n.feature];
    out["threshold"] = n.threshold;
  }
  out["counts"] = {n.counts[0], n.counts[1]};
  out["impurity"] = n.impurity;
  if (!n.leaf()) {
    out["left"] = node_json(tree, n.left);
    out["right"] = node_json(tree, n.right);
  }
  return out;
}

ordered_json tree_json(const DecisionTree& tree) {
  ordered_json out;
  out["max_depth"] = tree.max_depth;
  out["features"] = tree.feature_names;
  out["root"] = node_json(tree, 0);
  return out;
}

int read_node(const json& j, DecisionTree& tree) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  TreeNode node;
  const auto counts = j.at("counts").get<std::vector<std::size_t>>();
  if (counts.size() != 2) throw ParseError("node counts must have two entries");
  node.counts = {counts[0], counts[1]};
  node.impurity = j.at("impurity").get<double>();
  if (j.contains("feature")) {
    node.feature = j.at("feature").get<int>();
    if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= tree.feature_names.size()) {
      throw ParseError("node feature index out of range");
    }
    node.threshold = j.at("threshold").get<double>();
    node.predicted = node.counts[1] > node.counts[0] ? 1 : 0;
    node.left = read_node(j.at("left"), tree);
    node.right = read_node(j.at("right"), tree);
  } else {
    node.predicted = j.at("class").get<int>();
  }
  tree.nodes[id] = node;
  return id;
}

DecisionTree tree_from(const json& j) {
  DecisionTree tree;
  tree.max_depth = j.at("max_depth").get<std::size_t>();
  tree.feature_names = j.at("features").get<std::vector<std::string>>();
  read_node(j.at("root"), tree);
  return tree;
}

template <typename Fn>
auto parse_model(std::string_view text, Fn&& fn) {
  try {
    return fn(json::parse(text));
  } catch (const json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
}

ordered_json metrics_json(const Metrics& m) {
  return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

}  // namespace

std::string tree_to_json(const DecisionTree& tree) { return tree_json(tree).dump(2); }

DecisionTree tree_from_json(std::string_view text) {
  return parse_model(text, [](const json& j) { return tree_from(j); });
}

std::string forest_to_json(const RandomForest& forest) {
  ordered_json out;
  out["model"] = "rf";
  out["seed"] = forest.seed;
  out["mtry"] = forest.mtry;
  out["trees"] = ordered_json::array();
  for (const auto& t : forest.trees) out["trees"].push_back(tree_json(t));
  return out.dump(2);
}

RandomForest forest_from_json(std::string_view text) {
  return parse_model(text, [](const json& j) {
    RandomForest f;
    f.seed = j.at("seed").get<std::uint64_t>();
    f.mtry = j.at("mtry").get<std::size_t>();
    for (const auto& t : j.at("trees")) f.trees.push_back(tree_from(t));
    return f;
  });
}

std::string ocsvm_to_json(const OneClassSvm& m) {
  ordered_json out;
  out["model"] = "ocsvm";
  out["nu"] = m.nu;
  out["gamma"] = m.gamma;
  out["rho"] = m.rho;
  out["coefficients"] = m.coefficients;
  out["support_vectors"] = m.support_vectors;
  out["mean"] = m.standardization.mean;
  out["scale"] = m.standardization.scale;
  out["iterations"] = m.iterations;
  out["kkt_violation"] = m.kkt_violation;
  return out.dump(2);
}

OneClassSvm ocsvm_from_json(std::string_view text) {
  return parse_model(text, [](const json& j) {
    OneClassSvm m;
    m.nu = j.at("nu").get<double>();
    m.gamma = j.at("gamma").get<double>();
    m.rho = j.at("rho").get<double>();
    m.coefficients = j.at("coefficients").get<std::vector<double>>();
    m.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    m.standardization.mean = j.at("mean").get<std::vector<double>>();
    m.standardization.scale = j.at("scale").get<std::vector<double>>();
    m.standardization.constant.assign(m.standardization.mean.size(), false);
    if (m.coefficients.size() != m.support_vectors.size() ||
        m.standardization.scale.size() != m.standardization.mean.size()) {
      throw ParseError("one-class model arrays disagree in length");
    }
    m.iterations = j.value("iterations", std::size_t{0});
    m.kkt_violation = j.value("kkt_violation", 0.0);
    return m;
  });
}

std::string cv_report_to_json(const CvReport& report, const std::vector<Importance>& importance) {
  ordered_json out;
  out["model"] = report.model;
  out["folds"] = report.folds;
  out["seed"] = report.seed;
  out["mean"] = metrics_json(report.mean);
  out["per_fold"] = ordered_json::array();
  for (const auto& f : report.per_fold) {
    auto fold = metrics_json(f.metrics);
    fold["tp"] = f.confusion.tp;
    fold["fp"] = f.confusion.fp;
    fold["fn"] = f.confusion.fn;
    fold["tn"] = f.confusion.tn;
    out["per_fold"].push_back(std::move(fold));
  }
  out["fold_of_row"] = report.fold_of_row;
  if (!importance.empty()) {
    out["feature_importance"] = ordered_json::array();
    for (const auto& imp : importance) {
      out["feature_importance"].push_back({{"feature", imp.name}, {"index", imp.feature}, {"importance", imp.importance}});
    }
  }
  return out.dump(2);
}

}  // namespace viewshift
