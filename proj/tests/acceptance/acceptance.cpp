// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "json.hpp"
#include "viewshift/cli.hpp"
#include "viewshift/debut.hpp"
#include "viewshift/detector.hpp"
#include "viewshift/evaluation.hpp"
#include "viewshift/kstest.hpp"
#include "viewshift/netstats.hpp"
#include "viewshift/random.hpp"
#include "viewshift/series.hpp"
#include "viewshift/synth.hpp"

using namespace viewshift;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

double brute_ks(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pts(a);
  pts.insert(pts.end(), b.begin(), b.end());
  double d = 0.0;
  for (double x : pts) {
    const auto below = [x](const std::vector<double>& s) {
      return static_cast<double>(std::count_if(s.begin(), s.end(), [x](double v) { return v <= x; })) /
             static_cast<double>(s.size());
    };
    d = std::max(d, std::abs(below(a) - below(b)));
  }
  return d;
}

Outcome ks_oracle() {
  Rng rng(101);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> a(1 + uniform_index(rng, 40)), b(1 + uniform_index(rng, 40));
    // Small integer support forces ties.
    for (auto& x : a) x = static_cast<double>(uniform_index(rng, 12));
    for (auto& x : b) x = static_cast<double>(uniform_index(rng, 12)) + (t % 3 == 0 ? 0.5 : 0.0);
    worst = std::max(worst, std::abs(ks_statistic(a, b) - brute_ks(a, b)));
  }
  return {worst <= 1e-12, "max |D - D_oracle| = " + std::to_string(worst)};
}

Outcome ks_calibration() {
  Rng rng(202);
  std::normal_distribution<double> normal;
  std::size_t rejected = 0;
  const std::size_t pairs = 10000;
  std::vector<double> a(96), b(96);
  for (std::size_t t = 0; t < pairs; ++t) {
    for (auto& x : a) x = normal(rng);
    for (auto& x : b) x = normal(rng);
    rejected += ks_pvalue(ks_statistic(a, b), 96, 96) <= 0.05;
  }
  const double rate = static_cast<double>(rejected) / static_cast<double>(pairs);
  return {rate >= 0.03 && rate <= 0.07, "rejection rate " + num(rate)};
}

Outcome detector_recall() {
  SynthConfig cfg;
  cfg.n_games = 50;
  cfg.n_snapshots = 2000;
  cfg.fixed_popularity = 50.0;
  cfg.emit_metadata = false;
  cfg.stream_detail = false;
  cfg.seed = 303;
  Rng rng(cfg.seed);
  for (std::size_t g = 0; g < cfg.n_games; ++g) cfg.shifts.push_back({g, 400 + uniform_index(rng, 1200), 4.0});
  const SynthCorpus c = generate_corpus(cfg);
  const SeriesMap m = build_series(c.snapshots, cfg.tick);
  const DetectorConfig dc{96, 0.05, cfg.tick};
  std::size_t hits = 0;
  for (const auto& sh : c.truth.shifts) {
    for (const auto& e : detect_changes(m.at(sh.game), dc)) {
      if (e.t_detect >= sh.ts && e.t_detect <= sh.ts + 2 * 96 * cfg.tick) {
        ++hits;
        break;
      }
    }
  }
  const double recall = static_cast<double>(hits) / static_cast<double>(c.truth.shifts.size());
  return {recall >= 0.9, "recall " + num(recall) + " (" + std::to_string(hits) + "/50)"};
}

Outcome detector_false_alarms() {
  const SynthConfig cfg = stationary_config(100, 5000, 404);
  const SynthCorpus c = generate_corpus(cfg);
  const SeriesMap m = build_series(c.snapshots, cfg.tick);
  std::size_t tests = 0, rejections = 0;
  for (const auto& [g, s] : m) {
    detect_changes(s, {96, 0.05, cfg.tick}, [&](const WindowTest& t) {
      ++tests;
      rejections += t.result.significant;
    });
  }
  const double frac = static_cast<double>(rejections) / static_cast<double>(tests);
  return {tests > 0 && frac <= 0.07, "rejecting fraction " + num(frac) + " of " + std::to_string(tests) + " tests"};
}

Outcome window_purge() {
  SynthConfig cfg;
  cfg.n_games = 30;
  cfg.n_snapshots = 3000;
  cfg.emit_metadata = false;
  cfg.seed = 505;
  cfg.invalid_snapshots = {150, 151, 700, 1333, 2000, 2001, 2002, 2600};
  for (std::size_t g = 0; g < 30; g += 3) cfg.shifts.push_back({g, 1000 + 50 * g, 3.0});
  const SynthCorpus c = generate_corpus(cfg);
  std::stringstream ss;
  for (const auto& s : c.snapshots) ss << to_json_line(s) << '\n';
  const Corpus loaded = load_snapshots(ss);
  const SeriesMap m = build_series(loaded.snapshots, cfg.tick);
  std::size_t tests = 0, violations = 0;
  for (const auto& [g, s] : m) {
    for (const auto& dc : cyclic_window_configs(0.05, cfg.tick)) {
      detect_changes(s, dc, [&](const WindowTest& t) {
        ++tests;
        for (std::size_t begin : {t.w1_begin, t.w2_begin}) {
          for (std::size_t i = begin + 1; i < begin + t.k; ++i) {
            if (s.gap_before(i) || s.ts(i) - s.ts(i - 1) != cfg.tick) ++violations;
          }
        }
      });
    }
  }
  return {tests > 0 && violations == 0 && loaded.report.rejected() == cfg.invalid_snapshots.size(),
          std::to_string(violations) + " violations in " + std::to_string(tests) + " tests, " +
              std::to_string(loaded.report.rejected()) + " snapshots rejected"};
}

Outcome power_law() {
  Rng rng(606);
  std::vector<double> xs(10000);
  for (auto& x : xs) x = std::pow(1.0 - uniform_unit(rng), -1.0 / 1.5);
  const double alpha = fit_power_law(xs, 1.0).alpha;
  return {std::abs(alpha - 2.5) <= 0.1, "alpha " + num(alpha)};
}

Outcome cycles() {
  SynthConfig cfg;
  cfg.n_games = 200;
  cfg.n_snapshots = 96 * 14;
  cfg.daily_amplitude = 2.0;
  cfg.emit_metadata = false;
  cfg.seed = 707;
  const Totals t = totals_series(generate_corpus(cfg).snapshots);
  const std::vector<double> tv(t.viewers.begin(), t.viewers.end());
  const double diurnal = autocorrelation(tv, 96);
  Rng rng(708);
  std::normal_distribution<double> normal;
  std::vector<double> noise(20000);
  for (auto& x : noise) x = normal(rng);
  const double white = autocorrelation(noise, 96);
  return {diurnal > 0.5 && std::abs(white) < 0.05, "diurnal " + num(diurnal) + ", white noise " + num(white)};
}

Outcome debut_exactness() {
  const SynthConfig cfg = planted_signal_config(10, 10, 808);
  const SynthCorpus c = generate_corpus(cfg);
  const SeriesMap m = build_series(c.snapshots, cfg.tick);
  const auto debuts = find_debuts(m);
  const EventLog log = detect_corpus(m, cyclic_window_configs(0.05, cfg.tick));
  const Attribution a = attribute_events(debuts, log.events);
  std::map<std::string, bool> truth;
  std::size_t planted_impactful = 0;
  for (const auto& d : c.truth.debuts) {
    truth[d.game] = d.impactful;
    planted_impactful += d.impactful;
  }
  std::size_t mismatches = a.labels.size() == truth.size() ? 0 : 1;
  for (const auto& l : a.labels) {
    const auto it = truth.find(l.game);
    mismatches += it == truth.end() || it->second != l.impactful;
  }

  const std::vector<DebutRecord> one = {{"new", 100000, 0, false, {}}};
  const std::vector<ChangeEvent> in = {{"old", 96, 100000 + 29 * 60, 0.3, 0.01}};
  const std::vector<ChangeEvent> out = {{"old", 96, 100000 + 31 * 60, 0.3, 0.01}};
  const bool boundaries = attribute_events(one, in).labels.at(0).impactful &&
                          !attribute_events(one, out).labels.at(0).impactful;
  return {mismatches == 0 && boundaries && planted_impactful >= 10,
          std::to_string(a.labels.size()) + " labels, " + std::to_string(mismatches) + " mismatches, boundaries " +
              (boundaries ? "ok" : "wrong")};
}

std::size_t path_depth(const DecisionTree& t, int node) {
  const TreeNode& n = t.nodes[static_cast<std::size_t>(node)];
  if (n.leaf()) return 0;
  return 1 + std::max(path_depth(t, n.left), path_depth(t, n.right));
}

Outcome trees() {
  Rng rng(909);
  std::normal_distribution<double> normal;
  Dataset d;
  d.feature_names = {"a", "b", "c", "d"};
  for (int i = 0; i < 400; ++i) {
    std::vector<double> r(4);
    for (auto& x : r) x = normal(rng);
    d.rows.push_back(r);
    d.labels.push_back(std::sin(3 * r[0]) + r[1] * r[2] + 0.3 * normal(rng) > 0 ? 1 : 0);
  }
  const DecisionTree t = train_tree(d, {5, 2, 0});
  bool ok = path_depth(t, 0) <= 5;
  ForestOptions fo;
  fo.n_trees = 31;
  fo.seed = 5;
  const RandomForest f = train_forest(d, fo);
  for (const auto& tree : f.trees) ok = ok && path_depth(tree, 0) <= 5;
  std::size_t vote_errors = 0;
  for (const auto& row : d.rows) {
    std::size_t ones = 0;
    for (const auto& tree : f.trees) ones += tree.predict(row);
    const Vote v = predict(f, row);
    vote_errors += v.votes[1] != ones || v.predicted != (2 * ones > f.n_trees() ? 1 : 0);
  }
  Dataset x;
  x.feature_names = {"p", "q"};
  x.rows = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  x.labels = {0, 1, 1, 0};
  const DecisionTree xt = train_tree(x, {2, 2, 0});
  std::size_t xor_right = 0;
  for (std::size_t i = 0; i < 4; ++i) xor_right += xt.predict(x.rows[i]) == x.labels[i];
  const RandomForest again = train_forest(d, fo);
  bool same = again.trees.size() == f.trees.size();
  for (std::size_t i = 0; same && i < f.trees.size(); ++i) {
    const auto& p = f.trees[i].nodes;
    const auto& q = again.trees[i].nodes;
    same = p.size() == q.size();
    for (std::size_t n = 0; same && n < p.size(); ++n) {
      same = p[n].feature == q[n].feature && p[n].threshold == q[n].threshold && p[n].predicted == q[n].predicted;
    }
  }
  return {ok && vote_errors == 0 && xor_right == 4 && same,
          "depth ok " + std::string(ok ? "yes" : "no") + ", vote errors " + std::to_string(vote_errors) +
              ", XOR " + std::to_string(xor_right) + "/4, reproducible " + (same ? "yes" : "no")};
}

Outcome nu_property() {
  double worst_excess = -1.0, worst_sum = 0.0;
  for (double nu : {0.1, 0.5}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      Rng rng(1000 + seed);
      std::normal_distribution<double> normal;
      std::vector<std::vector<double>> rows(150, std::vector<double>(3));
      for (auto& r : rows) {
        for (auto& v : r) v = normal(rng);
        r[2] = r[0] * r[0] + 0.2 * r[2];
      }
      OcsvmOptions o;
      o.nu = nu;
      const OneClassSvm m = train_ocsvm(rows, o);
      std::size_t outliers = 0;
      for (const auto& r : rows) outliers += !m.inlier(r);
      worst_excess = std::max(worst_excess, static_cast<double>(outliers) / 150.0 - nu);
      const double sum = std::accumulate(m.coefficients.begin(), m.coefficients.end(), 0.0);
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }
  }
  return {worst_excess <= 0.05 && worst_sum <= 1e-6,
          "max outlier fraction - nu " + num(worst_excess) + ", max |sum a - 1| " + std::to_string(worst_sum)};
}

Outcome metric_arithmetic() {
  const Metrics m = metrics_from({3, 1, 2, 4});
  const bool ok = m.precision == 0.75 && m.recall == 0.6 && m.accuracy == 0.7 && std::abs(m.f1 - 2.0 / 3.0) <= 1e-9;
  return {ok, "precision " + num(m.precision) + " recall " + num(m.recall) + " accuracy " + num(m.accuracy) +
                  " f1 " + num(m.f1, 6)};
}

// Runs the command dispatcher with stdout captured.
int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "viewshift");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream sink;
  auto* old = std::cout.rdbuf(sink.rdbuf());
  const int rc = cli::run(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old);
  return rc;
}

struct PipelineRun {
  bool ok = false;
  double seconds = 0;
  json full;
  json ablated;
};

const PipelineRun& planted_pipeline() {
  static const PipelineRun run = [] {
    PipelineRun r;
    const fs::path dir = fs::temp_directory_path() / ("viewshift-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    const auto f = [&](const std::string& n) { return (dir / n).string(); };
    const auto t0 = std::chrono::steady_clock::now();
    r.ok = run_cli({"synth", "--out", dir.string(), "--preset", "planted", "--impactful", "80", "--inert", "80",
                    "--seed", "7"}) == 0 &&
           run_cli({"detect", "--snapshots", f("snapshots.jsonl"), "--events", f("events.jsonl"), "--summary",
                    f("window_summary.csv")}) == 0 &&
           run_cli({"debuts", "--snapshots", f("snapshots.jsonl"), "--events", f("events.jsonl"), "--labels",
                    f("labels.csv"), "--summary", f("debut_summary.json")}) == 0 &&
           run_cli({"features", "--labels", f("labels.csv"), "--metadata-dir", f("metadata"), "--snapshots",
                    f("snapshots.jsonl"), "--dataset", f("dataset.csv"), "--drop-report", f("drop_report.csv"),
                    "--schema", f("schema.json")}) == 0 &&
           run_cli({"train", "--dataset", f("dataset.csv"), "--model", "dt", "--folds", "10", "--report",
                    f("cv_dt.json")}) == 0;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.ok) {
      r.full = json::parse(std::ifstream(f("cv_dt.json")));
      r.ok = run_cli({"train", "--dataset", f("dataset.csv"), "--model", "dt", "--folds", "10", "--ablate", "top",
                      "--report", f("cv_dt_ablated.json")}) == 0;
      if (r.ok) r.ablated = json::parse(std::ifstream(f("cv_dt_ablated.json")));
    }
    fs::remove_all(dir);
    return r;
  }();
  return run;
}

std::string top_feature(const json& report) {
  if (!report.contains("feature_importance") || report["feature_importance"].empty()) return "";
  return report["feature_importance"][0].at("feature").get<std::string>();
}

Outcome planted_signal() {
  const PipelineRun& r = planted_pipeline();
  if (!r.ok) return {false, "pipeline command failed"};
  const double acc = r.full.at("mean").at("accuracy").get<double>();
  const std::string top = top_feature(r.full);
  return {acc >= 0.75 && top == "description_len" && r.seconds < 300,
          "DT 10-fold accuracy " + num(acc) + ", top feature " + top + ", pipeline " + num(r.seconds, 1) + " s"};
}

Outcome ablation() {
  const PipelineRun& r = planted_pipeline();
  if (!r.ok) return {false, "pipeline command failed"};
  const double drop = r.full.at("mean").at("accuracy").get<double>() - r.ablated.at("mean").at("accuracy").get<double>();
  const std::string top = top_feature(r.ablated);
  return {drop >= 0.1 && top == "user_reviews_count" && r.ablated.value("ablated", "") == "description_len",
          "accuracy drop " + num(drop) + ", new top feature " + top};
}

Outcome ingestion() {
  const std::string path = std::string(VIEWSHIFT_TEST_DATA) + "/sample_snapshots.jsonl";
  const Corpus a = load_snapshot_file(path);
  const Corpus b = load_snapshot_file(path);
  std::string text_a, text_b;
  for (const auto& s : a.snapshots) text_a += to_json_line(s) + "\n";
  for (const auto& s : b.snapshots) text_b += to_json_line(s) + "\n";
  std::istringstream again(text_a);
  const Corpus round = load_snapshots(again);
  std::string text_round;
  for (const auto& s : round.snapshots) text_round += to_json_line(s) + "\n";

  const SeriesMap m = build_series(a.snapshots);
  const Totals t = totals_series(a.snapshots);
  std::size_t conservation_errors = 0;
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
    std::int64_t viewers = 0, streamers = 0;
    for (const auto& [g, s] : m) {
      viewers += s.viewers[i];
      streamers += s.streamers[i];
    }
    conservation_errors += viewers != t.viewers[i] || streamers != t.streamers[i];
  }
  std::size_t gaps = 0;
  for (std::size_t i = 0; i < m.begin()->second.size(); ++i) gaps += m.begin()->second.gap_before(i);
  const bool ok = text_a == text_b && text_a == text_round && a.report.accepted == 13 && a.report.rejected() == 4 &&
                  conservation_errors == 0 && gaps >= 1 && round.report.rejected() == 0;
  return {ok, std::to_string(a.report.accepted) + " accepted, " + std::to_string(a.report.rejected()) +
                  " rejected, " + std::to_string(m.size()) + " series, " + std::to_string(gaps) + " gaps, " +
                  std::to_string(conservation_errors) + " conservation errors"};
}

}  // namespace

int main() {
  const std::vector<std::tuple<int, std::string, double, std::function<Outcome()>>> criteria = {
      {1, "KS oracle equivalence", 10, ks_oracle},
      {2, "KS calibration", 60, ks_calibration},
      {3, "detector recall", 60, detector_recall},
      {4, "detector false alarms", 0, detector_false_alarms},
      {5, "window purge", 0, window_purge},
      {6, "power-law recovery", 0, power_law},
      {7, "cycle diagnostic", 0, cycles},
      {8, "debut attribution exactness", 0, debut_exactness},
      {9, "tree/forest correctness", 0, trees},
      {10, "one-class nu-property", 0, nu_property},
      {11, "CV metric arithmetic", 0, metric_arithmetic},
      {12, "end-to-end planted signal", 300, planted_signal},
      {13, "ablation", 300, ablation},
      {14, "format ingestion", 0, ingestion},
  };
  int failures = 0;
  for (const auto& [id, name, budget, check] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget > 0 && secs > budget) {
      o.pass = false;
      o.detail += ", over the " + num(budget, 0) + " s budget";
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << name << ": " << o.detail << " [" << num(secs, 2)
              << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
