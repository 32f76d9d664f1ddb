#include "viewshift/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "viewshift/csv.hpp"
#include "viewshift/debut.hpp"
#include "viewshift/detector.hpp"
#include "viewshift/errors.hpp"
#include "viewshift/evaluation.hpp"
#include "viewshift/giantbomb_client.hpp"
#include "viewshift/metadata.hpp"
#include "viewshift/model_io.hpp"
#include "viewshift/netstats.hpp"
#include "viewshift/parallel.hpp"
#include "viewshift/pipeline_config.hpp"
#include "viewshift/synth.hpp"

namespace viewshift::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::int64_t kDaySeconds = 86400;

// Flag values collected by CLI11, applied on top of the config file.
struct Overrides {
  std::map<std::string, std::string> values;
  std::string config_path;

  PipelineConfig resolve() const {
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : PipelineConfig::load(config_path);
    for (const auto& [k, v] : values) cfg.set(k, v);
    cfg.check_distinct_paths();
    return cfg;
  }
};

void option(CLI::App* app, Overrides& o, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&o, key](const std::string& v) { o.values[key] = v; }, help);
}

void flag(CLI::App* app, Overrides& o, const std::string& name, const std::string& key, const std::string& help) {
  app->add_flag_function(
      name, [&o, key](std::int64_t) { o.values[key] = "true"; }, help);
}

std::string required(const PipelineConfig& cfg, const std::string& key) {
  const auto v = cfg.get(key);
  if (!v || v->empty()) throw ConfigError("missing required setting '" + key + "'");
  return *v;
}

std::string fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

struct LoadedCorpus {
  Corpus corpus;
  std::int64_t tick = kDefaultTick;
  std::optional<Manifest> manifest;
};

// The manifest tick wins over the configured tick when the sidecar exists.
LoadedCorpus load_corpus(const PipelineConfig& cfg) {
  LoadedCorpus out;
  const std::string path = required(cfg, "snapshots");
  out.corpus = load_snapshot_file(path);
  out.tick = cfg.integer_or("tick", kDefaultTick);
  const std::string mpath = manifest_path_for(path);
  if (fs::exists(mpath)) {
    out.manifest = parse_manifest(read_text_file(mpath));
    if (!cfg.get("tick")) out.tick = out.manifest->tick;
  }
  if (out.tick <= 0) throw ConfigError("tick must be positive");
  if (out.corpus.snapshots.empty()) throw EmptyCorpus("no valid snapshots in " + path);
  return out;
}

std::vector<DetectorConfig> detector_configs(const PipelineConfig& cfg, std::int64_t tick) {
  const double alpha = cfg.number_or("alpha", kDefaultAlpha);
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  std::vector<DetectorConfig> out;
  for (const auto& w : cfg.list_or("windows", {"1d", "2d", "3d", "7d"})) {
    out.push_back({window_samples_from(w, tick), alpha, tick});
  }
  if (out.empty()) throw ConfigError("no detector windows configured");
  return out;
}

std::string window_list(std::span<const DetectorConfig> configs) {
  std::string s;
  for (const auto& c : configs) s += (s.empty() ? "" : ",") + std::to_string(c.window_samples);
  return s;
}

ClientConfig client_config(const PipelineConfig& cfg) {
  ClientConfig c;
  c.base_url = cfg.text_or("base_url", c.base_url);
  c.rate_limit = cfg.number_or("rate_limit", c.rate_limit);
  c.cache_dir = cfg.text_or("cache_dir", "");
  c.fixture_dir = cfg.text_or("metadata_dir", "");
  c.live = cfg.flag_or("live", false);
  if (const char* key = std::getenv(kApiKeyEnv)) c.api_key = key;
  if (c.live && c.api_key.empty()) throw AuthError(std::string("--live needs ") + kApiKeyEnv);
  return c;
}

std::map<std::string, FetchResult> fetch_all(GiantBombClient& client, std::span<const ImpactLabel> labels,
                                             unsigned threads) {
  std::vector<FetchResult> results(labels.size());
  parallel_for(labels.size(), [&](std::size_t i) { results[i] = client.fetch_game(labels[i].game); }, threads);
  std::map<std::string, FetchResult> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i].game] = std::move(results[i]);
  return out;
}

std::vector<ImpactLabel> load_labels(const PipelineConfig& cfg) {
  return parse_labels_csv(read_text_file(required(cfg, "labels")));
}

ModelSpec model_spec(const PipelineConfig& cfg, const std::string& model) {
  const auto depth = static_cast<std::size_t>(cfg.integer_or("max_depth", 5));
  if (model == "dt") {
    TreeOptions t;
    t.max_depth = depth;
    return t;
  }
  if (model == "rf") {
    ForestOptions f;
    f.max_depth = depth;
    f.n_trees = static_cast<std::size_t>(cfg.integer_or("n_trees", 100));
    f.seed = static_cast<std::uint64_t>(cfg.integer_or("seed", 1));
    f.threads = static_cast<unsigned>(cfg.integer_or("threads", 0));
    return f;
  }
  if (model == "ocsvm") {
    OcsvmOptions o;
    o.nu = cfg.number_or("nu", 0.5);
    return o;
  }
  throw ConfigError("unknown model '" + model + "' (expected dt, rf or ocsvm)");
}

std::vector<Importance> importance_for(const ModelSpec& spec, const Dataset& full) {
  if (const auto* t = std::get_if<TreeOptions>(&spec)) return feature_importance(train_tree(full, *t));
  if (const auto* f = std::get_if<ForestOptions>(&spec)) return feature_importance(train_forest(full, *f));
  return {};
}

std::string fitted_model_json(const ModelSpec& spec, const Dataset& full) {
  if (const auto* t = std::get_if<TreeOptions>(&spec)) return tree_to_json(train_tree(full, *t));
  if (const auto* f = std::get_if<ForestOptions>(&spec)) return forest_to_json(train_forest(full, *f));
  const auto& o = std::get<OcsvmOptions>(spec);
  const Standardization stdz = Standardization::fit(full.rows);
  std::vector<std::vector<double>> positives;
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (full.labels[i] == 1) positives.push_back(full.rows[i]);
  }
  return ocsvm_to_json(train_ocsvm(positives, o, &stdz));
}

Dataset transformed_full(const Dataset& d, const FoldTransform& transform) {
  std::vector<std::size_t> all(d.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return transform(d, all);
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string out;
  std::string preset = "planted";
  std::optional<std::size_t> games, snapshots, impactful, inert;
  std::optional<double> exponent, amplitude, weekend;
  std::optional<std::string> noise;
  std::vector<std::size_t> invalid;
  std::uint64_t seed = 1;
};

int cmd_synth(const SynthArgs& a) {
  SynthConfig cfg;
  if (a.preset == "planted") {
    cfg = planted_signal_config(a.impactful.value_or(10), a.inert.value_or(10), a.seed);
  } else if (a.preset == "stationary") {
    cfg = stationary_config(a.games.value_or(100), a.snapshots.value_or(5000), a.seed);
  } else if (a.preset == "diurnal") {
    cfg.seed = a.seed;
    cfg.n_games = 1000;
    cfg.n_snapshots = 96 * 14;
    cfg.daily_amplitude = 2.0;
    cfg.weekend_uplift = 1.25;
    cfg.popularity_xmin = 20.0;
    cfg.emit_metadata = false;
  } else if (a.preset == "shifts") {
    cfg.seed = a.seed;
    cfg.n_games = a.games.value_or(50);
    cfg.n_snapshots = a.snapshots.value_or(3000);
    cfg.fixed_popularity = 50.0;
    cfg.emit_metadata = false;
    for (std::size_t g = 0; g < cfg.n_games; ++g) cfg.shifts.push_back({g, cfg.n_snapshots * 2 / 3, 4.0});
  } else {
    throw ConfigError("unknown preset '" + a.preset + "' (planted, stationary, diurnal, shifts)");
  }
  if (a.preset != "planted") {
    if (a.games) cfg.n_games = *a.games;
    if (a.snapshots) cfg.n_snapshots = *a.snapshots;
  }
  if (a.exponent) cfg.popularity_exponent = *a.exponent;
  if (a.amplitude) cfg.daily_amplitude = *a.amplitude;
  if (a.weekend) cfg.weekend_uplift = *a.weekend;
  if (a.noise) {
    if (*a.noise == "poisson") {
      cfg.noise = NoiseLaw::poisson;
    } else if (*a.noise == "none") {
      cfg.noise = NoiseLaw::none;
    } else {
      throw ConfigError("unknown noise law '" + *a.noise + "'");
    }
  }
  cfg.invalid_snapshots = a.invalid;
  const SynthCorpus corpus = generate_corpus(cfg);
  write_corpus(corpus, a.out);
  std::cout << "synth: wrote " << corpus.snapshots.size() << " snapshots of " << corpus.games.size() << " games ("
            << corpus.truth.debuts.size() << " debuts, " << corpus.truth.shifts.size() << " shifts, "
            << corpus.metadata_fixtures.size() << " metadata records) to " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------- detect

int cmd_detect(const PipelineConfig& cfg) {
  const LoadedCorpus lc = load_corpus(cfg);
  const auto configs = detector_configs(cfg, lc.tick);
  const SeriesMap series = build_series(lc.corpus.snapshots, lc.tick);
  const EventLog log = detect_corpus(series, configs, static_cast<unsigned>(cfg.integer_or("threads", 0)));
  std::ostringstream events;
  write_events(events, log.events);
  const std::string events_path = cfg.text_or("events", "events.jsonl");
  write_text_file(events_path, events.str());
  write_text_file(cfg.text_or("window_summary", "window_summary.csv"), window_summary_csv(log));
  std::cout << "detect: " << log.events.size() << " events on " << log.events_per_game.size() << " of "
            << series.size() << " games over " << lc.corpus.snapshots.size() << " snapshots (windows "
            << window_list(configs) << ", " << lc.corpus.report.rejected() << " records rejected) -> "
            << events_path << "\n";
  return 0;
}

// ---------------------------------------------------------------- stats

json stats_json(const LoadedCorpus& lc, const std::vector<ChangeEvent>* events, double xmin) {
  const auto& snaps = lc.corpus.snapshots;
  json j;
  j["snapshots"] = snaps.size();
  j["tick"] = lc.tick;
  j["t_start"] = snaps.front().ts;
  j["t_end"] = snaps.back().ts;
  const auto& rep = lc.corpus.report;
  j["load"] = {{"lines", rep.lines}, {"accepted", rep.accepted}, {"parse_errors", rep.parse_errors},
               {"invalid", rep.invalid}};

  std::vector<double> viewers;
  for (const auto& g : snaps.front().games) viewers.push_back(static_cast<double>(g.viewers));
  try {
    const PowerLawFit fit = fit_power_law(viewers, xmin);
    j["viewers_power_law"] = {{"alpha", fit.alpha}, {"xmin", fit.xmin}, {"n_tail", fit.n_tail}};
  } catch (const InsufficientTail& e) {
    j["viewers_power_law"] = {{"error", e.what()}};
  }
  const Histogram h = population_histogram(snaps.front(), HistogramAxis::viewers_per_game);
  const LogLogFit ll = loglog_fit(h, xmin);
  j["viewers_loglog"] = {{"slope", ll.slope}, {"rms_residual", ll.rms_residual}, {"points", ll.points.size()}};

  const Totals totals = totals_series(snaps);
  const std::size_t day = static_cast<std::size_t>(kDaySeconds / lc.tick);
  std::vector<double> tv(totals.viewers.begin(), totals.viewers.end());
  if (day >= 1 && tv.size() > day) {
    j["total_viewers_autocorrelation_1d"] = autocorrelation(tv, day);
  } else {
    j["total_viewers_autocorrelation_1d"] = nullptr;
  }
  try {
    j["peak_to_trough"] = peak_to_trough(daily_profile(totals.ts, totals.viewers, lc.tick));
  } catch (const DomainError&) {
    j["peak_to_trough"] = nullptr;
  }
  try {
    j["weekend_uplift"] = weekend_uplift(totals.ts, totals.viewers);
  } catch (const DomainError&) {
    j["weekend_uplift"] = nullptr;
  }

  if (events) {
    const EventsPerGame epg = events_per_game(*events);
    j["events"] = events->size();
    j["games_with_events"] = epg.counts.size();
    std::vector<double> counts;
    for (const auto& [g, c] : epg.counts) counts.push_back(static_cast<double>(c));
    try {
      const PowerLawFit fit = fit_power_law(counts, 1.0);
      const LogLogFit ell = loglog_fit(epg.histogram, 1.0, 1);
      j["events_per_game_fit"] = {{"alpha", fit.alpha},
                                  {"loglog_slope", ell.slope},
                                  {"rms_residual", ell.rms_residual},
                                  {"note", "large residuals indicate the counts are not power-law distributed"}};
    } catch (const InputError& e) {
      j["events_per_game_fit"] = {{"error", e.what()}};
    }
  }
  return j;
}

int cmd_stats(const PipelineConfig& cfg) {
  const LoadedCorpus lc = load_corpus(cfg);
  std::optional<std::vector<ChangeEvent>> events;
  if (const auto p = cfg.get("events")) events = read_event_file(*p);
  const json j = stats_json(lc, events ? &*events : nullptr, cfg.number_or("xmin", 1.0));
  const std::string out = cfg.text_or("stats_out", "stats.json");
  write_text_file(out, j.dump(2) + "\n");
  std::cout << "stats: " << lc.corpus.snapshots.size() << " snapshots, viewer power-law alpha "
            << (j["viewers_power_law"].contains("alpha") ? fmt(j["viewers_power_law"]["alpha"].get<double>(), 3)
                                                          : std::string("n/a"))
            << ", peak/trough "
            << (j["peak_to_trough"].is_number() ? fmt(j["peak_to_trough"].get<double>(), 3) : std::string("n/a")) << " -> " << out << "\n";
  return 0;
}

// ---------------------------------------------------------------- debuts

json debut_summary_json(const DebutSummary& s, std::int64_t horizon) {
  return {{"horizon_seconds", horizon},     {"debuts", s.debuts},
          {"excluded", s.excluded},         {"with_events", s.with_events},
          {"without_events", s.without_events}, {"fraction_with", s.fraction_with},
          {"fraction_without", s.fraction_without}};
}

struct DebutRun {
  Attribution attribution;
  std::int64_t horizon = kDefaultHorizon;
};

DebutRun run_debuts(const PipelineConfig& cfg, const LoadedCorpus& lc, std::span<const ChangeEvent> events) {
  DebutRun r;
  r.horizon = parse_duration_seconds(cfg.text_or("horizon", "30m"));
  if (r.horizon <= 0) throw ConfigError("horizon must be positive");
  const std::size_t first_day = window_samples_from(cfg.text_or("first_day", "1d"), lc.tick);
  const SeriesMap series = build_series(lc.corpus.snapshots, lc.tick);
  const auto debuts = find_debuts(series, first_day);
  r.attribution = attribute_events(debuts, events, r.horizon);
  return r;
}

int cmd_debuts(const PipelineConfig& cfg) {
  const LoadedCorpus lc = load_corpus(cfg);
  const auto events = read_event_file(required(cfg, "events"));
  const DebutRun r = run_debuts(cfg, lc, events);
  const std::string labels_path = cfg.text_or("labels", "labels.csv");
  write_text_file(labels_path, labels_csv(r.attribution.labels));
  write_text_file(cfg.text_or("debut_summary", "debut_summary.json"),
                  debut_summary_json(r.attribution.summary, r.horizon).dump(2) + "\n");
  const auto& s = r.attribution.summary;
  std::cout << "debuts: " << s.debuts << " labelled (" << s.with_events << " with events, " << s.without_events
            << " without), " << s.excluded << " excluded, horizon " << r.horizon << "s -> " << labels_path << "\n";
  return 0;
}

// ---------------------------------------------------------------- fetch-metadata

int cmd_fetch(const PipelineConfig& cfg) {
  const auto labels = load_labels(cfg);
  GiantBombClient client(client_config(cfg));
  const auto results = fetch_all(client, labels, static_cast<unsigned>(cfg.integer_or("threads", 0)));
  std::string report = "game,status,detail\n";
  std::map<FetchStatus, std::size_t> tally;
  for (const auto& l : labels) {
    const FetchResult& r = results.at(l.game);
    ++tally[r.status];
    report += csv::join({l.game, std::string(to_string(r.status)), r.detail}) + "\n";
  }
  const std::string out = cfg.text_or("fetch_report", "fetch_report.csv");
  write_text_file(out, report);
  std::cout << "fetch-metadata: " << tally[FetchStatus::ok] << " ok, " << tally[FetchStatus::not_found]
            << " not found, " << tally[FetchStatus::unresolvable] << " unresolvable (" << client.request_count()
            << " requests) -> " << out << "\n";
  return 0;
}

// ---------------------------------------------------------------- features

std::int64_t reference_time(const PipelineConfig& cfg) {
  if (cfg.get("reference_time")) return cfg.integer_or("reference_time", 0);
  if (const auto snaps = cfg.get("snapshots")) {
    const std::string mpath = manifest_path_for(*snaps);
    if (fs::exists(mpath)) return parse_manifest(read_text_file(mpath)).t_start;
    return load_snapshot_file(*snaps).snapshots.at(0).ts;
  }
  throw ConfigError("features needs 'reference_time' or 'snapshots' to anchor game age");
}

int cmd_features(const PipelineConfig& cfg) {
  const auto labels = load_labels(cfg);
  GiantBombClient client(client_config(cfg));
  const auto results = fetch_all(client, labels, static_cast<unsigned>(cfg.integer_or("threads", 0)));
  std::vector<GameMetadata> found;
  for (const auto& l : labels) {
    const auto& r = results.at(l.game);
    if (r.status == FetchStatus::ok && r.metadata) found.push_back(*r.metadata);
  }
  const auto cap = static_cast<std::size_t>(cfg.integer_or("vocab_cap", 0));
  const FeatureSchema schema = build_schema(found, reference_time(cfg), cap);
  const BuiltDataset built = build_dataset(labels, results, schema);
  const std::string out = cfg.text_or("dataset", "dataset.csv");
  write_text_file(out, dataset_csv(built.dataset));
  write_text_file(cfg.text_or("drop_report", "drop_report.csv"), drop_report_csv(built.dropped));
  write_text_file(cfg.text_or("schema", "schema.json"), schema_to_json(schema));
  std::cout << "features: " << built.dataset.size() << " rows x " << built.dataset.features() << " features, "
            << built.dropped.size() << " dropped -> " << out << "\n";
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainOutcome {
  CvReport report;
  std::vector<Importance> importance;
};

TrainOutcome train_once(const PipelineConfig& cfg, const std::string& model, const Dataset& data) {
  const ModelSpec spec = model_spec(cfg, model);
  const auto folds = static_cast<std::size_t>(cfg.integer_or("folds", 10));
  const auto seed = static_cast<std::uint64_t>(cfg.integer_or("seed", 1));
  const FoldTransform transform = categorical_fold_transform(static_cast<std::size_t>(cfg.integer_or("train_vocab_cap", 50)));
  TrainOutcome out;
  out.report = cross_validate(spec, data, folds, seed, transform);
  out.importance = importance_for(spec, transformed_full(data, transform));
  return out;
}

std::string metrics_text(const Metrics& m) {
  return "accuracy " + fmt(m.accuracy, 3) + " precision " + fmt(m.precision, 3) + " recall " + fmt(m.recall, 3) +
         " f1 " + fmt(m.f1, 3);
}

int cmd_train(const PipelineConfig& cfg) {
  Dataset data = parse_dataset_csv(read_text_file(required(cfg, "dataset")));
  const std::string model = cfg.text_or("model", "dt");
  std::string removed;
  if (const auto a = cfg.get("ablate")) {
    removed = *a;
    if (removed == "top") {
      const auto ranked = train_once(cfg, "dt", data).importance;
      if (ranked.empty()) throw DomainError("no informative feature to ablate");
      removed = ranked.front().name;
    }
    data = ablate(data, removed);
  }
  const TrainOutcome t = train_once(cfg, model, data);
  json j = json::parse(cv_report_to_json(t.report, t.importance));
  if (!removed.empty()) j["ablated"] = removed;
  const std::string out = cfg.text_or("report_json", "cv_report.json");
  write_text_file(out, j.dump(2) + "\n");
  if (const auto m = cfg.get("model_out")) {
    const FoldTransform transform =
        categorical_fold_transform(static_cast<std::size_t>(cfg.integer_or("train_vocab_cap", 50)));
    write_text_file(*m, fitted_model_json(model_spec(cfg, model), transformed_full(data, transform)) + "\n");
  }
  std::cout << "train: " << model << " " << t.report.folds << "-fold " << metrics_text(t.report.mean);
  if (!t.importance.empty()) std::cout << "; top feature " << t.importance.front().name;
  if (!removed.empty()) std::cout << " (without " << removed << ")";
  std::cout << " -> " << out << "\n";
  return 0;
}

// ---------------------------------------------------------------- report

std::string series_tsv(const std::string& y_label, std::span<const std::int64_t> ts,
                       std::span<const std::int64_t> values) {
  std::string s = "ts\t" + y_label + "\n";
  for (std::size_t i = 0; i < ts.size(); ++i) s += std::to_string(ts[i]) + "\t" + std::to_string(values[i]) + "\n";
  return s;
}

std::string metrics_row(const std::string& model, const Metrics& m) {
  return model + "," + fmt(m.accuracy) + "," + fmt(m.precision) + "," + fmt(m.recall) + "," + fmt(m.f1) + "\n";
}

// Writes the two windows of the first change of the most volatile game at
// window size k, or returns false when no game changed at that size.
bool window_change_figure(const SeriesMap& series, std::span<const ChangeEvent> events, const DetectorConfig& dc,
                          const fs::path& dir, const std::string& stem, json& meta) {
  std::map<std::string, std::size_t> counts;
  for (const auto& e : events) {
    if (e.window_samples == dc.window_samples) ++counts[e.game];
  }
  if (counts.empty()) return false;
  const auto best = std::max_element(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
    return a.second < b.second || (a.second == b.second && a.first > b.first);
  });
  const GameSeries& gs = series.at(best->first);
  std::optional<std::pair<std::size_t, std::size_t>> windows;
  detect_changes(gs, dc, [&](const WindowTest& t) {
    if (!windows && t.result.significant) windows = std::make_pair(t.w1_begin, t.w2_begin);
  });
  if (!windows) return false;
  const auto k = static_cast<std::ptrdiff_t>(dc.window_samples);
  const auto begin = gs.viewers.begin();
  std::vector<std::int64_t> w1(begin + static_cast<std::ptrdiff_t>(windows->first),
                               begin + static_cast<std::ptrdiff_t>(windows->first) + k);
  std::vector<std::int64_t> w2(begin + static_cast<std::ptrdiff_t>(windows->second),
                               begin + static_cast<std::ptrdiff_t>(windows->second) + k);
  write_text_file((dir / (stem + "_w1.tsv")).string(), to_tsv(count_histogram(w1, "viewers", "samples")));
  write_text_file((dir / (stem + "_w2.tsv")).string(), to_tsv(count_histogram(w2, "viewers", "samples")));
  meta[stem] = {{"game", best->first},
                {"window_samples", dc.window_samples},
                {"w1_start", gs.ts(windows->first)},
                {"w2_start", gs.ts(windows->second)}};
  return true;
}

int cmd_report(const PipelineConfig& cfg) {
  const LoadedCorpus lc = load_corpus(cfg);
  const auto events = read_event_file(required(cfg, "events"));
  const fs::path dir(cfg.text_or("report_dir", "report"));
  fs::create_directories(dir);
  std::size_t files = 0;
  auto put = [&](const std::string& name, const std::string& content) {
    write_text_file((dir / name).string(), content);
    ++files;
  };
  json meta;

  const Snapshot& first = lc.corpus.snapshots.front();
  meta["reference_snapshot_ts"] = first.ts;
  put("fig2_viewers_per_game.tsv", to_tsv(population_histogram(first, HistogramAxis::viewers_per_game)));
  put("fig3_streamers_per_game.tsv", to_tsv(population_histogram(first, HistogramAxis::streamers_per_game)));
  try {
    put("fig4_viewers_per_stream.tsv", to_tsv(population_histogram(first, HistogramAxis::viewers_per_stream)));
  } catch (const MissingStreamDetail&) {
    meta["fig4"] = "skipped: snapshots carry no per-stream viewer counts";
  }
  const Totals totals = totals_series(lc.corpus.snapshots);
  put("fig5_total_viewers.tsv", series_tsv("viewers", totals.ts, totals.viewers));
  put("fig6_total_streamers.tsv", series_tsv("streamers", totals.ts, totals.streamers));

  const SeriesMap series = build_series(lc.corpus.snapshots, lc.tick);
  const double alpha = cfg.number_or("alpha", kDefaultAlpha);
  const std::int64_t day = kDaySeconds / lc.tick;
  const std::pair<std::int64_t, const char*> figs[] = {{day, "fig7_change_1d"}, {7 * day, "fig8_change_7d"}};
  for (const auto& [k, stem] : figs) {
    if (k <= 0) continue;
    if (window_change_figure(series, events, {static_cast<std::size_t>(k), alpha, lc.tick}, dir, stem, meta)) {
      files += 2;
    } else {
      meta[stem] = "skipped: no change event at this window size";
    }
  }
  const EventsPerGame epg = events_per_game(events, static_cast<std::size_t>(cfg.integer_or("top_k", 10)));
  put("fig9_events_per_game.tsv", to_tsv(epg.histogram));

  std::map<std::size_t, std::size_t> per_window;
  for (const auto& c : detector_configs(cfg, lc.tick)) per_window[c.window_samples] = 0;
  for (const auto& e : events) ++per_window[e.window_samples];
  std::string t1 = "window_samples,events\n";
  for (const auto& [w, n] : per_window) t1 += std::to_string(w) + "," + std::to_string(n) + "\n";
  put("table1_events_per_window.csv", t1);
  std::string t2 = "rank,game,events\n";
  for (std::size_t i = 0; i < epg.top.size(); ++i) {
    t2 += std::to_string(i + 1) + "," + csv::escape(epg.top[i].first) + "," + std::to_string(epg.top[i].second) + "\n";
  }
  put("table2_top_games.csv", t2);

  const DebutRun dr = run_debuts(cfg, lc, events);
  const auto& s = dr.attribution.summary;
  put("table3_debuts.csv", "debuts,count,fraction\nwith_events," + std::to_string(s.with_events) + "," +
                               fmt(s.fraction_with) + "\nwithout_events," + std::to_string(s.without_events) + "," +
                               fmt(s.fraction_without) + "\n");
  meta["table3"] = debut_summary_json(s, dr.horizon);
  meta["stats"] = stats_json(lc, &events, cfg.number_or("xmin", 1.0));

  if (const auto dpath = cfg.get("dataset")) {
    const Dataset data = parse_dataset_csv(read_text_file(*dpath));
    std::string t4 = "model,accuracy,precision,recall,f1\n";
    json classifiers = json::object();
    for (const char* m : {"dt", "rf", "ocsvm"}) {
      const TrainOutcome t = train_once(cfg, m, data);
      t4 += metrics_row(m, t.report.mean);
      classifiers[m] = json::parse(cv_report_to_json(t.report, t.importance));
    }
    put("table4_classifiers.csv", t4);
    put("table4_classifiers.json", classifiers.dump(2) + "\n");

    const auto ranked = train_once(cfg, "dt", data).importance;
    if (!ranked.empty()) {
      const Dataset reduced = ablate(data, ranked.front().name);
      std::string t6 = "model,accuracy,precision,recall,f1\n";
      json ablation{{"removed", ranked.front().name}};
      for (const char* m : {"dt", "rf"}) {
        const TrainOutcome t = train_once(cfg, m, reduced);
        t6 += metrics_row(m, t.report.mean);
        ablation[m] = json::parse(cv_report_to_json(t.report, t.importance));
      }
      put("table6_ablation.csv", t6);
      put("table6_ablation.json", ablation.dump(2) + "\n");
    } else {
      meta["table6"] = "skipped: the tree found no informative feature";
    }
  }
  put("report.json", meta.dump(2) + "\n");
  std::cout << "report: wrote " << files << " files to " << dir.string() << "\n";
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Viewership change detection and debut impact analysis"};
  app.require_subcommand(1, 1);
  Overrides o;
  app.add_option("--config", o.config_path, "key = value settings file; flags override it");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with ground truth");
  SynthArgs sa;
  synth->add_option("--out", sa.out, "Output directory")->required();
  synth->add_option("--preset", sa.preset, "planted, stationary, diurnal or shifts")->capture_default_str();
  synth->add_option("--seed", sa.seed, "Random seed")->capture_default_str();
  synth->add_option("--games", sa.games, "Number of games");
  synth->add_option("--snapshots", sa.snapshots, "Number of snapshots");
  synth->add_option("--impactful", sa.impactful, "Impactful debuts (planted preset)");
  synth->add_option("--inert", sa.inert, "Inert debuts (planted preset)");
  synth->add_option("--exponent", sa.exponent, "Popularity power-law exponent");
  synth->add_option("--amplitude", sa.amplitude, "Daily peak/trough ratio");
  synth->add_option("--weekend", sa.weekend, "Weekend uplift factor");
  synth->add_option("--noise", sa.noise, "poisson or none");
  synth->add_option("--invalid", sa.invalid, "Snapshot indices to emit invalid")->delimiter(',');

  auto* detect = app.add_subcommand("detect", "Run two-window KS change detection");
  option(detect, o, "--snapshots", "snapshots", "Snapshot JSONL");
  option(detect, o, "--windows", "windows", "Window sizes, e.g. 1d,2d,3d,7d");
  option(detect, o, "--alpha", "alpha", "Significance level");
  option(detect, o, "--tick", "tick", "Snapshot cadence in seconds");
  option(detect, o, "--threads", "threads", "Worker threads (0 = all cores)");
  option(detect, o, "--events", "events", "Event log output");
  option(detect, o, "--summary", "window_summary", "Per-window summary CSV output");

  auto* stats = app.add_subcommand("stats", "Distribution and cycle diagnostics");
  option(stats, o, "--snapshots", "snapshots", "Snapshot JSONL");
  option(stats, o, "--events", "events", "Event log (optional)");
  option(stats, o, "--tick", "tick", "Snapshot cadence in seconds");
  option(stats, o, "--xmin", "xmin", "Power-law lower cutoff");
  option(stats, o, "--out", "stats_out", "Stats JSON output");

  auto* debuts = app.add_subcommand("debuts", "Find debuts and attribute change events");
  option(debuts, o, "--snapshots", "snapshots", "Snapshot JSONL");
  option(debuts, o, "--events", "events", "Event log");
  option(debuts, o, "--tick", "tick", "Snapshot cadence in seconds");
  option(debuts, o, "--horizon", "horizon", "Attribution horizon, e.g. 30m");
  option(debuts, o, "--first-day", "first_day", "Leading span whose debuts are excluded");
  option(debuts, o, "--labels", "labels", "Labels CSV output");
  option(debuts, o, "--summary", "debut_summary", "Summary JSON output");

  auto* fetch = app.add_subcommand("fetch-metadata", "Resolve labelled games against the metadata service");
  for (auto* sub : {fetch, app.add_subcommand("features", "Encode metadata features into a dataset")}) {
    option(sub, o, "--labels", "labels", "Labels CSV");
    option(sub, o, "--metadata-dir", "metadata_dir", "Fixture store directory");
    option(sub, o, "--cache-dir", "cache_dir", "Response cache directory");
    option(sub, o, "--base-url", "base_url", "API base URL");
    option(sub, o, "--rate-limit", "rate_limit", "Requests per second");
    option(sub, o, "--threads", "threads", "Concurrent lookups");
    flag(sub, o, "--live", "live", std::string("Allow network requests (key from ") + kApiKeyEnv + ")");
  }
  option(fetch, o, "--out", "fetch_report", "Per-game status CSV output");
  auto* features = app.get_subcommand("features");
  option(features, o, "--snapshots", "snapshots", "Snapshot JSONL (anchors game age)");
  option(features, o, "--reference-time", "reference_time", "Epoch seconds anchoring game age");
  option(features, o, "--vocab-cap", "vocab_cap", "Values kept per categorical field (0 = all)");
  option(features, o, "--dataset", "dataset", "Dataset CSV output");
  option(features, o, "--drop-report", "drop_report", "Dropped games CSV output");
  option(features, o, "--schema", "schema", "Feature schema JSON output");

  auto* train = app.add_subcommand("train", "Cross-validate a classifier");
  option(train, o, "--dataset", "dataset", "Dataset CSV");
  option(train, o, "--model", "model", "dt, rf or ocsvm");
  option(train, o, "--folds", "folds", "Cross-validation folds");
  option(train, o, "--seed", "seed", "Random seed");
  option(train, o, "--max-depth", "max_depth", "Tree depth cap");
  option(train, o, "--trees", "n_trees", "Forest size");
  option(train, o, "--nu", "nu", "One-class SVM nu");
  option(train, o, "--threads", "threads", "Forest worker threads");
  option(train, o, "--vocab-cap", "train_vocab_cap", "Per-fold categorical vocabulary cap");
  option(train, o, "--ablate", "ablate", "Feature to remove first ('top' = most important)");
  option(train, o, "--report", "report_json", "CV report JSON output");
  option(train, o, "--model-out", "model_out", "Model fitted on every row, JSON output");

  auto* report = app.add_subcommand("report", "Write figure and table analogues");
  option(report, o, "--snapshots", "snapshots", "Snapshot JSONL");
  option(report, o, "--events", "events", "Event log");
  option(report, o, "--dataset", "dataset", "Dataset CSV (optional, enables classifier tables)");
  option(report, o, "--tick", "tick", "Snapshot cadence in seconds");
  option(report, o, "--windows", "windows", "Window sizes listed in the per-window table");
  option(report, o, "--alpha", "alpha", "Significance level");
  option(report, o, "--horizon", "horizon", "Attribution horizon");
  option(report, o, "--folds", "folds", "Cross-validation folds");
  option(report, o, "--seed", "seed", "Random seed");
  option(report, o, "--trees", "n_trees", "Forest size");
  option(report, o, "--threads", "threads", "Worker threads");
  option(report, o, "--out-dir", "report_dir", "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(sa);
    const PipelineConfig cfg = o.resolve();
    if (detect->parsed()) return cmd_detect(cfg);
    if (stats->parsed()) return cmd_stats(cfg);
    if (debuts->parsed()) return cmd_debuts(cfg);
    if (fetch->parsed()) return cmd_fetch(cfg);
    if (features->parsed()) return cmd_features(cfg);
    if (train->parsed()) return cmd_train(cfg);
    if (report->parsed()) return cmd_report(cfg);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}

}  // namespace viewshift::cli
