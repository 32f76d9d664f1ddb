#include "viewshift/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <set>

#include "viewshift/errors.hpp"
#include "viewshift/giantbomb_client.hpp"
#include "viewshift/random.hpp"

namespace viewshift {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::int64_t kDaySeconds = 86400;

// Multiplication method below 10, PTRS transformed rejection above.
std::int64_t poisson(Rng& rng, double lam) {
  if (lam <= 0.0) return 0;
  if (lam < 10.0) {
    const double limit = std::exp(-lam);
    double prod = uniform_unit(rng);
    std::int64_t k = 0;
    while (prod > limit) {
      ++k;
      prod *= uniform_unit(rng);
    }
    return k;
  }
  const double slam = std::sqrt(lam);
  const double loglam = std::log(lam);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform_unit(rng) - 0.5;
    const double v = uniform_unit(rng);
    const double us = 0.5 - std::abs(u);
    const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + lam + 0.43));
    if (us >= 0.07 && v <= vr) return k;
    if (k < 0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -lam + static_cast<double>(k) * loglam - std::lgamma(static_cast<double>(k) + 1.0)) {
      return k;
    }
  }
}

// Geometric diurnal factor with peak / trough = amplitude, peaking at 20:00 UTC.
double diurnal(std::int64_t ts, double amplitude) {
  if (amplitude == 1.0) return 1.0;
  const auto sec = static_cast<double>(((ts % kDaySeconds) + kDaySeconds) % kDaySeconds);
  const double phase = 2.0 * std::numbers::pi * (sec / kDaySeconds) - 2.0 * std::numbers::pi * 14.0 / 24.0;
  return std::exp(0.5 * std::log(amplitude) * std::sin(phase));
}

bool is_weekend(std::int64_t ts) {
  const std::int64_t days = ts >= 0 ? ts / kDaySeconds : (ts - kDaySeconds + 1) / kDaySeconds;
  const std::int64_t dow = ((days + 4) % 7 + 7) % 7;  // 0 = Sunday
  return dow == 0 || dow == 6;
}

// Splits `total` over `n` streams with Zipf-like weights, largest remainder.
std::vector<std::int64_t> split_streams(std::int64_t total, std::int64_t n) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(n), 0);
  if (n <= 0) return out;
  std::vector<double> w(out.size());
  double sum = 0.0;
  for (std::size_t r = 0; r < w.size(); ++r) sum += (w[r] = 1.0 / static_cast<double>(r + 1));
  std::int64_t assigned = 0;
  std::vector<std::pair<double, std::size_t>> rem(out.size());
  for (std::size_t r = 0; r < w.size(); ++r) {
    const double exact = static_cast<double>(total) * w[r] / sum;
    out[r] = static_cast<std::int64_t>(std::floor(exact));
    assigned += out[r];
    rem[r] = {exact - static_cast<double>(out[r]), r};
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t i = 0; assigned < total; i = (i + 1) % rem.size(), ++assigned) ++out[rem[i].second];
  return out;
}

std::string date_string(std::int64_t epoch_days) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{days{epoch_days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u 00:00:00", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

std::string filler_text(std::size_t length, Rng& rng) {
  static const char* const words[] = {"the",    "game",  "players", "explore", "world", "story",  "battle",
                                      "levels", "quest", "hero",    "online",  "mode",  "craft",  "city",
                                      "build",  "race",  "secret",  "ancient", "squad", "island", "arena"};
  std::string out;
  while (out.size() < length) {
    if (!out.empty()) out += ' ';
    out += words[uniform_index(rng, std::size(words))];
  }
  out.resize(length);
  return out;
}

json name_objects(const std::string& prefix, std::int64_t n) {
  json arr = json::array();
  for (std::int64_t i = 0; i < n; ++i) arr.push_back({{"name", prefix + " " + std::to_string(i + 1)}});
  return arr;
}

json pick_names(Rng& rng, const std::string& prefix, std::size_t pool, std::int64_t lo, std::int64_t hi) {
  std::set<std::size_t> chosen;
  const auto n = static_cast<std::size_t>(uniform_int(rng, lo, hi));
  while (chosen.size() < std::min(n, pool)) chosen.insert(static_cast<std::size_t>(uniform_index(rng, pool)));
  json arr = json::array();
  for (std::size_t c : chosen) arr.push_back({{"name", prefix + " " + std::to_string(c + 1)}});
  return arr;
}

json game_detail(const std::string& name, const std::string& guid, bool impactful, const SynthConfig& cfg,
                 Rng& rng) {
  const auto& sig = cfg.signal;
  const bool swapped = uniform_unit(rng) < sig.swap_probability;
  const bool long_text = impactful != swapped;
  const std::size_t desc_len =
      long_text ? static_cast<std::size_t>(uniform_int(rng, static_cast<std::int64_t>(sig.impactful_description_min),
                                                       static_cast<std::int64_t>(sig.impactful_description_max)))
                : static_cast<std::size_t>(uniform_int(rng, static_cast<std::int64_t>(sig.inert_description_min),
                                                       static_cast<std::int64_t>(sig.inert_description_max)));
  const std::int64_t reviews = impactful ? uniform_int(rng, sig.impactful_reviews_min, sig.impactful_reviews_max)
                                         : uniform_int(rng, sig.inert_reviews_min, sig.inert_reviews_max);

  json r;
  r["name"] = name;
  r["guid"] = guid;
  std::string aliases;
  for (std::int64_t i = 0, n = uniform_int(rng, 0, 2); i < n; ++i) {
    if (!aliases.empty()) aliases += '\n';
    aliases += name + " edition " + std::to_string(i + 1);
  }
  r["aliases"] = aliases.empty() ? json(nullptr) : json(aliases);
  r["deck"] = filler_text(static_cast<std::size_t>(uniform_int(rng, 40, 200)), rng);
  r["description"] = filler_text(desc_len, rng);
  r["platforms"] = pick_names(rng, "platform", 8, 1, 4);
  r["publishers"] = pick_names(rng, "publisher", 15, 1, 1);
  r["developers"] = pick_names(rng, "developer", 20, 1, 2);
  r["franchises"] = pick_names(rng, "franchise", 10, 0, 1);
  r["genres"] = pick_names(rng, "genre", 8, 1, 2);
  r["themes"] = pick_names(rng, "theme", 8, 0, 3);
  if (uniform_unit(rng) < 0.8) {
    static const char* const ratings[] = {"ESRB: E", "ESRB: T", "ESRB: M", "PEGI: 12"};
    r["original_game_rating"] = json::array({{{"name", ratings[uniform_index(rng, std::size(ratings))]}}});
  } else {
    r["original_game_rating"] = nullptr;
  }
  for (const char* f : {"characters", "concepts", "locations", "objects", "people", "videos", "images",
                        "killed_characters", "first_appearance_characters", "first_appearance_objects",
                        "first_appearance_locations", "first_appearance_concepts", "first_appearance_people",
                        "similar_games", "releases"}) {
    r[f] = name_objects(f, uniform_int(rng, 0, 12));
  }
  r["user_reviews"] = name_objects("user review", reviews);
  r["reviews"] = name_objects("review", uniform_int(rng, 0, 3));
  r["image"] = uniform_unit(rng) < 0.85 ? json{{"original_url", "https://example.invalid/" + guid + ".png"}}
                                        : json(nullptr);

  const std::int64_t start_day = cfg.start_ts / kDaySeconds;
  const std::int64_t added = start_day - uniform_int(rng, 30, 2500);
  r["date_added"] = date_string(added);
  r["date_last_updated"] = date_string(added + uniform_int(rng, 0, 400));
  if (uniform_unit(rng) < 0.9) {
    r["original_release_date"] = date_string(added + uniform_int(rng, -200, 200));
  } else {
    r["original_release_date"] = nullptr;
  }
  if (uniform_unit(rng) < 0.2) {
    const std::int64_t expected = added + uniform_int(rng, -100, 300);
    using namespace std::chrono;
    const year_month_day ymd{sys_days{days{expected}}};
    r["expected_release_year"] = static_cast<int>(ymd.year());
    r["expected_release_month"] = static_cast<unsigned>(ymd.month());
    r["expected_release_day"] = static_cast<unsigned>(ymd.day());
  }
  return r;
}

json search_hit(const std::string& name, const std::string& guid, const json& aliases) {
  return json{{"name", name}, {"guid", guid}, {"aliases", aliases}};
}

void validate(const SynthConfig& cfg) {
  if (cfg.n_games == 0) throw ConfigError("n_games must be positive");
  if (cfg.n_snapshots == 0) throw ConfigError("n_snapshots must be positive");
  if (cfg.tick <= 0) throw ConfigError("tick must be positive");
  if (cfg.start_ts <= 0) throw ConfigError("start_ts must be positive");
  if (!cfg.fixed_popularity && !(cfg.popularity_exponent > 1.0)) throw ConfigError("exponent must exceed 1");
  if (!(cfg.popularity_xmin > 0.0)) throw ConfigError("popularity_xmin must be positive");
  if (cfg.fixed_popularity && !(*cfg.fixed_popularity > 0.0)) throw ConfigError("fixed popularity must be positive");
  if (!(cfg.daily_amplitude >= 1.0)) throw ConfigError("daily amplitude is a peak/trough ratio >= 1");
  if (!(cfg.weekend_uplift > 0.0)) throw ConfigError("weekend uplift must be positive");
  if (!(cfg.viewers_per_streamer > 0.0)) throw ConfigError("viewers_per_streamer must be positive");
  if (!(cfg.impact_multiplier > 0.0)) throw ConfigError("impact multiplier must be positive");
  if (cfg.min_coupled == 0 || cfg.min_coupled > cfg.max_coupled) throw ConfigError("bad coupled-shift range");
  for (const auto& s : cfg.shifts) {
    if (s.game >= cfg.n_games) throw ConfigError("shift game out of range");
    if (s.index >= cfg.n_snapshots) throw ConfigError("shift index out of range");
    if (!(s.multiplier > 0.0)) throw ConfigError("shift multiplier must be positive");
  }
  std::set<std::size_t> debuting;
  for (const auto& d : cfg.debuts) {
    if (d.game >= cfg.n_games) throw ConfigError("debut game out of range");
    if (d.index >= cfg.n_snapshots) throw ConfigError("debut index out of range");
    if (!debuting.insert(d.game).second) throw ConfigError("game scheduled to debut twice");
    if (d.impactful && d.index < cfg.impact_lead) throw ConfigError("impactful debut earlier than the impact lead");
  }
  if (debuting.size() == cfg.n_games && std::any_of(cfg.debuts.begin(), cfg.debuts.end(),
                                                     [](const PlannedDebut& d) { return d.impactful; })) {
    throw ConfigError("impactful debuts need established games to shift");
  }
  for (std::size_t i : cfg.invalid_snapshots) {
    if (i >= cfg.n_snapshots) throw ConfigError("invalid snapshot index out of range");
  }
  for (const auto* list : {&cfg.no_metadata_games, &cfg.ambiguous_games}) {
    for (std::size_t g : *list) {
      if (g >= cfg.n_games) throw ConfigError("metadata game out of range");
    }
  }
}

}  // namespace

std::string synth_game_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "game-%04zu", i);
  return buf;
}

SynthCorpus generate_corpus(const SynthConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  SynthCorpus out;
  out.games.reserve(cfg.n_games);
  for (std::size_t g = 0; g < cfg.n_games; ++g) out.games.push_back(synth_game_name(g));

  std::vector<double> base(cfg.n_games);
  for (auto& b : base) {
    if (cfg.fixed_popularity) {
      b = *cfg.fixed_popularity;
    } else {
      b = cfg.popularity_xmin * std::pow(1.0 - uniform_unit(rng), -1.0 / (cfg.popularity_exponent - 1.0));
    }
  }

  std::vector<std::size_t> debut_at(cfg.n_games, 0);
  for (const auto& d : cfg.debuts) debut_at[d.game] = d.index;

  // Shift schedule: explicit shifts plus those coupled to impactful debuts.
  std::vector<PlannedShift> shifts = cfg.shifts;
  for (const auto& s : cfg.shifts) {
    out.truth.shifts.push_back({out.games[s.game], s.index, 0, s.multiplier, {}});
  }
  std::vector<std::size_t> targets;
  for (std::size_t g = 0; g < cfg.n_games; ++g) {
    if (std::none_of(cfg.debuts.begin(), cfg.debuts.end(), [g](const PlannedDebut& d) { return d.game == g; })) {
      targets.push_back(g);
    }
  }
  std::vector<PlannedDebut> debuts = cfg.debuts;
  std::stable_sort(debuts.begin(), debuts.end(),
                   [](const PlannedDebut& a, const PlannedDebut& b) { return a.index < b.index; });
  std::vector<double> coupled_level(cfg.n_games, 1.0);
  std::size_t next_target = 0;
  for (const auto& d : debuts) {
    GroundTruth::Debut rec{out.games[d.game], d.index, 0, d.impactful, {}};
    if (d.impactful) {
      const std::size_t span = cfg.max_coupled - cfg.min_coupled + 1;
      const std::size_t count =
          std::min(targets.size(), cfg.min_coupled + static_cast<std::size_t>(uniform_index(rng, span)));
      for (std::size_t c = 0; c < count; ++c) {
        const std::size_t g = targets[next_target++ % targets.size()];
        const double m = coupled_level[g] > 1.0 ? 1.0 / cfg.impact_multiplier : cfg.impact_multiplier;
        coupled_level[g] *= m;
        const std::size_t at = d.index - cfg.impact_lead;
        shifts.push_back({g, at, m});
        out.truth.shifts.push_back({out.games[g], at, 0, m, rec.game});
        rec.coupled_games.push_back(out.games[g]);
      }
    }
    out.truth.debuts.push_back(std::move(rec));
  }
  std::stable_sort(shifts.begin(), shifts.end(),
                   [](const PlannedShift& a, const PlannedShift& b) { return a.index < b.index; });

  const std::set<std::size_t> invalid(cfg.invalid_snapshots.begin(), cfg.invalid_snapshots.end());
  std::vector<double> level(cfg.n_games, 1.0);
  std::size_t next_shift = 0;
  out.snapshots.reserve(cfg.n_snapshots);
  Manifest manifest;
  manifest.tick = cfg.tick;
  for (std::size_t i = 0; i < cfg.n_snapshots; ++i) {
    while (next_shift < shifts.size() && shifts[next_shift].index <= i) {
      level[shifts[next_shift].game] *= shifts[next_shift].multiplier;
      ++next_shift;
    }
    Snapshot s;
    s.ts = cfg.start_ts + static_cast<std::int64_t>(i) * cfg.tick;
    const double cycle = diurnal(s.ts, cfg.daily_amplitude) * (is_weekend(s.ts) ? cfg.weekend_uplift : 1.0);
    for (std::size_t g = 0; g < cfg.n_games; ++g) {
      if (i < debut_at[g]) continue;
      const double mean = base[g] * cycle * level[g];
      GameObservation o;
      o.name = out.games[g];
      if (cfg.noise == NoiseLaw::poisson) {
        o.viewers = poisson(rng, mean);
        o.streamers = 1 + poisson(rng, mean / cfg.viewers_per_streamer);
      } else {
        o.viewers = std::llround(mean);
        o.streamers = std::max<std::int64_t>(1, std::llround(mean / cfg.viewers_per_streamer));
      }
      if (cfg.stream_detail) o.stream_viewers = split_streams(o.viewers, o.streamers);
      s.games.push_back(std::move(o));
    }
    if (invalid.count(i)) {
      // A duplicated entry makes the snapshot structurally invalid.
      if (s.games.empty()) s.games.push_back({out.games[0], 1, 0, std::nullopt});
      s.games.push_back(s.games.front());
    } else {
      if (manifest.snapshots == 0) manifest.t_start = s.ts;
      manifest.t_end = s.ts;
      ++manifest.snapshots;
    }
    out.snapshots.push_back(std::move(s));
  }
  out.manifest = manifest;

  auto ts_of = [&](std::size_t index) { return cfg.start_ts + static_cast<std::int64_t>(index) * cfg.tick; };
  for (auto& s : out.truth.shifts) s.ts = ts_of(s.index);
  for (auto& d : out.truth.debuts) d.ts = ts_of(d.index);
  out.truth.invalid_snapshots.assign(invalid.begin(), invalid.end());

  if (cfg.emit_metadata && !cfg.debuts.empty()) {
    const auto& sig = cfg.signal;
    char desc[256];
    std::snprintf(desc, sizeof desc,
                  "description length U[%zu,%zu] for impactful debuts and U[%zu,%zu] for inert ones, "
                  "swapped with probability %.2f; user reviews U[%lld,%lld] vs U[%lld,%lld]",
                  sig.impactful_description_min, sig.impactful_description_max, sig.inert_description_min,
                  sig.inert_description_max, sig.swap_probability, static_cast<long long>(sig.impactful_reviews_min),
                  static_cast<long long>(sig.impactful_reviews_max), static_cast<long long>(sig.inert_reviews_min),
                  static_cast<long long>(sig.inert_reviews_max));
    out.truth.metadata_signal = desc;

    Rng meta_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    const std::set<std::size_t> skip(cfg.no_metadata_games.begin(), cfg.no_metadata_games.end());
    const std::set<std::size_t> ambiguous(cfg.ambiguous_games.begin(), cfg.ambiguous_games.end());
    std::vector<PlannedDebut> by_game = cfg.debuts;
    std::sort(by_game.begin(), by_game.end(),
              [](const PlannedDebut& a, const PlannedDebut& b) { return a.game < b.game; });
    for (const auto& d : by_game) {
      if (skip.count(d.game)) continue;
      const std::string& name = out.games[d.game];
      const std::string guid = "3030-" + std::to_string(10000 + d.game);
      json detail = game_detail(name, guid, d.impactful, cfg, meta_rng);
      json record{{"query", name}, {"details", json::object()}};
      json hits = json::array({search_hit(name, guid, detail["aliases"])});
      record["details"][guid] = json{{"status_code", 1}, {"error", "OK"}, {"results", detail}};
      if (ambiguous.count(d.game)) {
        const std::string twin = "3030-" + std::to_string(90000 + d.game);
        hits.push_back(search_hit(name, twin, nullptr));
      }
      record["search"] = json{{"status_code", 1}, {"error", "OK"}, {"results", hits}};
      out.metadata_fixtures[normalize_name(name)] = std::move(record);
    }
  }
  return out;
}

std::string ground_truth_json(const GroundTruth& truth) {
  json j;
  j["shifts"] = json::array();
  for (const auto& s : truth.shifts) {
    json e{{"game", s.game}, {"index", s.index}, {"ts", s.ts}, {"multiplier", s.multiplier}};
    if (!s.coupled_to.empty()) e["coupled_to"] = s.coupled_to;
    j["shifts"].push_back(std::move(e));
  }
  j["debuts"] = json::array();
  for (const auto& d : truth.debuts) {
    j["debuts"].push_back(
        {{"game", d.game}, {"index", d.index}, {"ts", d.ts}, {"impactful", d.impactful}, {"coupled_games", d.coupled_games}});
  }
  j["invalid_snapshots"] = truth.invalid_snapshots;
  j["metadata_signal"] = truth.metadata_signal;
  return j.dump(2) + "\n";
}

void write_corpus(const SynthCorpus& corpus, const std::string& dir) {
  std::string lines;
  for (const auto& s : corpus.snapshots) {
    lines += to_json_line(s);
    lines += '\n';
  }
  const fs::path root(dir);
  write_text_file((root / "snapshots.jsonl").string(), lines);
  write_text_file((root / "snapshots.manifest").string(), format_manifest(corpus.manifest));
  write_text_file((root / "ground_truth.json").string(), ground_truth_json(corpus.truth));
  for (const auto& [key, record] : corpus.metadata_fixtures) {
    write_text_file((root / "metadata" / (key + ".json")).string(), record.dump(2) + "\n");
  }
}

SynthConfig planted_signal_config(std::size_t n_impactful, std::size_t n_inert, std::uint64_t seed) {
  constexpr std::size_t kBackground = 40;
  constexpr std::size_t kFirstDebut = 1400;  // past the fill of two 7-day windows
  // Spacing chosen so no follow-up event of one debut lands in another's horizon.
  constexpr std::size_t kSpacing = 64;
  constexpr std::size_t kExtras = 3;  // two without metadata, one ambiguous

  SynthConfig cfg;
  cfg.seed = seed;
  cfg.noise = NoiseLaw::none;
  cfg.daily_amplitude = 2.0;
  cfg.weekend_uplift = 1.0;
  cfg.stream_detail = false;
  const std::size_t n_debuts = n_impactful + n_inert + kExtras;
  cfg.n_games = kBackground + n_debuts;
  cfg.n_snapshots = kFirstDebut + n_debuts * kSpacing + 800;

  std::vector<int> kinds;  // 1 impactful, 0 inert, -1 no metadata, -2 ambiguous
  kinds.insert(kinds.end(), n_impactful, 1);
  kinds.insert(kinds.end(), n_inert, 0);
  kinds.insert(kinds.end(), {-1, -1, -2});
  Rng rng(seed + 0x51ed);
  shuffle(std::span<int>(kinds), rng);
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const std::size_t game = kBackground + i;
    cfg.debuts.push_back({game, kFirstDebut + i * kSpacing, kinds[i] == 1});
    if (kinds[i] == -1) cfg.no_metadata_games.push_back(game);
    if (kinds[i] == -2) cfg.ambiguous_games.push_back(game);
  }
  return cfg;
}

SynthConfig stationary_config(std::size_t n_games, std::size_t n_snapshots, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.n_games = n_games;
  cfg.n_snapshots = n_snapshots;
  cfg.seed = seed;
  cfg.daily_amplitude = 1.0;
  cfg.weekend_uplift = 1.0;
  cfg.emit_metadata = false;
  return cfg;
}

}  // namespace viewshift
