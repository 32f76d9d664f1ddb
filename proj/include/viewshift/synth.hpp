#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "viewshift/snapshot.hpp"

namespace viewshift {

enum class NoiseLaw { poisson, none };

struct PlannedShift {
  std::size_t game = 0;
  std::size_t index = 0;  // first snapshot carrying the new mean
  double multiplier = 1.0;
};

struct PlannedDebut {
  std::size_t game = 0;
  std::size_t index = 0;
  bool impactful = false;
};

/// Description and user-review distributions of the metadata fixtures. The
/// description length separates impactful from inert debuts except for a
/// `swap_probability` fraction; user reviews carry a weaker, overlapping signal.
struct MetadataSignal {
  std::size_t impactful_description_min = 1500;
  std::size_t impactful_description_max = 3000;
  std::size_t inert_description_min = 200;
  std::size_t inert_description_max = 1200;
  double swap_probability = 0.1;
  std::int64_t impactful_reviews_min = 4;
  std::int64_t impactful_reviews_max = 13;
  std::int64_t inert_reviews_min = 0;
  std::int64_t inert_reviews_max = 9;
};

struct SynthConfig {
  std::size_t n_games = 100;
  std::size_t n_snapshots = 2000;
  std::int64_t tick = kDefaultTick;
  std::int64_t start_ts = 1460181600;  // 2016-04-09 06:00 UTC

  double popularity_exponent = 2.5;       // density exponent of base popularity
  double popularity_xmin = 10.0;          // smallest base mean
  std::optional<double> fixed_popularity; // every game gets this base mean instead
  double daily_amplitude = 1.0;           // peak / trough of the diurnal factor
  double weekend_uplift = 1.0;            // factor on Saturdays and Sundays (UTC)
  double viewers_per_streamer = 25.0;
  bool stream_detail = true;              // emit stream_viewers
  NoiseLaw noise = NoiseLaw::poisson;

  std::vector<PlannedShift> shifts;
  std::vector<PlannedDebut> debuts;  // other games are live from the first snapshot
  // Impactful debuts shift 1-3 established games `impact_lead` snapshots
  // before the debut; with a clean step this is the lag after which the
  // 1-day KS window fires, so the change event lands right after the debut.
  std::size_t impact_lead = 17;
  double impact_multiplier = 4.0;
  std::size_t min_coupled = 1;
  std::size_t max_coupled = 3;

  std::vector<std::size_t> invalid_snapshots;  // emitted structurally invalid
  bool emit_metadata = true;                   // fixtures for debuting games
  std::vector<std::size_t> no_metadata_games;
  std::vector<std::size_t> ambiguous_games;
  MetadataSignal signal;

  std::uint64_t seed = 1;
};

struct GroundTruth {
  struct Shift {
    std::string game;
    std::size_t index = 0;
    std::int64_t ts = 0;
    double multiplier = 1.0;
    std::string coupled_to;  // debuting game, empty for scheduled shifts
  };
  struct Debut {
    std::string game;
    std::size_t index = 0;
    std::int64_t ts = 0;
    bool impactful = false;
    std::vector<std::string> coupled_games;
  };
  std::vector<Shift> shifts;
  std::vector<Debut> debuts;
  std::vector<std::size_t> invalid_snapshots;
  std::string metadata_signal;
};

struct SynthCorpus {
  std::vector<Snapshot> snapshots;  // every emitted record, including scheduled invalid ones
  std::vector<std::string> games;
  GroundTruth truth;
  std::map<std::string, nlohmann::json> metadata_fixtures;  // normalized name -> record
  Manifest manifest;
};

/// Synthetic game name for index i.
std::string synth_game_name(std::size_t i);

/// Deterministic under cfg.seed. Throws ConfigError for inconsistent schedules.
SynthCorpus generate_corpus(const SynthConfig& cfg);

/// Writes snapshots.jsonl, snapshots.manifest, ground_truth.json and
/// metadata/<normalized name>.json under `dir`.
void write_corpus(const SynthCorpus& corpus, const std::string& dir);

std::string ground_truth_json(const GroundTruth& truth);

/// Corpus whose debut labels are recoverable exactly: noise-free periodic
/// streams, `n_impactful` + `n_inert` debuts spaced 64 snapshots apart after
/// the longest (7-day) windows have filled, plus two debuts without metadata
/// and one ambiguous name.
SynthConfig planted_signal_config(std::size_t n_impactful, std::size_t n_inert, std::uint64_t seed);

/// Stationary Poisson streams with no cycles, shifts or debuts.
SynthConfig stationary_config(std::size_t n_games, std::size_t n_snapshots, std::uint64_t seed);

}  // namespace viewshift
