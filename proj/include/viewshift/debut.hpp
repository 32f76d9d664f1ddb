#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "viewshift/detector.hpp"
#include "viewshift/series.hpp"

namespace viewshift {

inline constexpr std::int64_t kDefaultHorizon = 1800;  // 30 minutes

struct DebutRecord {
  std::string game;
  std::int64_t t_debut = 0;
  std::size_t index = 0;  // position of the debut snapshot among valid snapshots
  bool excluded = false;
  std::string reason;  // why excluded, empty otherwise
};

/// First snapshot in which each game appears with at least one streamer.
/// Debuts among the first `first_day_samples` valid snapshots are excluded:
/// those games were already live when collection began. Games never present
/// get no record. Ordered by (t_debut, game).
std::vector<DebutRecord> find_debuts(const SeriesMap& series, std::size_t first_day_samples = 96);

struct ImpactLabel {
  std::string game;
  std::int64_t t_debut = 0;
  std::size_t coincident_events = 0;
  bool impactful = false;  // coincident_events >= 1
};

struct DebutSummary {
  std::size_t debuts = 0;  // labelled (non-excluded)
  std::size_t excluded = 0;
  std::size_t with_events = 0;
  std::size_t without_events = 0;
  double fraction_with = 0.0;
  double fraction_without = 0.0;
};

struct Attribution {
  std::vector<ImpactLabel> labels;
  DebutSummary summary;
};

/// Counts, for each non-excluded debut, the change events on other games
/// with t_detect in (t_debut, t_debut + horizon]. Events of every window size
/// are pooled.
Attribution attribute_events(std::span<const DebutRecord> debuts, std::span<const ChangeEvent> events,
                             std::int64_t horizon = kDefaultHorizon);

/// CSV with columns game,t_debut,coincident_events,impactful (1/0).
std::string labels_csv(std::span<const ImpactLabel> labels);
std::vector<ImpactLabel> parse_labels_csv(std::string_view text);

}  // namespace viewshift
