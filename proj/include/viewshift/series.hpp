#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "viewshift/snapshot.hpp"

namespace viewshift {

struct SeriesPoint {
  std::int64_t ts = 0;
  std::int64_t viewers = 0;
  std::int64_t streamers = 0;
  bool gap_before = false;  // invalid or missing snapshots precede this point
};

/// Timestamps and gap markers shared by every series of one corpus.
struct Timeline {
  std::int64_t tick = kDefaultTick;
  std::vector<std::int64_t> ts;
  std::vector<std::uint8_t> gap_before;

  std::size_t size() const { return ts.size(); }
};

/// Viewer-count series v(g) of one game, one value per valid snapshot.
struct GameSeries {
  std::string game;
  std::shared_ptr<const Timeline> timeline;
  std::vector<std::int64_t> viewers;
  std::vector<std::int64_t> streamers;

  std::size_t size() const { return viewers.size(); }
  std::int64_t ts(std::size_t i) const { return timeline->ts[i]; }
  bool gap_before(std::size_t i) const { return timeline->gap_before[i] != 0; }
  SeriesPoint point(std::size_t i) const { return {ts(i), viewers[i], streamers[i], gap_before(i)}; }
};

using SeriesMap = std::map<std::string, GameSeries>;

/// Builds one series per game ever observed. Absent games contribute 0; a
/// spacing wider than `tick` between consecutive snapshots marks a gap.
/// Throws EmptyCorpus when `snapshots` is empty.
SeriesMap build_series(std::span<const Snapshot> snapshots, std::int64_t tick = kDefaultTick);

/// Standalone series from explicit points; gap flags are taken as given
/// (the first point's flag is forced false).
GameSeries make_series(std::string game, std::span<const SeriesPoint> points,
                       std::int64_t tick = kDefaultTick);

/// Convenience for tests and synthetic streams: consecutive ticks starting at
/// `t0`, no gaps, streamers = 1 wherever viewers > 0.
GameSeries make_series(std::string game, std::span<const std::int64_t> viewers,
                       std::int64_t t0, std::int64_t tick = kDefaultTick);

}  // namespace viewshift
