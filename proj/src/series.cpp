#include "viewshift/series.hpp"

#include <unordered_map>

#include "viewshift/errors.hpp"

namespace viewshift {

SeriesMap build_series(std::span<const Snapshot> snapshots, std::int64_t tick) {
  if (snapshots.empty()) throw EmptyCorpus("no valid snapshots");
  if (tick <= 0) throw DomainError("tick must be positive");

  auto timeline = std::make_shared<Timeline>();
  timeline->tick = tick;
  timeline->ts.reserve(snapshots.size());
  timeline->gap_before.reserve(snapshots.size());
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    const auto ts = snapshots[i].ts;
    if (i > 0 && ts <= snapshots[i - 1].ts) throw DomainError("snapshots are not sorted by ts");
    timeline->ts.push_back(ts);
    timeline->gap_before.push_back(i > 0 && ts - snapshots[i - 1].ts > tick);
  }

  const std::size_t n = snapshots.size();
  SeriesMap out;
  std::unordered_map<std::string_view, GameSeries*> index;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& g : snapshots[i].games) {
      auto it = index.find(g.name);
      if (it == index.end()) {
        auto& series = out[g.name];
        series.game = g.name;
        series.timeline = timeline;
        series.viewers.assign(n, 0);
        series.streamers.assign(n, 0);
        it = index.emplace(series.game, &series).first;
      }
      it->second->viewers[i] = g.viewers;
      it->second->streamers[i] = g.streamers;
    }
  }
  return out;
}

GameSeries make_series(std::string game, std::span<const SeriesPoint> points, std::int64_t tick) {
  auto timeline = std::make_shared<Timeline>();
  timeline->tick = tick;
  GameSeries s;
  s.game = std::move(game);
  for (std::size_t i = 0; i < points.size(); ++i) {
    timeline->ts.push_back(points[i].ts);
    timeline->gap_before.push_back(i > 0 && points[i].gap_before);
    s.viewers.push_back(points[i].viewers);
    s.streamers.push_back(points[i].streamers);
  }
  s.timeline = std::move(timeline);
  return s;
}

GameSeries make_series(std::string game, std::span<const std::int64_t> viewers, std::int64_t t0,
                       std::int64_t tick) {
  std::vector<SeriesPoint> points;
  points.reserve(viewers.size());
  for (std::size_t i = 0; i < viewers.size(); ++i) {
    points.push_back({t0 + static_cast<std::int64_t>(i) * tick, viewers[i], viewers[i] > 0 ? 1 : 0, false});
  }
  return make_series(std::move(game), points, tick);
}

}  // namespace viewshift
