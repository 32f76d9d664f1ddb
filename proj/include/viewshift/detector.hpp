#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "viewshift/kstest.hpp"
#include "viewshift/series.hpp"

namespace viewshift {

struct DetectorConfig {
  std::size_t window_samples = 96;  // k
  double alpha = kDefaultAlpha;
  std::int64_t tick = kDefaultTick;
};

/// The 1, 2, 3 and 7 day windows at the given tick.
std::vector<DetectorConfig> cyclic_window_configs(double alpha = kDefaultAlpha,
                                                  std::int64_t tick = kDefaultTick);

struct ChangeEvent {
  std::string game;
  std::size_t window_samples = 0;
  std::int64_t t_detect = 0;  // timestamp of the newest W2 sample
  double d = 0.0;
  double p = 0.0;

  friend bool operator==(const ChangeEvent&, const ChangeEvent&) = default;
};

/// Ordering of the corpus event log: (t_detect, game, window_samples).
bool event_order(const ChangeEvent& a, const ChangeEvent& b);

/// One KS test as seen by an observer. W1 covers series indices
/// [w1_begin, w1_begin + k) and W2 covers [w2_begin, w2_begin + k).
struct WindowTest {
  const GameSeries& series;
  std::size_t k;
  std::size_t w1_begin;
  std::size_t w2_begin;
  const KsResult& result;
};

using TestObserver = std::function<void(const WindowTest&)>;

/// Sliding two-window change detection over one series. W1 holds the first k
/// gap-free values and stays fixed; W2 holds the next k and slides by one
/// value after each non-significant test. A significant test emits an event,
/// moves W2 into W1 and refills W2 with fresh values. A gap discards both
/// windows and filling restarts at the gap point.
std::vector<ChangeEvent> detect_changes(const GameSeries& series, const DetectorConfig& cfg,
                                        const TestObserver& observer = {});

struct EventLog {
  std::vector<ChangeEvent> events;                       // sorted by event_order
  std::map<std::size_t, std::size_t> events_per_window;  // every config appears
  std::map<std::size_t, std::size_t> tests_per_window;
  std::map<std::string, std::size_t> events_per_game;    // games with >= 1 event
};

/// Runs detect_changes over every game x config. Results are merged into the
/// deterministic event order regardless of worker scheduling.
EventLog detect_corpus(const SeriesMap& series, std::span<const DetectorConfig> configs,
                       unsigned threads = 0);

/// JSONL: one {game, window_samples, t_detect, d, p} object per line.
void write_events(std::ostream& out, std::span<const ChangeEvent> events);
std::vector<ChangeEvent> read_events(std::istream& in);
std::vector<ChangeEvent> read_event_file(const std::string& path);

/// CSV with columns window_samples,events.
std::string window_summary_csv(const EventLog& log);

/// Parses "45s", "30m", "6h", "7d" (or a bare number of seconds).
std::int64_t parse_duration_seconds(std::string_view text);

/// Converts a window duration to a sample count at `tick`. Bare integers are
/// taken as sample counts. Throws ConfigError for non-integral multiples.
std::size_t window_samples_from(std::string_view text, std::int64_t tick);

}  // namespace viewshift
