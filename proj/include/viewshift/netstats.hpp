#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "viewshift/detector.hpp"
#include "viewshift/snapshot.hpp"

namespace viewshift {

struct Histogram {
  std::vector<std::pair<std::int64_t, std::size_t>> bins;  // (value, count), ascending
  std::string x_label;
  std::string y_label;

  std::size_t total() const;
};

/// Exact integer histogram of `values`.
Histogram count_histogram(std::span<const std::int64_t> values, std::string x_label, std::string y_label);

enum class HistogramAxis { viewers_per_game, streamers_per_game, viewers_per_stream };

/// Population histogram of one snapshot. Games listed with zero viewers are
/// counted on the per-game axes. The per-stream axis throws
/// MissingStreamDetail unless every observation carries stream_viewers.
Histogram population_histogram(const Snapshot& s, HistogramAxis axis);

/// Plot-ready two-column TSV with a header row.
std::string to_tsv(const Histogram& h);

struct PowerLawFit {
  double alpha = 0.0;
  double xmin = 1.0;
  std::size_t n_tail = 0;
};

/// Continuous maximum-likelihood exponent over samples >= xmin:
/// alpha = 1 + n / sum(ln(x / xmin)). Throws InsufficientTail with fewer than
/// two tail samples or when every tail sample equals xmin.
PowerLawFit fit_power_law(std::span<const double> samples, double xmin = 1.0);

/// Least-squares line through log10(density) vs log10(bin centre) of a
/// histogram regrouped into logarithmic (doubling) bins starting at xmin.
struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  std::vector<std::pair<double, double>> points;  // (log10 x, log10 density)
};

LogLogFit loglog_fit(const Histogram& h, double xmin = 1.0, std::size_t min_bin_count = 3);

struct Totals {
  std::vector<std::int64_t> ts;
  std::vector<std::int64_t> viewers;
  std::vector<std::int64_t> streamers;
};

/// Platform-wide viewer and streamer totals per snapshot.
Totals totals_series(std::span<const Snapshot> snapshots);

/// Lagged Pearson correlation between x[0, n-lag) and x[lag, n). A constant
/// segment yields 0. Throws DomainError unless 1 <= lag < n.
double autocorrelation(std::span<const double> series, std::size_t lag);

/// Mean value per time-of-day slot (UTC), slot width = tick.
std::vector<double> daily_profile(std::span<const std::int64_t> ts, std::span<const std::int64_t> values,
                                  std::int64_t tick = kDefaultTick);

/// max/min of the daily profile.
double peak_to_trough(std::span<const double> profile);

/// Mean on Saturdays and Sundays (UTC) over mean on weekdays.
double weekend_uplift(std::span<const std::int64_t> ts, std::span<const std::int64_t> values);

struct EventsPerGame {
  std::map<std::string, std::size_t> counts;
  Histogram histogram;  // events per game -> number of games
  std::vector<std::pair<std::string, std::size_t>> top;
};

/// Per-game event counts, their histogram and the top-K most volatile games
/// (count descending, then name ascending).
EventsPerGame events_per_game(std::span<const ChangeEvent> events, std::size_t top_k = 10);

}  // namespace viewshift
