#include "viewshift/netstats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "viewshift/errors.hpp"

namespace viewshift {

std::size_t Histogram::total() const {
  std::size_t n = 0;
  for (const auto& [value, count] : bins) n += count;
  return n;
}

Histogram count_histogram(std::span<const std::int64_t> values, std::string x_label, std::string y_label) {
  std::map<std::int64_t, std::size_t> counts;
  for (auto v : values) ++counts[v];
  Histogram h{{counts.begin(), counts.end()}, std::move(x_label), std::move(y_label)};
  return h;
}

Histogram population_histogram(const Snapshot& s, HistogramAxis axis) {
  std::vector<std::int64_t> values;
  switch (axis) {
    case HistogramAxis::viewers_per_game:
      for (const auto& g : s.games) values.push_back(g.viewers);
      return count_histogram(values, "viewers", "games");
    case HistogramAxis::streamers_per_game:
      for (const auto& g : s.games) values.push_back(g.streamers);
      return count_histogram(values, "streamers", "games");
    case HistogramAxis::viewers_per_stream:
      for (const auto& g : s.games) {
        if (!g.stream_viewers) throw MissingStreamDetail("game '" + g.name + "' has no stream_viewers");
        values.insert(values.end(), g.stream_viewers->begin(), g.stream_viewers->end());
      }
      return count_histogram(values, "viewers", "streams");
  }
  return {};
}

std::string to_tsv(const Histogram& h) {
  std::ostringstream out;
  out << h.x_label << '\t' << h.y_label << '\n';
  for (const auto& [value, count] : h.bins) out << value << '\t' << count << '\n';
  return out.str();
}

PowerLawFit fit_power_law(std::span<const double> samples, double xmin) {
  if (!(xmin > 0.0)) throw DomainError("xmin must be positive");
  std::size_t n = 0;
  double log_sum = 0.0;
  for (double x : samples) {
    if (x >= xmin) {
      ++n;
      log_sum += std::log(x / xmin);
    }
  }
  if (n < 2) throw InsufficientTail("fewer than two samples >= xmin");
  if (!(log_sum > 0.0)) throw InsufficientTail("every tail sample equals xmin");
  return {1.0 + static_cast<double>(n) / log_sum, xmin, n};
}

LogLogFit loglog_fit(const Histogram& h, double xmin, std::size_t min_bin_count) {
  if (!(xmin > 0.0)) throw DomainError("xmin must be positive");
  std::map<int, std::size_t> groups;
  std::size_t n = 0;
  for (const auto& [value, count] : h.bins) {
    if (static_cast<double>(value) < xmin) continue;
    const int j = static_cast<int>(std::floor(std::log2(static_cast<double>(value) / xmin)));
    groups[j] += count;
    n += count;
  }
  LogLogFit fit;
  for (const auto& [j, count] : groups) {
    if (count < min_bin_count) continue;
    const double lo = xmin * std::ldexp(1.0, j);
    const double width = lo;  // [lo, 2lo)
    const double density = static_cast<double>(count) / (width * static_cast<double>(n));
    fit.points.emplace_back(std::log10(lo * std::sqrt(2.0)), std::log10(density));
  }
  if (fit.points.size() < 2) throw InsufficientTail("fewer than two populated logarithmic bins");
  const double m = static_cast<double>(fit.points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : fit.points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / m;
  double ss = 0;
  for (const auto& [x, y] : fit.points) {
    const double r = y - (fit.intercept + fit.slope * x);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / m);
  return fit;
}

Totals totals_series(std::span<const Snapshot> snapshots) {
  Totals t;
  t.ts.reserve(snapshots.size());
  t.viewers.reserve(snapshots.size());
  t.streamers.reserve(snapshots.size());
  for (const auto& s : snapshots) {
    std::int64_t v = 0;
    std::int64_t st = 0;
    for (const auto& g : s.games) {
      v += g.viewers;
      st += g.streamers;
    }
    t.ts.push_back(s.ts);
    t.viewers.push_back(v);
    t.streamers.push_back(st);
  }
  return t;
}

double autocorrelation(std::span<const double> series, std::size_t lag) {
  if (lag == 0 || lag >= series.size()) throw DomainError("lag must satisfy 1 <= lag < length");
  const std::size_t m = series.size() - lag;
  const auto head = series.subspan(0, m);
  const auto tail = series.subspan(lag, m);
  const double mean_h = std::accumulate(head.begin(), head.end(), 0.0) / static_cast<double>(m);
  const double mean_t = std::accumulate(tail.begin(), tail.end(), 0.0) / static_cast<double>(m);
  double cov = 0, var_h = 0, var_t = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double a = head[i] - mean_h;
    const double b = tail[i] - mean_t;
    cov += a * b;
    var_h += a * a;
    var_t += b * b;
  }
  if (var_h == 0.0 || var_t == 0.0) return 0.0;
  return std::clamp(cov / std::sqrt(var_h * var_t), -1.0, 1.0);
}

std::vector<double> daily_profile(std::span<const std::int64_t> ts, std::span<const std::int64_t> values,
                                  std::int64_t tick) {
  if (ts.size() != values.size()) throw DomainError("ts and values differ in length");
  if (tick <= 0 || 86400 % tick != 0) throw DomainError("tick must divide one day");
  const auto slots = static_cast<std::size_t>(86400 / tick);
  std::vector<double> sum(slots, 0.0);
  std::vector<std::size_t> count(slots, 0);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto slot = static_cast<std::size_t>(((ts[i] % 86400) + 86400) % 86400 / tick);
    sum[slot] += static_cast<double>(values[i]);
    ++count[slot];
  }
  std::vector<double> profile;
  for (std::size_t s = 0; s < slots; ++s) {
    if (count[s]) profile.push_back(sum[s] / static_cast<double>(count[s]));
  }
  return profile;
}

double peak_to_trough(std::span<const double> profile) {
  if (profile.empty()) throw DomainError("empty profile");
  const auto [lo, hi] = std::minmax_element(profile.begin(), profile.end());
  if (*lo <= 0.0) throw DomainError("profile trough is not positive");
  return *hi / *lo;
}

double weekend_uplift(std::span<const std::int64_t> ts, std::span<const std::int64_t> values) {
  if (ts.size() != values.size()) throw DomainError("ts and values differ in length");
  double weekend = 0, weekday = 0;
  std::size_t n_weekend = 0, n_weekday = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const std::int64_t days = ts[i] >= 0 ? ts[i] / 86400 : (ts[i] - 86399) / 86400;
    const auto dow = ((days + 4) % 7 + 7) % 7;  // 0 = Sunday; 1970-01-01 was a Thursday
    if (dow == 0 || dow == 6) {
      weekend += static_cast<double>(values[i]);
      ++n_weekend;
    } else {
      weekday += static_cast<double>(values[i]);
      ++n_weekday;
    }
  }
  if (n_weekend == 0 || n_weekday == 0 || weekday == 0.0) {
    throw DomainError("weekend uplift needs weekday and weekend samples");
  }
  return (weekend / static_cast<double>(n_weekend)) / (weekday / static_cast<double>(n_weekday));
}

EventsPerGame events_per_game(std::span<const ChangeEvent> events, std::size_t top_k) {
  EventsPerGame out;
  for (const auto& e : events) ++out.counts[e.game];
  std::vector<std::int64_t> per_game;
  per_game.reserve(out.counts.size());
  for (const auto& [game, n] : out.counts) per_game.push_back(static_cast<std::int64_t>(n));
  out.histogram = count_histogram(per_game, "events", "games");
  out.top.assign(out.counts.begin(), out.counts.end());
  std::stable_sort(out.top.begin(), out.top.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (out.top.size() > top_k) out.top.resize(top_k);
  return out;
}

}  // namespace viewshift
