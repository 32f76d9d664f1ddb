#include "viewshift/detector.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "viewshift/errors.hpp"
#include "viewshift/parallel.hpp"

namespace viewshift {

using nlohmann::json;

std::vector<DetectorConfig> cyclic_window_configs(double alpha, std::int64_t tick) {
  if (tick <= 0 || 86400 % tick != 0) throw ConfigError("tick must divide one day");
  const auto per_day = static_cast<std::size_t>(86400 / tick);
  std::vector<DetectorConfig> out;
  for (std::size_t days : {1, 2, 3, 7}) out.push_back({per_day * days, alpha, tick});
  return out;
}

bool event_order(const ChangeEvent& a, const ChangeEvent& b) {
  return std::tie(a.t_detect, a.game, a.window_samples) < std::tie(b.t_detect, b.game, b.window_samples);
}

namespace {

void insert_sorted(std::vector<double>& v, double x) { v.insert(std::upper_bound(v.begin(), v.end(), x), x); }

void erase_sorted(std::vector<double>& v, double x) { v.erase(std::lower_bound(v.begin(), v.end(), x)); }

}  // namespace

std::vector<ChangeEvent> detect_changes(const GameSeries& series, const DetectorConfig& cfg,
                                        const TestObserver& observer) {
  const std::size_t k = cfg.window_samples;
  if (k == 0) throw ConfigError("window_samples must be positive");
  std::vector<ChangeEvent> events;
  std::vector<double> w1;
  std::vector<double> w2;
  w1.reserve(k);
  w2.reserve(k + 1);
  std::size_t w1_begin = 0;
  std::size_t w2_begin = 0;

  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.gap_before(i)) {
      w1.clear();
      w2.clear();
    }
    const auto value = static_cast<double>(series.viewers[i]);
    if (w1.size() < k) {
      if (w1.empty()) w1_begin = i;
      insert_sorted(w1, value);
      continue;
    }
    if (w2.size() < k) {
      if (w2.empty()) w2_begin = i;
      insert_sorted(w2, value);
      if (w2.size() < k) continue;
    } else {
      erase_sorted(w2, static_cast<double>(series.viewers[w2_begin]));
      ++w2_begin;
      insert_sorted(w2, value);
    }

    const KsResult r = ks_test_sorted(w1, w2, cfg.alpha);
    if (observer) observer(WindowTest{series, k, w1_begin, w2_begin, r});
    if (r.significant) {
      events.push_back({series.game, k, series.ts(i), r.d, r.p});
      w1.swap(w2);
      w1_begin = w2_begin;
      w2.clear();
    }
  }
  return events;
}

EventLog detect_corpus(const SeriesMap& series, std::span<const DetectorConfig> configs, unsigned threads) {
  for (std::size_t i = 0; i < configs.size(); ++i) {
    for (std::size_t j = i + 1; j < configs.size(); ++j) {
      if (configs[i].window_samples == configs[j].window_samples) {
        throw ConfigError("duplicate window size " + std::to_string(configs[i].window_samples));
      }
    }
  }
  std::vector<const GameSeries*> games;
  games.reserve(series.size());
  for (const auto& [name, s] : series) games.push_back(&s);

  const std::size_t tasks = games.size() * configs.size();
  std::vector<std::vector<ChangeEvent>> results(tasks);
  std::vector<std::size_t> tests(tasks, 0);
  parallel_for(
      tasks,
      [&](std::size_t t) {
        const auto& s = *games[t / configs.size()];
        const auto& cfg = configs[t % configs.size()];
        std::size_t count = 0;
        results[t] = detect_changes(s, cfg, [&count](const WindowTest&) { ++count; });
        tests[t] = count;
      },
      threads);

  EventLog log;
  for (const auto& cfg : configs) {
    log.events_per_window[cfg.window_samples] = 0;
    log.tests_per_window[cfg.window_samples] = 0;
  }
  for (std::size_t t = 0; t < tasks; ++t) {
    const auto k = configs[t % configs.size()].window_samples;
    log.tests_per_window[k] += tests[t];
    log.events_per_window[k] += results[t].size();
    for (auto& e : results[t]) {
      ++log.events_per_game[e.game];
      log.events.push_back(std::move(e));
    }
  }
  std::sort(log.events.begin(), log.events.end(), event_order);
  return log;
}

void write_events(std::ostream& out, std::span<const ChangeEvent> events) {
  for (const auto& e : events) {
    out << json{{"game", e.game}, {"window_samples", e.window_samples}, {"t_detect", e.t_detect},
                {"d", e.d}, {"p", e.p}}
               .dump()
        << '\n';
  }
}

std::vector<ChangeEvent> read_events(std::istream& in) {
  std::vector<ChangeEvent> events;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      ChangeEvent e;
      e.game = j.at("game").get<std::string>();
      e.window_samples = j.at("window_samples").get<std::size_t>();
      e.t_detect = j.at("t_detect").get<std::int64_t>();
      e.d = j.at("d").get<double>();
      e.p = j.at("p").get<double>();
      events.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw ParseError("event log line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  std::stable_sort(events.begin(), events.end(), event_order);
  return events;
}

std::vector<ChangeEvent> read_event_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_events(in);
}

std::string window_summary_csv(const EventLog& log) {
  std::ostringstream out;
  out << "window_samples,events\n";
  for (const auto& [k, n] : log.events_per_window) out << k << ',' << n << '\n';
  return out.str();
}

std::int64_t parse_duration_seconds(std::string_view text) {
  if (text.empty()) throw ConfigError("empty duration");
  std::int64_t unit = 1;
  std::string_view digits = text;
  switch (text.back()) {
    case 's': unit = 1; digits.remove_suffix(1); break;
    case 'm': unit = 60; digits.remove_suffix(1); break;
    case 'h': unit = 3600; digits.remove_suffix(1); break;
    case 'd': unit = 86400; digits.remove_suffix(1); break;
    default: break;
  }
  std::int64_t n = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || n <= 0) {
    throw ConfigError("bad duration '" + std::string(text) + "'");
  }
  return n * unit;
}

std::size_t window_samples_from(std::string_view text, std::int64_t tick) {
  if (tick <= 0) throw ConfigError("tick must be positive");
  if (!text.empty() && std::isdigit(static_cast<unsigned char>(text.back()))) {
    std::size_t n = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
    if (ec != std::errc{} || ptr != text.data() + text.size() || n == 0) {
      throw ConfigError("bad window '" + std::string(text) + "'");
    }
    return n;
  }
  const auto seconds = parse_duration_seconds(text);
  if (seconds % tick != 0) {
    throw ConfigError("window '" + std::string(text) + "' is not a whole number of " + std::to_string(tick) +
                      "s ticks");
  }
  return static_cast<std::size_t>(seconds / tick);
}

}  // namespace viewshift
