#include "viewshift/debut.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <tuple>

#include "viewshift/csv.hpp"
#include "viewshift/errors.hpp"

namespace viewshift {

std::vector<DebutRecord> find_debuts(const SeriesMap& series, std::size_t first_day_samples) {
  std::vector<DebutRecord> out;
  for (const auto& [name, s] : series) {
    const auto it = std::find_if(s.streamers.begin(), s.streamers.end(), [](auto n) { return n >= 1; });
    if (it == s.streamers.end()) continue;
    DebutRecord r;
    r.game = name;
    r.index = static_cast<std::size_t>(it - s.streamers.begin());
    r.t_debut = s.ts(r.index);
    if (r.index < first_day_samples) {
      r.excluded = true;
      r.reason = "debuted within the first day of snapshots";
    }
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return std::tie(a.t_debut, a.game) < std::tie(b.t_debut, b.game); });
  return out;
}

Attribution attribute_events(std::span<const DebutRecord> debuts, std::span<const ChangeEvent> events,
                             std::int64_t horizon) {
  if (horizon < 0) throw DomainError("horizon must be non-negative");
  std::vector<const ChangeEvent*> by_time;
  by_time.reserve(events.size());
  for (const auto& e : events) by_time.push_back(&e);
  std::stable_sort(by_time.begin(), by_time.end(),
                   [](const ChangeEvent* a, const ChangeEvent* b) { return a->t_detect < b->t_detect; });

  Attribution out;
  for (const auto& d : debuts) {
    if (d.excluded) {
      ++out.summary.excluded;
      continue;
    }
    auto first = std::upper_bound(by_time.begin(), by_time.end(), d.t_debut,
                                  [](std::int64_t t, const ChangeEvent* e) { return t < e->t_detect; });
    ImpactLabel label{d.game, d.t_debut, 0, false};
    for (auto it = first; it != by_time.end() && (*it)->t_detect <= d.t_debut + horizon; ++it) {
      if ((*it)->game != d.game) ++label.coincident_events;
    }
    label.impactful = label.coincident_events >= 1;
    ++(label.impactful ? out.summary.with_events : out.summary.without_events);
    out.labels.push_back(std::move(label));
  }
  out.summary.debuts = out.labels.size();
  if (out.summary.debuts > 0) {
    const auto n = static_cast<double>(out.summary.debuts);
    out.summary.fraction_with = static_cast<double>(out.summary.with_events) / n;
    out.summary.fraction_without = static_cast<double>(out.summary.without_events) / n;
  }
  return out;
}

std::string labels_csv(std::span<const ImpactLabel> labels) {
  std::ostringstream out;
  out << "game,t_debut,coincident_events,impactful\n";
  for (const auto& l : labels) {
    out << csv::escape(l.game) << ',' << l.t_debut << ',' << l.coincident_events << ','
        << (l.impactful ? 1 : 0) << '\n';
  }
  return out.str();
}

namespace {

template <typename T>
T parse_number(const std::string& s, const char* what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError(std::string("bad ") + what + " '" + s + "'");
  return v;
}

}  // namespace

std::vector<ImpactLabel> parse_labels_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty() || rows[0] != std::vector<std::string>{"game", "t_debut", "coincident_events", "impactful"}) {
    throw ParseError("labels CSV header must be game,t_debut,coincident_events,impactful");
  }
  std::vector<ImpactLabel> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 4) throw ParseError("labels CSV row " + std::to_string(i) + " has " + std::to_string(r.size()) + " fields");
    ImpactLabel l;
    l.game = r[0];
    l.t_debut = parse_number<std::int64_t>(r[1], "t_debut");
    l.coincident_events = parse_number<std::size_t>(r[2], "coincident_events");
    const int flag = parse_number<int>(r[3], "impactful");
    if (flag != 0 && flag != 1) throw ParseError("impactful must be 0 or 1");
    l.impactful = flag == 1;
    if (l.impactful != (l.coincident_events >= 1)) throw ParseError("impactful disagrees with coincident_events for " + l.game);
    out.push_back(std::move(l));
  }
  return out;
}

}  // namespace viewshift
