#include "viewshift/snapshot.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "viewshift/errors.hpp"

namespace viewshift {

using nlohmann::json;

namespace {

std::int64_t require_integer(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'");
  if (it->is_number_unsigned()) {
    const auto v = it->get<std::uint64_t>();
    if (v > static_cast<std::uint64_t>(INT64_MAX)) throw ParseError(std::string("'") + key + "' out of range");
    return static_cast<std::int64_t>(v);
  }
  if (!it->is_number_integer()) throw ParseError(std::string("'") + key + "' is not an integer");
  return it->get<std::int64_t>();
}

GameObservation parse_game(const json& g) {
  if (!g.is_object()) throw ParseError("game entry is not an object");
  GameObservation obs;
  const auto name = g.find("name");
  if (name == g.end() || !name->is_string()) throw ParseError("game entry without string 'name'");
  obs.name = name->get<std::string>();
  obs.streamers = require_integer(g, "streamers");
  obs.viewers = require_integer(g, "viewers");
  if (const auto sv = g.find("stream_viewers"); sv != g.end() && !sv->is_null()) {
    if (!sv->is_array()) throw ParseError("'stream_viewers' is not an array");
    std::vector<std::int64_t> per_stream;
    per_stream.reserve(sv->size());
    for (const auto& v : *sv) {
      if (!v.is_number_integer()) throw ParseError("'stream_viewers' holds a non-integer");
      per_stream.push_back(v.get<std::int64_t>());
    }
    obs.stream_viewers = std::move(per_stream);
  }
  return obs;
}

}  // namespace

Snapshot parse_snapshot_line(std::string_view line) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("snapshot record is not an object");
  Snapshot s;
  s.ts = require_integer(doc, "ts");
  if (s.ts <= 0) throw ParseError("'ts' must be positive");
  const auto games = doc.find("games");
  if (games == doc.end() || !games->is_array()) throw ParseError("missing array 'games'");
  s.games.reserve(games->size());
  for (const auto& g : *games) s.games.push_back(parse_game(g));
  return s;
}

std::string to_json_line(const Snapshot& s) {
  json games = json::array();
  for (const auto& g : s.games) {
    json obj = {{"name", g.name}, {"streamers", g.streamers}, {"viewers", g.viewers}};
    if (g.stream_viewers) obj["stream_viewers"] = *g.stream_viewers;
    games.push_back(std::move(obj));
  }
  return json{{"ts", s.ts}, {"games", std::move(games)}}.dump();
}

std::string_view to_string(InvalidReason r) {
  switch (r) {
    case InvalidReason::duplicate_name: return "duplicate";
    case InvalidReason::negative_count: return "negative count";
    case InvalidReason::stream_count_mismatch: return "stream count mismatch";
    case InvalidReason::stream_sum_mismatch: return "sum mismatch";
    case InvalidReason::out_of_order: return "out of order";
  }
  return "unknown";
}

Verdict validate_snapshot(const Snapshot& s, std::optional<std::int64_t> previous_ts) {
  auto invalid = [](InvalidReason r, std::string detail) { return Verdict{r, std::move(detail)}; };
  if (previous_ts && s.ts <= *previous_ts) {
    return invalid(InvalidReason::out_of_order,
                   "ts " + std::to_string(s.ts) + " not after " + std::to_string(*previous_ts));
  }
  std::unordered_set<std::string_view> seen;
  seen.reserve(s.games.size());
  for (const auto& g : s.games) {
    if (!seen.insert(g.name).second) return invalid(InvalidReason::duplicate_name, g.name);
    if (g.viewers < 0 || g.streamers < 0) return invalid(InvalidReason::negative_count, g.name);
    if (!g.stream_viewers) continue;
    const auto& per_stream = *g.stream_viewers;
    if (static_cast<std::int64_t>(per_stream.size()) != g.streamers) {
      return invalid(InvalidReason::stream_count_mismatch, g.name);
    }
    std::int64_t sum = 0;
    for (auto v : per_stream) {
      if (v < 0) return invalid(InvalidReason::negative_count, g.name);
      sum += v;
    }
    if (sum != g.viewers) return invalid(InvalidReason::stream_sum_mismatch, g.name);
  }
  return {};
}

Corpus load_snapshots(std::istream& in) {
  Corpus corpus;
  std::optional<std::int64_t> previous;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++corpus.report.lines;
    Snapshot s;
    try {
      s = parse_snapshot_line(line);
    } catch (const ParseError&) {
      ++corpus.report.parse_errors;
      ++corpus.report.invalid["parse error"];
      continue;
    }
    const Verdict v = validate_snapshot(s, previous);
    if (!v.valid()) {
      ++corpus.report.invalid[std::string(to_string(*v.reason))];
      continue;
    }
    previous = s.ts;
    corpus.snapshots.push_back(std::move(s));
    ++corpus.report.accepted;
  }
  return corpus;
}

Corpus load_snapshot_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return load_snapshots(in);
}

std::string format_manifest(const Manifest& m) {
  std::ostringstream out;
  out << "tick=" << m.tick << '\n'
      << "t_start=" << m.t_start << '\n'
      << "t_end=" << m.t_end << '\n'
      << "snapshots=" << m.snapshots << '\n';
  return out.str();
}

Manifest parse_manifest(std::string_view text) {
  Manifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("manifest line without '=': " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
      throw ParseError("manifest value for '" + key + "' is not an integer");
    }
    if (key == "tick") {
      if (v <= 0) throw ParseError("manifest tick must be positive");
      m.tick = v;
    } else if (key == "t_start") {
      m.t_start = v;
    } else if (key == "t_end") {
      m.t_end = v;
    } else if (key == "snapshots") {
      m.snapshots = static_cast<std::size_t>(v);
    }
  }
  return m;
}

std::string manifest_path_for(const std::string& snapshot_path) {
  const auto dot = snapshot_path.rfind('.');
  const auto slash = snapshot_path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return snapshot_path + ".manifest";
  }
  return snapshot_path.substr(0, dot) + ".manifest";
}

}  // namespace viewshift
