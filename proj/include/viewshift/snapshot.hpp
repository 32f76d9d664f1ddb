#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace viewshift {

/// Default snapshot cadence: one platform-wide observation every 15 minutes.
inline constexpr std::int64_t kDefaultTick = 900;

struct GameObservation {
  std::string name;
  std::int64_t streamers = 0;
  std::int64_t viewers = 0;
  /// Viewers of each individual stream, when the source recorded them.
  std::optional<std::vector<std::int64_t>> stream_viewers;

  /// A game counts as present when at least one streamer is playing it.
  bool present() const { return streamers >= 1; }
};

struct Snapshot {
  std::int64_t ts = 0;  // epoch seconds
  std::vector<GameObservation> games;
};

/// Parses one JSONL record. Unknown fields are ignored. Throws ParseError.
Snapshot parse_snapshot_line(std::string_view line);

/// Serializes a snapshot as one JSONL record (no trailing newline).
std::string to_json_line(const Snapshot& s);

enum class InvalidReason {
  duplicate_name,
  negative_count,
  stream_count_mismatch,
  stream_sum_mismatch,
  out_of_order,
};

std::string_view to_string(InvalidReason r);

struct Verdict {
  std::optional<InvalidReason> reason;  // empty when valid
  std::string detail;

  bool valid() const { return !reason.has_value(); }
};

/// Structural completeness check. `previous_ts` is the timestamp of the last
/// accepted snapshot, if any; `s.ts` must be strictly greater.
Verdict validate_snapshot(const Snapshot& s, std::optional<std::int64_t> previous_ts = std::nullopt);

struct LoadReport {
  std::size_t lines = 0;
  std::size_t accepted = 0;
  std::size_t parse_errors = 0;
  std::map<std::string, std::size_t> invalid;  // reason -> count

  std::size_t rejected() const { return lines - accepted; }
};

struct Corpus {
  std::vector<Snapshot> snapshots;  // valid, strictly increasing ts
  LoadReport report;
};

/// Reads a JSONL snapshot archive, discarding malformed or invalid records.
/// Blank lines are skipped and not counted.
Corpus load_snapshots(std::istream& in);
Corpus load_snapshot_file(const std::string& path);

/// Sidecar describing a snapshot archive (plain key=value lines).
struct Manifest {
  std::int64_t tick = kDefaultTick;
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
  std::size_t snapshots = 0;
};

std::string format_manifest(const Manifest& m);
Manifest parse_manifest(std::string_view text);

/// Conventional manifest path for a snapshot file: `x.jsonl` -> `x.manifest`.
std::string manifest_path_for(const std::string& snapshot_path);

}  // namespace viewshift
