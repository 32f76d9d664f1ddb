#pragma once

#include <chrono>
#include <cstddef>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "viewshift/metadata.hpp"

namespace viewshift {

inline constexpr const char* kApiKeyEnv = "GIANTBOMB_API_KEY";

struct ClientConfig {
  std::string base_url = "https://www.giantbomb.com/api";
  std::string api_key;
  double rate_limit = 1.0;   // requests per second
  std::string cache_dir;     // raw responses, one JSON file per normalized name
  std::string fixture_dir;   // read-only store in the cache format
  bool live = false;         // network access only when set
  int timeout_seconds = 30;
};

/// Lowercase ASCII alphanumerics with every other run collapsed to '_'.
std::string normalize_name(std::string_view name);

/// Picks the match for `query` from a cached record
/// {"query", "search": <search response>, "details": {guid: <detail response>}}.
/// Exact (case-insensitive) name or alias matches outrank prefix matches;
/// several matches at the best rank are unresolvable; no match is not found.
FetchResult resolve_record(const nlohmann::json& record, std::string_view query);

/// Search-then-detail client for a GiantBomb-compatible API. Stored records
/// (fixtures first, then cache) answer without network traffic. Thread-safe.
class GiantBombClient {
 public:
  explicit GiantBombClient(ClientConfig config);

  /// Throws TransportError (network failure, HTTP >= 500) and AuthError
  /// (HTTP 401/403 or a rejected key).
  FetchResult fetch_game(std::string_view name);

  std::size_t request_count() const;
  std::vector<std::chrono::steady_clock::time_point> request_log() const;

 private:
  nlohmann::json get(const std::string& path, const std::vector<std::pair<std::string, std::string>>& params);
  void wait_for_slot();

  ClientConfig config_;
  mutable std::mutex mutex_;
  std::mutex rate_mutex_;
  std::chrono::steady_clock::time_point next_slot_{};
  std::vector<std::chrono::steady_clock::time_point> log_;
};

}  // namespace viewshift
