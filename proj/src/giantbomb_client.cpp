#include "viewshift/giantbomb_client.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "viewshift/errors.hpp"

namespace viewshift {

using nlohmann::json;
namespace fs = std::filesystem;

std::string normalize_name(std::string_view name) {
  std::string out;
  bool pending_sep = false;
  for (unsigned char c : name) {
    if (std::isalnum(c)) {
      if (pending_sep && !out.empty()) out += '_';
      pending_sep = false;
      out += static_cast<char>(std::tolower(c));
    } else {
      pending_sep = true;
    }
  }
  return out;
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

int match_rank(const json& result, const std::string& query) {
  const std::string name = lower(result.value("name", ""));
  if (name == query) return 2;
  if (const auto it = result.find("aliases"); it != result.end() && it->is_string()) {
    std::string aliases = it->get<std::string>();
    std::size_t start = 0;
    while (start <= aliases.size()) {
      const auto end = std::min(aliases.find('\n', start), aliases.size());
      std::string alias = lower(aliases.substr(start, end - start));
      while (!alias.empty() && (alias.back() == '\r' || alias.back() == ' ')) alias.pop_back();
      if (!alias.empty() && alias == query) return 2;
      start = end + 1;
    }
  }
  if (!query.empty() && name.rfind(query, 0) == 0) return 1;
  return 0;
}

std::string result_key(const json& result) {
  if (const auto g = result.find("guid"); g != result.end() && g->is_string()) return g->get<std::string>();
  if (const auto id = result.find("id"); id != result.end() && id->is_number_integer()) {
    return "3030-" + std::to_string(id->get<std::int64_t>());
  }
  throw ParseError("search result without guid or id");
}

bool looks_like_guid(std::string_view s) {
  return s.size() > 5 && s.substr(0, 5) == "3030-" &&
         std::all_of(s.begin() + 5, s.end(), [](unsigned char c) { return std::isdigit(c); });
}

json load_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw InputError("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

void store_json_file(const fs::path& p, const json& doc) {
  fs::create_directories(p.parent_path());
  // Write-then-rename keeps concurrent writers of one key from interleaving.
  const fs::path tmp = p.string() + ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << doc.dump(2) << '\n';
  }
  fs::rename(tmp, p);
}

void check_api_status(const json& body) {
  const int status = body.value("status_code", 1);
  if (status == 100) throw AuthError("metadata service rejected the API key");
}

}  // namespace

FetchResult resolve_record(const json& record, std::string_view query) {
  const std::string q = lower(query);
  const auto& details = record.contains("details") ? record["details"] : json::object();
  if (looks_like_guid(query)) {
    const auto it = details.find(std::string(query));
    if (it == details.end()) return {FetchStatus::not_found, std::nullopt, "no detail for " + std::string(query)};
    return {FetchStatus::ok, metadata_from_giantbomb(it->at("results")), {}};
  }
  const json& search = record.at("search");
  check_api_status(search);
  const json& results = search.contains("results") ? search["results"] : json::array();
  int best_rank = 0;
  std::vector<const json*> best;
  for (const auto& r : results) {
    const int rank = match_rank(r, q);
    if (rank == 0) continue;
    if (rank > best_rank) {
      best_rank = rank;
      best.clear();
    }
    if (rank == best_rank) best.push_back(&r);
  }
  if (best.empty()) return {FetchStatus::not_found, std::nullopt, "no matching search result"};
  if (best.size() > 1) {
    return {FetchStatus::unresolvable, std::nullopt, std::to_string(best.size()) + " equally ranked matches"};
  }
  const std::string key = result_key(*best.front());
  const auto it = details.find(key);
  if (it == details.end()) return {FetchStatus::not_found, std::nullopt, "no detail for " + key};
  check_api_status(*it);
  if (!it->contains("results") || !(*it)["results"].is_object()) {
    return {FetchStatus::not_found, std::nullopt, "empty detail for " + key};
  }
  return {FetchStatus::ok, metadata_from_giantbomb((*it)["results"]), {}};
}

GiantBombClient::GiantBombClient(ClientConfig config) : config_(std::move(config)) {
  if (!(config_.rate_limit > 0.0)) throw ConfigError("rate limit must be positive");
}

std::size_t GiantBombClient::request_count() const {
  std::lock_guard lock(mutex_);
  return log_.size();
}

std::vector<std::chrono::steady_clock::time_point> GiantBombClient::request_log() const {
  std::lock_guard lock(mutex_);
  return log_;
}

void GiantBombClient::wait_for_slot() {
  using clock = std::chrono::steady_clock;
  std::lock_guard lock(rate_mutex_);
  const auto now = clock::now();
  if (now < next_slot_) std::this_thread::sleep_until(next_slot_);
  const auto issued = clock::now();
  next_slot_ = issued + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / config_.rate_limit));
  std::lock_guard log_lock(mutex_);
  log_.push_back(issued);
}

json GiantBombClient::get(const std::string& path, const std::vector<std::pair<std::string, std::string>>& params) {
  std::string base = config_.base_url;
  const auto scheme_end = base.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base URL needs a scheme: " + base);
  const auto path_start = base.find('/', scheme_end + 3);
  const std::string origin = base.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : base.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

  httplib::Params query{{"api_key", config_.api_key}, {"format", "json"}};
  for (const auto& [k, v] : params) query.emplace(k, v);
  const httplib::Headers headers{{"User-Agent", "viewshift-metadata/1.0"}, {"Accept", "application/json"}};

  wait_for_slot();
  httplib::Client client(origin);
  client.set_connection_timeout(config_.timeout_seconds);
  client.set_read_timeout(config_.timeout_seconds);
  client.set_follow_location(true);
  const auto res = client.Get(prefix + path, query, headers);
  if (!res) throw TransportError("request to " + origin + " failed: " + httplib::to_string(res.error()));
  if (res->status == 401 || res->status == 403) throw AuthError("HTTP " + std::to_string(res->status));
  if (res->status >= 500) throw TransportError("HTTP " + std::to_string(res->status));
  if (res->status == 404) return json{{"status_code", 101}, {"results", json::array()}};
  if (res->status != 200) throw TransportError("unexpected HTTP " + std::to_string(res->status));
  try {
    auto body = json::parse(res->body);
    check_api_status(body);
    return body;
  } catch (const json::exception& e) {
    throw TransportError(std::string("unparseable response: ") + e.what());
  }
}

FetchResult GiantBombClient::fetch_game(std::string_view name) {
  const std::string key = looks_like_guid(name) ? std::string(name) : normalize_name(name);
  if (key.empty()) return {FetchStatus::not_found, std::nullopt, "empty name"};
  for (const auto& dir : {config_.fixture_dir, config_.cache_dir}) {
    if (dir.empty()) continue;
    const fs::path p = fs::path(dir) / (key + ".json");
    if (fs::exists(p)) return resolve_record(load_json_file(p), name);
  }
  if (!config_.live) return {FetchStatus::not_found, std::nullopt, "not in local store"};
  if (config_.api_key.empty()) throw AuthError(std::string("live mode needs an API key (") + kApiKeyEnv + ")");

  json record{{"query", std::string(name)}, {"details", json::object()}};
  if (looks_like_guid(name)) {
    record["search"] = json{{"status_code", 1}, {"results", json::array()}};
    record["details"][key] = get("/game/" + key + "/", {});
  } else {
    record["search"] = get("/search/", {{"query", std::string(name)}, {"resources", "game"},
                                        {"field_list", "name,guid,id,aliases"}});
    const std::string q = lower(name);
    int best_rank = 0;
    std::vector<std::string> best;
    for (const auto& r : record["search"].value("results", json::array())) {
      const int rank = match_rank(r, q);
      if (rank == 0) continue;
      if (rank > best_rank) {
        best_rank = rank;
        best.clear();
      }
      if (rank == best_rank) best.push_back(result_key(r));
    }
    if (best.size() == 1) record["details"][best.front()] = get("/game/" + best.front() + "/", {});
  }
  if (!config_.cache_dir.empty()) store_json_file(fs::path(config_.cache_dir) / (key + ".json"), record);
  return resolve_record(record, name);
}

}  // namespace viewshift
