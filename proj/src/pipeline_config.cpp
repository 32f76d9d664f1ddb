#include "viewshift/pipeline_config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>

#include "viewshift/errors.hpp"

namespace viewshift {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

const std::vector<std::string>& PipelineConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "snapshots",  "events",     "window_summary", "labels",       "debut_summary", "metadata_dir",
      "cache_dir",  "fetch_report", "dataset",      "drop_report",  "schema",        "report_json",
      "model_out",  "report_dir", "stats_out",      "windows",      "alpha",         "horizon",
      "tick",       "threads",    "first_day",      "rate_limit",   "base_url",      "live",
      "seed",       "folds",      "model",          "n_trees",      "max_depth",     "nu",
      "vocab_cap",  "train_vocab_cap", "reference_time", "ablate",  "top_k",         "xmin",
      "out_dir"};
  return keys;
}

const std::vector<std::string>& PipelineConfig::path_keys() {
  static const std::vector<std::string> keys = {"snapshots",   "events",  "window_summary", "labels",
                                                "debut_summary", "fetch_report", "dataset", "drop_report",
                                                "schema",      "report_json", "model_out", "stats_out"};
  return keys;
}

PipelineConfig PipelineConfig::parse(std::string_view text) {
  PipelineConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const auto& known = known_keys();
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (cfg.values_.count(key)) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    cfg.values_[key] = std::string(trim(line.substr(eq + 1)));
  }
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::string& path) { return parse(read_text_file(path)); }

void PipelineConfig::set(const std::string& key, std::string value) { values_[key] = std::move(value); }

std::optional<std::string> PipelineConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string PipelineConfig::text_or(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double PipelineConfig::number_or(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double x = std::stod(*v, &used);
    if (used != v->size()) throw ConfigError("");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' is not a number: " + *v);
  }
}

std::int64_t PipelineConfig::integer_or(const std::string& key, std::int64_t fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::int64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), x);
  if (ec != std::errc{} || ptr != v->data() + v->size()) throw ConfigError("'" + key + "' is not an integer: " + *v);
  return x;
}

bool PipelineConfig::flag_or(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError("'" + key + "' is not a boolean: " + *v);
}

std::vector<std::string> PipelineConfig::list_or(const std::string& key,
                                                 const std::vector<std::string>& fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::vector<std::string> out;
  std::string_view rest(*v);
  while (true) {
    const auto comma = rest.find(',');
    const auto item = trim(rest.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

void PipelineConfig::check_distinct_paths() const {
  std::map<std::string, std::string> seen;
  for (const auto& key : path_keys()) {
    const auto v = get(key);
    if (!v || v->empty()) continue;
    const std::string norm = std::filesystem::path(*v).lexically_normal().string();
    const auto [it, fresh] = seen.emplace(norm, key);
    if (!fresh) throw ConfigError("'" + key + "' and '" + it->second + "' both name " + *v);
  }
}

}  // namespace viewshift
