#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace viewshift {

/// Plain-text pipeline settings: one `key = value` per line, `#` starts a
/// comment. Command-line flags override file values key by key.
class PipelineConfig {
 public:
  /// Throws ConfigError on malformed lines, unknown keys or duplicates.
  static PipelineConfig parse(std::string_view text);
  static PipelineConfig load(const std::string& path);

  static const std::vector<std::string>& known_keys();
  static const std::vector<std::string>& path_keys();

  void set(const std::string& key, std::string value);
  std::optional<std::string> get(const std::string& key) const;

  std::string text_or(const std::string& key, const std::string& fallback) const;
  double number_or(const std::string& key, double fallback) const;
  std::int64_t integer_or(const std::string& key, std::int64_t fallback) const;
  bool flag_or(const std::string& key, bool fallback) const;
  /// Comma-separated list with blanks trimmed.
  std::vector<std::string> list_or(const std::string& key, const std::vector<std::string>& fallback) const;

  /// Throws ConfigError when two path settings name the same file.
  void check_distinct_paths() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace viewshift
