#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "viewshift/dataset.hpp"
#include "viewshift/debut.hpp"
#include "viewshift/evaluation.hpp"

namespace viewshift {

/// Multi-valued categorical fields, encoded multi-hot.
inline constexpr std::array<std::string_view, 6> kCategoricalFields = {
    "platforms", "publishers", "developers", "franchises", "genres", "themes"};

/// Fields that enter the model as the number of linked objects.
inline constexpr std::array<std::string_view, 18> kCountFields = {
    "aliases",           "characters",         "concepts",        "locations",        "objects",
    "people",            "videos",             "images",          "user_reviews",     "staff_reviews",
    "killed_characters", "debuted_characters", "debuted_objects", "debuted_locations", "debuted_concepts",
    "debuted_people",    "similar_games",      "rereleases"};

/// Game record from a GiantBomb-compatible service. Dates are epoch days.
struct GameMetadata {
  std::string name;
  std::vector<std::string> aliases;
  std::array<std::vector<std::string>, kCategoricalFields.size()> categories;
  std::optional<std::string> rating;
  std::optional<std::string> description;
  std::optional<std::string> short_description;
  std::array<std::int64_t, kCountFields.size()> counts{};
  bool has_main_image = false;
  std::optional<std::int64_t> date_added;
  std::optional<std::int64_t> date_last_updated;
  std::optional<std::int64_t> original_release_date;
  std::optional<std::int64_t> expected_release_date;

  const std::vector<std::string>& category(std::string_view field) const;
  std::int64_t count(std::string_view field) const;
};

/// Maps the `results` object of a GiantBomb game-detail response. Linked
/// lists reduce to their length; integer counts are accepted as-is; dates
/// outside [1970, 2100) are treated as absent. Throws ParseError when the
/// name is missing or a count is negative.
GameMetadata metadata_from_giantbomb(const nlohmann::json& results);

/// Epoch days for "YYYY-MM-DD" optionally followed by a time of day.
std::optional<std::int64_t> parse_date_days(std::string_view text);

/// Number of Unicode code points in UTF-8 text.
std::size_t utf8_length(std::string_view text);

struct FeatureSchema {
  std::size_t vocabulary_cap = 50;  // 0 keeps every value
  std::int64_t reference_time = 0;  // epoch seconds, anchors game age
  std::vector<std::string> categorical_fields;
  std::vector<std::string> count_fields;
  std::map<std::string, std::vector<std::string>> vocabularies;  // field (or "rating") -> kept values

  std::vector<std::string> feature_names() const;
};

/// Vocabularies hold the `cap` values most frequent among `training` games
/// (ties by value); everything else falls into the field's "other" bucket.
FeatureSchema build_schema(std::span<const GameMetadata> training, std::int64_t reference_time,
                           std::size_t cap = 50);

std::string schema_to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(std::string_view text);

struct FeatureVector {
  std::vector<double> numeric;
  std::vector<std::string> names;
  std::optional<bool> label;
};

/// Encodes lengths, counts, time deltas in days, multi-hot categories and a
/// one-hot rating. Absent optional inputs give 0 plus a "<feature>_missing"
/// indicator of 1. Throws SchemaMismatch when the schema was built for a
/// different field set.
FeatureVector extract_features(const GameMetadata& m, const FeatureSchema& schema);

enum class FetchStatus { ok, not_found, unresolvable };

std::string_view to_string(FetchStatus s);

struct FetchResult {
  FetchStatus status = FetchStatus::not_found;
  std::optional<GameMetadata> metadata;
  std::string detail;
};

struct DropEntry {
  std::string game;
  std::string reason;
};

struct BuiltDataset {
  Dataset dataset;  // row_ids hold game names
  std::vector<DropEntry> dropped;
};

/// One row per label whose game resolved to metadata, in label order.
/// Throws EmptyDataset when no label matches.
BuiltDataset build_dataset(std::span<const ImpactLabel> labels, const std::map<std::string, FetchResult>& metadata,
                           const FeatureSchema& schema);

std::string drop_report_csv(std::span<const DropEntry> dropped);

/// Fold transform that re-derives categorical vocabularies from training
/// rows only: per "<field>=<value>" column group, the `cap` columns most
/// often set in training survive and the rest merge into "<field>=other".
FoldTransform categorical_fold_transform(std::size_t cap = 50);

}  // namespace viewshift
