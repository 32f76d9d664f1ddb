#include "viewshift/metadata.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "viewshift/csv.hpp"
#include "viewshift/errors.hpp"

namespace viewshift {

using nlohmann::json;

namespace {

template <std::size_t N>
std::size_t field_index(const std::array<std::string_view, N>& fields, std::string_view field) {
  const auto it = std::find(fields.begin(), fields.end(), field);
  if (it == fields.end()) throw UnknownFeature("unknown metadata field '" + std::string(field) + "'");
  return static_cast<std::size_t>(it - fields.begin());
}

// GiantBomb keys feeding each count field, in order of preference.
const std::array<std::vector<std::string_view>, kCountFields.size()> kCountSources = {{
    {"aliases"},
    {"characters"},
    {"concepts"},
    {"locations"},
    {"objects"},
    {"people"},
    {"videos"},
    {"images"},
    {"user_reviews"},
    {"staff_reviews", "reviews"},
    {"killed_characters"},
    {"debuted_characters", "first_appearance_characters"},
    {"debuted_objects", "first_appearance_objects"},
    {"debuted_locations", "first_appearance_locations"},
    {"debuted_concepts", "first_appearance_concepts"},
    {"debuted_people", "first_appearance_people"},
    {"similar_games"},
    {"rereleases", "releases"},
}};

std::vector<std::string> name_list(const json& v) {
  std::vector<std::string> out;
  if (v.is_string()) {
    // GiantBomb stores aliases as one newline-separated string.
    std::istringstream in(v.get<std::string>());
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (!line.empty()) out.push_back(line);
    }
    return out;
  }
  if (!v.is_array()) return out;
  for (const auto& item : v) {
    if (item.is_string()) {
      out.push_back(item.get<std::string>());
    } else if (item.is_object() && item.contains("name") && item["name"].is_string()) {
      out.push_back(item["name"].get<std::string>());
    }
  }
  return out;
}

std::optional<std::string> optional_text(const json& obj, std::string_view key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

std::optional<std::int64_t> optional_date(const json& obj, std::string_view key) {
  const auto text = optional_text(obj, key);
  return text ? parse_date_days(*text) : std::nullopt;
}

std::optional<std::int64_t> expected_release(const json& obj) {
  if (auto d = optional_date(obj, "expected_release_date")) return d;
  const auto year = obj.find("expected_release_year");
  if (year == obj.end() || !year->is_number_integer()) return std::nullopt;
  auto part = [&](const char* key) {
    const auto it = obj.find(key);
    return it != obj.end() && it->is_number_integer() ? it->get<int>() : 1;
  };
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year->get<int>(), part("expected_release_month"),
                part("expected_release_day"));
  return parse_date_days(buf);
}

std::int64_t count_of(const json& v, std::string_view key) {
  if (v.is_null()) return 0;
  if (v.is_array()) return static_cast<std::int64_t>(v.size());
  if (v.is_string() && key == "aliases") return static_cast<std::int64_t>(name_list(v).size());
  if (v.is_number_integer()) {
    const auto n = v.get<std::int64_t>();
    if (n < 0) throw ParseError("negative count for '" + std::string(key) + "'");
    return n;
  }
  throw ParseError("field '" + std::string(key) + "' is neither a list nor a count");
}

}  // namespace

const std::vector<std::string>& GameMetadata::category(std::string_view field) const {
  return categories[field_index(kCategoricalFields, field)];
}

std::int64_t GameMetadata::count(std::string_view field) const { return counts[field_index(kCountFields, field)]; }

std::optional<std::int64_t> parse_date_days(std::string_view text) {
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  const auto ok = [](auto r, const char* end) { return r.ec == std::errc{} && r.ptr == end; };
  if (!ok(std::from_chars(text.data(), text.data() + 4, y), text.data() + 4) ||
      !ok(std::from_chars(text.data() + 5, text.data() + 7, m), text.data() + 7) ||
      !ok(std::from_chars(text.data() + 8, text.data() + 10, d), text.data() + 10)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok() || y < 1970 || y >= 2100) return std::nullopt;
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

std::size_t utf8_length(std::string_view text) {
  return static_cast<std::size_t>(
      std::count_if(text.begin(), text.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

GameMetadata metadata_from_giantbomb(const json& r) {
  if (!r.is_object()) throw ParseError("game detail is not an object");
  GameMetadata m;
  const auto name = optional_text(r, "name");
  if (!name || name->empty()) throw ParseError("game detail without a name");
  m.name = *name;
  if (r.contains("aliases")) m.aliases = name_list(r["aliases"]);
  for (std::size_t f = 0; f < kCategoricalFields.size(); ++f) {
    if (const auto it = r.find(kCategoricalFields[f]); it != r.end()) m.categories[f] = name_list(*it);
  }
  if (const auto it = r.find("original_game_rating"); it != r.end()) {
    const auto ratings = name_list(*it);
    if (!ratings.empty()) m.rating = ratings.front();
  } else {
    m.rating = optional_text(r, "rating");
  }
  m.description = optional_text(r, "description");
  m.short_description = optional_text(r, "deck");
  if (!m.short_description) m.short_description = optional_text(r, "short_description");
  for (std::size_t f = 0; f < kCountFields.size(); ++f) {
    for (const auto key : kCountSources[f]) {
      if (const auto it = r.find(key); it != r.end()) {
        m.counts[f] = count_of(*it, key);
        break;
      }
    }
  }
  if (const auto it = r.find("image"); it != r.end()) m.has_main_image = !it->is_null();
  m.date_added = optional_date(r, "date_added");
  m.date_last_updated = optional_date(r, "date_last_updated");
  m.original_release_date = optional_date(r, "original_release_date");
  m.expected_release_date = expected_release(r);
  return m;
}

std::vector<std::string> FeatureSchema::feature_names() const {
  std::vector<std::string> names = {"description_len", "description_missing", "short_description_len",
                                    "short_description_missing"};
  for (const auto& f : count_fields) names.push_back(f + "_count");
  names.push_back("has_main_image");
  for (const char* t : {"game_age", "added_minus_updated", "added_minus_release", "release_minus_expected"}) {
    names.push_back(t);
    names.push_back(std::string(t) + "_missing");
  }
  for (const auto& field : categorical_fields) {
    const auto it = vocabularies.find(field);
    if (it != vocabularies.end()) {
      for (const auto& v : it->second) names.push_back(field + "=" + v);
    }
    names.push_back(field + "=other");
  }
  if (const auto it = vocabularies.find("rating"); it != vocabularies.end()) {
    for (const auto& v : it->second) names.push_back("rating=" + v);
  }
  names.push_back("rating=other");
  names.push_back("rating_missing");
  return names;
}

namespace {

std::vector<std::string> top_values(const std::map<std::string, std::size_t>& freq, std::size_t cap) {
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (cap != 0 && ranked.size() > cap) ranked.resize(cap);
  std::vector<std::string> out;
  for (auto& [v, n] : ranked) out.push_back(std::move(v));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

FeatureSchema build_schema(std::span<const GameMetadata> training, std::int64_t reference_time, std::size_t cap) {
  FeatureSchema s;
  s.vocabulary_cap = cap;
  s.reference_time = reference_time;
  s.categorical_fields.assign(kCategoricalFields.begin(), kCategoricalFields.end());
  s.count_fields.assign(kCountFields.begin(), kCountFields.end());
  for (std::size_t f = 0; f < kCategoricalFields.size(); ++f) {
    std::map<std::string, std::size_t> freq;
    for (const auto& m : training) {
      const std::set<std::string> distinct(m.categories[f].begin(), m.categories[f].end());
      for (const auto& v : distinct) ++freq[v];
    }
    s.vocabularies[std::string(kCategoricalFields[f])] = top_values(freq, cap);
  }
  std::map<std::string, std::size_t> ratings;
  for (const auto& m : training) {
    if (m.rating) ++ratings[*m.rating];
  }
  s.vocabularies["rating"] = top_values(ratings, cap);
  return s;
}

std::string schema_to_json(const FeatureSchema& s) {
  nlohmann::ordered_json j;
  j["vocabulary_cap"] = s.vocabulary_cap;
  j["reference_time"] = s.reference_time;
  j["categorical_fields"] = s.categorical_fields;
  j["count_fields"] = s.count_fields;
  j["vocabularies"] = s.vocabularies;
  return j.dump(2);
}

FeatureSchema schema_from_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    FeatureSchema s;
    s.vocabulary_cap = j.at("vocabulary_cap").get<std::size_t>();
    s.reference_time = j.at("reference_time").get<std::int64_t>();
    s.categorical_fields = j.at("categorical_fields").get<std::vector<std::string>>();
    s.count_fields = j.at("count_fields").get<std::vector<std::string>>();
    s.vocabularies = j.at("vocabularies").get<std::map<std::string, std::vector<std::string>>>();
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("schema JSON: ") + e.what());
  }
}

FeatureVector extract_features(const GameMetadata& m, const FeatureSchema& schema) {
  if (!std::equal(schema.categorical_fields.begin(), schema.categorical_fields.end(), kCategoricalFields.begin(),
                  kCategoricalFields.end()) ||
      !std::equal(schema.count_fields.begin(), schema.count_fields.end(), kCountFields.begin(), kCountFields.end())) {
    throw SchemaMismatch("schema field set differs from the metadata record");
  }
  FeatureVector fv;
  fv.names = schema.feature_names();
  fv.numeric.reserve(fv.names.size());
  auto& out = fv.numeric;
  auto optional_value = [&out](std::optional<double> v) {
    out.push_back(v.value_or(0.0));
    out.push_back(v ? 0.0 : 1.0);
  };
  auto text_len = [](const std::optional<std::string>& t) -> std::optional<double> {
    if (!t) return std::nullopt;
    return static_cast<double>(utf8_length(*t));
  };
  optional_value(text_len(m.description));
  optional_value(text_len(m.short_description));
  for (auto c : m.counts) out.push_back(static_cast<double>(c));
  out.push_back(m.has_main_image ? 1.0 : 0.0);

  auto diff = [](std::optional<std::int64_t> a, std::optional<double> b) -> std::optional<double> {
    if (!a || !b) return std::nullopt;
    return static_cast<double>(*a) - *b;
  };
  auto as_real = [](std::optional<std::int64_t> v) -> std::optional<double> {
    if (!v) return std::nullopt;
    return static_cast<double>(*v);
  };
  const double reference_days = static_cast<double>(schema.reference_time) / 86400.0;
  std::optional<double> age;
  if (m.original_release_date) age = reference_days - static_cast<double>(*m.original_release_date);
  optional_value(age);
  optional_value(diff(m.date_added, as_real(m.date_last_updated)));
  optional_value(diff(m.date_added, as_real(m.original_release_date)));
  optional_value(diff(m.original_release_date, as_real(m.expected_release_date)));

  auto encode_group = [&out](const std::vector<std::string>& vocab, const std::vector<std::string>& values) {
    const std::size_t base = out.size();
    out.resize(base + vocab.size() + 1, 0.0);
    for (const auto& v : values) {
      const auto it = std::lower_bound(vocab.begin(), vocab.end(), v);
      if (it != vocab.end() && *it == v) {
        out[base + static_cast<std::size_t>(it - vocab.begin())] = 1.0;
      } else {
        out[base + vocab.size()] = 1.0;
      }
    }
  };
  static const std::vector<std::string> kEmpty;
  for (std::size_t f = 0; f < schema.categorical_fields.size(); ++f) {
    const auto it = schema.vocabularies.find(schema.categorical_fields[f]);
    encode_group(it == schema.vocabularies.end() ? kEmpty : it->second, m.categories[f]);
  }
  const auto rv = schema.vocabularies.find("rating");
  std::vector<std::string> rating_values;
  if (m.rating) rating_values.push_back(*m.rating);
  encode_group(rv == schema.vocabularies.end() ? kEmpty : rv->second, rating_values);
  out.push_back(m.rating ? 0.0 : 1.0);

  if (out.size() != fv.names.size()) throw SchemaMismatch("encoded width differs from schema feature names");
  return fv;
}

std::string_view to_string(FetchStatus s) {
  switch (s) {
    case FetchStatus::ok: return "ok";
    case FetchStatus::not_found: return "not found";
    case FetchStatus::unresolvable: return "unresolvable";
  }
  return "unknown";
}

BuiltDataset build_dataset(std::span<const ImpactLabel> labels, const std::map<std::string, FetchResult>& metadata,
                           const FeatureSchema& schema) {
  BuiltDataset out;
  out.dataset.feature_names = schema.feature_names();
  for (const auto& label : labels) {
    const auto it = metadata.find(label.game);
    if (it == metadata.end()) {
      out.dropped.push_back({label.game, "no metadata"});
      continue;
    }
    if (it->second.status != FetchStatus::ok || !it->second.metadata) {
      std::string reason(to_string(it->second.status));
      if (!it->second.detail.empty()) reason += ": " + it->second.detail;
      out.dropped.push_back({label.game, reason});
      continue;
    }
    auto fv = extract_features(*it->second.metadata, schema);
    out.dataset.rows.push_back(std::move(fv.numeric));
    out.dataset.labels.push_back(label.impactful ? 1 : 0);
    out.dataset.row_ids.push_back(label.game);
  }
  if (out.dataset.rows.empty()) throw EmptyDataset("no labelled game has resolvable metadata");
  return out;
}

std::string drop_report_csv(std::span<const DropEntry> dropped) {
  std::ostringstream out;
  out << "game,reason\n";
  for (const auto& d : dropped) out << csv::escape(d.game) << ',' << csv::escape(d.reason) << '\n';
  return out.str();
}

FoldTransform categorical_fold_transform(std::size_t cap) {
  return [cap](const Dataset& data, std::span<const std::size_t> train_rows) {
    std::map<std::string, std::vector<std::size_t>> groups;  // prefix -> value columns
    std::map<std::string, std::size_t> other_column;
    for (std::size_t c = 0; c < data.features(); ++c) {
      const auto& name = data.feature_names[c];
      const auto eq = name.find('=');
      if (eq == std::string::npos) continue;
      const std::string prefix = name.substr(0, eq);
      if (name.compare(eq + 1, std::string::npos, "other") == 0) {
        other_column[prefix] = c;
      } else {
        groups[prefix].push_back(c);
      }
    }
    std::vector<bool> keep(data.features(), true);
    std::vector<std::pair<std::size_t, std::size_t>> merges;  // (from column, into other column)
    for (const auto& [prefix, cols] : groups) {
      const auto other = other_column.find(prefix);
      if (other == other_column.end()) continue;
      std::vector<std::pair<std::size_t, std::size_t>> usage;  // (training count, column)
      for (auto c : cols) {
        std::size_t n = 0;
        for (auto r : train_rows) n += data.rows[r][c] != 0.0;
        usage.push_back({n, c});
      }
      std::stable_sort(usage.begin(), usage.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      for (std::size_t i = 0; i < usage.size(); ++i) {
        const bool unseen = usage[i].first == 0;
        if (unseen || (cap != 0 && i >= cap)) {
          keep[usage[i].second] = false;
          merges.push_back({usage[i].second, other->second});
        }
      }
    }
    Dataset out;
    out.labels = data.labels;
    out.row_ids = data.row_ids;
    for (std::size_t c = 0; c < data.features(); ++c) {
      if (keep[c]) out.feature_names.push_back(data.feature_names[c]);
    }
    out.rows.reserve(data.size());
    for (const auto& row : data.rows) {
      std::vector<double> merged = row;
      for (const auto& [from, into] : merges) {
        if (merged[from] != 0.0) merged[into] = 1.0;
      }
      std::vector<double> kept;
      kept.reserve(out.feature_names.size());
      for (std::size_t c = 0; c < merged.size(); ++c) {
        if (keep[c]) kept.push_back(merged[c]);
      }
      out.rows.push_back(std::move(kept));
    }
    return out;
  };
}

}  // namespace viewshift
