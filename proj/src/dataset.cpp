#include "viewshift/dataset.hpp"

#include <charconv>
#include <sstream>

#include "viewshift/csv.hpp"
#include "viewshift/errors.hpp"

namespace viewshift {

std::size_t Dataset::feature_index(std::string_view name) const {
  for (std::size_t i = 0; i < feature_names.size(); ++i) {
    if (feature_names[i] == name) return i;
  }
  throw UnknownFeature("no feature named '" + std::string(name) + "'");
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.feature_names = feature_names;
  out.rows.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (auto i : indices) {
    out.rows.push_back(rows.at(i));
    out.labels.push_back(labels.at(i));
    if (!row_ids.empty()) out.row_ids.push_back(row_ids.at(i));
  }
  return out;
}

void Dataset::check() const {
  if (labels.size() != rows.size()) throw ArityMismatch("label count differs from row count");
  if (!row_ids.empty() && row_ids.size() != rows.size()) throw ArityMismatch("row id count differs from row count");
  for (const auto& r : rows) {
    if (r.size() != feature_names.size()) throw ArityMismatch("row width differs from feature count");
  }
  for (int l : labels) {
    if (l != 0 && l != 1) throw DomainError("labels must be 0 or 1");
  }
}

namespace {

std::string format_value(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_value(const std::string& s) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError("bad numeric cell '" + s + "'");
  return v;
}

}  // namespace

std::string dataset_csv(const Dataset& d) {
  d.check();
  std::ostringstream out;
  auto header = d.feature_names;
  header.push_back("label");
  out << csv::join(header) << '\n';
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    for (double v : d.rows[i]) out << format_value(v) << ',';
    out << d.labels[i] << '\n';
  }
  return out.str();
}

Dataset parse_dataset_csv(std::string_view text) {
  const auto records = csv::parse(text);
  if (records.empty() || records[0].empty() || records[0].back() != "label") {
    throw ParseError("dataset CSV header must end with 'label'");
  }
  Dataset d;
  d.feature_names.assign(records[0].begin(), records[0].end() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != records[0].size()) throw ParseError("dataset row " + std::to_string(r) + " has wrong width");
    std::vector<double> row;
    row.reserve(d.feature_names.size());
    for (std::size_t c = 0; c + 1 < rec.size(); ++c) row.push_back(parse_value(rec[c]));
    const double label = parse_value(rec.back());
    if (label != 0.0 && label != 1.0) throw ParseError("label must be 0 or 1");
    d.rows.push_back(std::move(row));
    d.labels.push_back(static_cast<int>(label));
  }
  return d;
}

Dataset ablate(const Dataset& d, std::string_view feature) {
  const std::size_t col = d.feature_index(feature);
  Dataset out = d;
  out.feature_names.erase(out.feature_names.begin() + static_cast<std::ptrdiff_t>(col));
  for (auto& r : out.rows) r.erase(r.begin() + static_cast<std::ptrdiff_t>(col));
  return out;
}

}  // namespace viewshift
