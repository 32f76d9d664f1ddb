#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace viewshift {

/// Feature matrix with binary labels (1 = impactful).
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<std::string> row_ids;  // optional; not part of the CSV

  std::size_t size() const { return rows.size(); }
  std::size_t features() const { return feature_names.size(); }

  /// Throws UnknownFeature.
  std::size_t feature_index(std::string_view name) const;

  Dataset subset(std::span<const std::size_t> indices) const;

  /// Throws ArityMismatch or DomainError when shapes or labels are inconsistent.
  void check() const;
};

/// CSV whose header is the feature names followed by "label".
std::string dataset_csv(const Dataset& d);
Dataset parse_dataset_csv(std::string_view text);

/// Copy of `d` without the named column. Throws UnknownFeature.
Dataset ablate(const Dataset& d, std::string_view feature);

}  // namespace viewshift
