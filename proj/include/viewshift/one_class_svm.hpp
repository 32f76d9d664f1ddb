#pragma once

#include <optional>
#include <span>
#include <vector>

namespace viewshift {

/// Per-feature centring and scaling. Constant features keep scale 1.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;

  /// Throws EmptyDataset for no rows, ArityMismatch for ragged rows.
  static Standardization fit(std::span<const std::vector<double>> rows);
  std::vector<double> apply(std::span<const double> row) const;
  /// True when every feature had zero variance in the fitted rows.
  bool degenerate() const;
  std::vector<bool> constant;
};

struct OcsvmOptions {
  double nu = 0.5;
  std::optional<double> gamma;  // default 1 / (d * mean feature variance)
  double tolerance = 1e-4;      // stop when the maximal KKT violation drops below this
  std::size_t max_iterations = 10000;
};

/// One-class SVM with an RBF kernel: f(x) = sum_i a_i K(s_i, x) - rho,
/// K(u, v) = exp(-gamma |u - v|^2) on standardized features, with
/// 0 <= a_i <= 1 / (nu n) and sum a_i = 1.
struct OneClassSvm {
  std::vector<std::vector<double>> support_vectors;  // standardized
  std::vector<double> coefficients;
  double rho = 0.0;
  double gamma = 1.0;
  double nu = 0.5;
  Standardization standardization;
  std::size_t iterations = 0;
  double kkt_violation = 0.0;

  /// Throws ArityMismatch when the row width differs from training.
  double decision(std::span<const double> row) const;
  /// Decision >= 0, allowing 1e-10 of rounding slack.
  bool inlier(std::span<const double> row) const;
};

/// Fits the nu-one-class objective by pairwise (SMO) updates with
/// second-order working-set selection. Features are standardized with
/// `standardize_from` when given, otherwise with `rows` themselves.
/// Throws DomainError for fewer than two rows or nu outside (0,1], and
/// DegenerateData when every standardization feature has zero variance.
OneClassSvm train_ocsvm(std::span<const std::vector<double>> rows, const OcsvmOptions& options = {},
                        const Standardization* standardize_from = nullptr);

}  // namespace viewshift
