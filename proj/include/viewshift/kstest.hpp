#pragma once

#include <cstddef>
#include <span>

namespace viewshift {

/// Outcome of a two-sample Kolmogorov-Smirnov test.
struct KsResult {
  double d = 0.0;  // sup |F_a - F_b|
  double p = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  bool significant = false;  // p <= alpha
};

inline constexpr double kDefaultAlpha = 0.05;

/// Two-sample KS statistic over right-continuous empirical CDFs. Ties are
/// handled exactly. Throws EmptySample when either sample is empty.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// Same statistic for inputs already sorted ascending; O(n1 + n2).
double ks_statistic_sorted(std::span<const double> a, std::span<const double> b);

/// Asymptotic p-value Q(lambda) with lambda = (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) * d
/// and ne = n1*n2/(n1+n2). Throws DomainError for d outside [0,1] or empty sizes.
double ks_pvalue(double d, std::size_t n1, std::size_t n2);

/// Kolmogorov tail Q(lambda) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

KsResult ks_test(std::span<const double> a, std::span<const double> b, double alpha = kDefaultAlpha);

/// Test on pre-sorted samples.
KsResult ks_test_sorted(std::span<const double> a, std::span<const double> b, double alpha = kDefaultAlpha);

}  // namespace viewshift
