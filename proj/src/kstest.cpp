#include "viewshift/kstest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "viewshift/errors.hpp"

namespace viewshift {

double ks_statistic_sorted(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw EmptySample("KS test needs two non-empty samples");
  const auto n = static_cast<long long>(a.size());
  const auto m = static_cast<long long>(b.size());
  long long i = 0;
  long long j = 0;
  // Track |i*m - j*n| in integers so equal ECDFs compare exactly.
  long long best = 0;
  while (i < n && j < m) {
    const double x = std::min(a[i], b[j]);
    while (i < n && a[i] == x) ++i;
    while (j < m && b[j] == x) ++j;
    best = std::max(best, std::llabs(i * m - j * n));
  }
  return static_cast<double>(best) / static_cast<double>(n * m);
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw EmptySample("KS test needs two non-empty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return ks_statistic_sorted(sa, sb);
}

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  const double a2 = -2.0 * lambda * lambda;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * std::exp(a2 * k * k);
    sum += term;
    if (std::fabs(term) < 1e-12) return std::clamp(2.0 * sum, 0.0, 1.0);
    sign = -sign;
  }
  // Only reached for lambda below ~0.04, where Q is 1 to double precision.
  return 1.0;
}

double ks_pvalue(double d, std::size_t n1, std::size_t n2) {
  if (!(d >= 0.0 && d <= 1.0)) throw DomainError("KS statistic outside [0,1]");
  if (n1 == 0 || n2 == 0) throw DomainError("KS sample sizes must be positive");
  if (d == 0.0) return 1.0;
  const double ne = static_cast<double>(n1) * static_cast<double>(n2) / static_cast<double>(n1 + n2);
  const double root = std::sqrt(ne);
  return kolmogorov_q((root + 0.12 + 0.11 / root) * d);
}

KsResult ks_test_sorted(std::span<const double> a, std::span<const double> b, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  KsResult r;
  r.n1 = a.size();
  r.n2 = b.size();
  r.d = ks_statistic_sorted(a, b);
  r.p = ks_pvalue(r.d, r.n1, r.n2);
  r.significant = r.p <= alpha;
  return r;
}

KsResult ks_test(std::span<const double> a, std::span<const double> b, double alpha) {
  if (a.empty() || b.empty()) throw EmptySample("KS test needs two non-empty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return ks_test_sorted(sa, sb, alpha);
}

}  // namespace viewshift
