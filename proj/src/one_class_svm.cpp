#include "viewshift/one_class_svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "viewshift/errors.hpp"

namespace viewshift {

Standardization Standardization::fit(std::span<const std::vector<double>> rows) {
  if (rows.empty()) throw EmptyDataset("cannot standardize zero rows");
  const std::size_t d = rows.front().size();
  Standardization s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 1.0);
  s.constant.assign(d, true);
  for (const auto& r : rows) {
    if (r.size() != d) throw ArityMismatch("ragged rows");
    for (std::size_t f = 0; f < d; ++f) s.mean[f] += r[f];
  }
  const double n = static_cast<double>(rows.size());
  for (auto& m : s.mean) m /= n;
  std::vector<double> var(d, 0.0);
  for (const auto& r : rows) {
    for (std::size_t f = 0; f < d; ++f) var[f] += (r[f] - s.mean[f]) * (r[f] - s.mean[f]);
  }
  for (std::size_t f = 0; f < d; ++f) {
    const double sd = std::sqrt(var[f] / n);
    if (sd > 0.0) {
      s.scale[f] = sd;
      s.constant[f] = false;
    }
  }
  return s;
}

std::vector<double> Standardization::apply(std::span<const double> row) const {
  if (row.size() != mean.size()) throw ArityMismatch("row width differs from standardization");
  std::vector<double> out(row.size());
  for (std::size_t f = 0; f < row.size(); ++f) out[f] = (row[f] - mean[f]) / scale[f];
  return out;
}

bool Standardization::degenerate() const {
  return std::all_of(constant.begin(), constant.end(), [](bool c) { return c; });
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

class Kernel {
 public:
  Kernel(const std::vector<std::vector<double>>& x, double gamma) : x_(x), gamma_(gamma) {
    const std::size_t n = x.size();
    if (n <= kCacheLimit) {
      full_.resize(n * n);
      for (std::size_t i = 0; i < n; ++i) {
        full_[i * n + i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
          full_[i * n + j] = full_[j * n + i] = value(i, j);
        }
      }
    }
  }

  double value(std::size_t i, std::size_t j) const { return std::exp(-gamma_ * squared_distance(x_[i], x_[j])); }

  std::span<const double> row(std::size_t i, std::vector<double>& scratch) const {
    const std::size_t n = x_.size();
    if (!full_.empty()) return {full_.data() + i * n, n};
    scratch.resize(n);
    for (std::size_t j = 0; j < n; ++j) scratch[j] = i == j ? 1.0 : value(i, j);
    return scratch;
  }

 private:
  static constexpr std::size_t kCacheLimit = 2500;
  const std::vector<std::vector<double>>& x_;
  double gamma_;
  std::vector<double> full_;
};

}  // namespace

double OneClassSvm::decision(std::span<const double> row) const {
  const auto z = standardization.apply(row);
  double sum = 0.0;
  for (std::size_t i = 0; i < support_vectors.size(); ++i) {
    sum += coefficients[i] * std::exp(-gamma * squared_distance(support_vectors[i], z));
  }
  return sum - rho;
}

bool OneClassSvm::inlier(std::span<const double> row) const { return decision(row) >= -1e-10; }

OneClassSvm train_ocsvm(std::span<const std::vector<double>> rows, const OcsvmOptions& options,
                        const Standardization* standardize_from) {
  if (rows.size() < 2) throw DomainError("one-class SVM needs at least two rows");
  if (!(options.nu > 0.0 && options.nu <= 1.0)) throw DomainError("nu must lie in (0,1]");

  OneClassSvm model;
  model.nu = options.nu;
  model.standardization = standardize_from ? *standardize_from : Standardization::fit(rows);
  if (model.standardization.degenerate()) throw DegenerateData("every feature has zero variance");

  const std::size_t n = rows.size();
  std::vector<std::vector<double>> x;
  x.reserve(n);
  for (const auto& r : rows) x.push_back(model.standardization.apply(r));
  const std::size_t d = x.front().size();

  if (options.gamma) {
    if (!(*options.gamma > 0.0)) throw DomainError("gamma must be positive");
    model.gamma = *options.gamma;
  } else {
    double total_var = 0.0;
    for (std::size_t f = 0; f < d; ++f) {
      double m = 0.0;
      for (const auto& r : x) m += r[f];
      m /= static_cast<double>(n);
      double v = 0.0;
      for (const auto& r : x) v += (r[f] - m) * (r[f] - m);
      total_var += v / static_cast<double>(n);
    }
    const double mean_var = total_var / static_cast<double>(d);
    model.gamma = mean_var > 0.0 ? 1.0 / (static_cast<double>(d) * mean_var) : 1.0 / static_cast<double>(d);
  }

  const double upper = 1.0 / (options.nu * static_cast<double>(n));
  std::vector<double> alpha(n, 0.0);
  {
    double remaining = 1.0;
    for (std::size_t i = 0; i < n && remaining > 0.0; ++i) {
      alpha[i] = std::min(upper, remaining);
      remaining -= alpha[i];
      if (remaining < 1e-15) remaining = 0.0;
    }
  }

  const Kernel kernel(x, model.gamma);
  std::vector<double> scratch_i, scratch_j;
  std::vector<double> grad(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (alpha[j] == 0.0) continue;
    const auto kj = kernel.row(j, scratch_j);
    for (std::size_t t = 0; t < n; ++t) grad[t] += alpha[j] * kj[t];
  }

  constexpr double kTau = 1e-12;
  auto below_upper = [&](std::size_t t) { return alpha[t] < upper; };
  auto above_zero = [&](std::size_t t) { return alpha[t] > 0.0; };

  std::size_t iter = 0;
  double violation = 0.0;
  for (;; ++iter) {
    // i maximizes -G over I_up; the violation is max_{I_up} -G - min_{I_low} -G.
    std::size_t i = n;
    double gmax = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (below_upper(t) && -grad[t] > gmax) {
        gmax = -grad[t];
        i = t;
      }
    }
    double gmin = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (above_zero(t)) gmin = std::min(gmin, -grad[t]);
    }
    violation = i == n ? 0.0 : gmax - gmin;
    if (violation < options.tolerance || iter >= options.max_iterations) break;

    const auto ki = kernel.row(i, scratch_i);
    std::size_t j = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (!above_zero(t)) continue;
      const double b = gmax + grad[t];  // = G_t - G_i
      if (b <= 0.0) continue;
      const double a = std::max(2.0 - 2.0 * ki[t], kTau);
      const double score = -(b * b) / a;
      if (score < best) {
        best = score;
        j = t;
      }
    }
    if (j == n) break;

    const double eta = std::max(2.0 - 2.0 * ki[j], kTau);
    double delta = (grad[j] - grad[i]) / eta;
    delta = std::min({delta, upper - alpha[i], alpha[j]});
    if (delta <= 0.0) break;
    alpha[i] += delta;
    alpha[j] -= delta;
    if (upper - alpha[i] < 1e-15) alpha[i] = upper;
    if (alpha[j] < 1e-15) alpha[j] = 0.0;
    const auto kj = kernel.row(j, scratch_j);
    for (std::size_t t = 0; t < n; ++t) grad[t] += delta * (ki[t] - kj[t]);
  }
  model.iterations = iter;
  model.kkt_violation = violation;

  // rho from free vectors, else the midpoint of the feasible interval.
  double free_sum = 0.0;
  std::size_t free_count = 0;
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] >= upper) {
      lb = std::max(lb, grad[t]);
    } else if (alpha[t] <= 0.0) {
      ub = std::min(ub, grad[t]);
    } else {
      free_sum += grad[t];
      ++free_count;
    }
  }
  if (free_count > 0) {
    model.rho = free_sum / static_cast<double>(free_count);
  } else if (std::isfinite(ub) && std::isfinite(lb)) {
    model.rho = (ub + lb) / 2.0;
  } else {
    model.rho = std::isfinite(ub) ? ub : lb;
  }

  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      model.support_vectors.push_back(std::move(x[t]));
      model.coefficients.push_back(alpha[t]);
    }
  }
  return model;
}

}  // namespace viewshift
