#pragma once

// Shared statistical test utilities: Kolmogorov-Smirnov tests, simple
// moment helpers, and grid-quadrature CDFs used as sampling oracles.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace testsupport {

inline double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

/// One-sample KS test p-value against a CDF.
inline double ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  const double sqn = std::sqrt(n);
  return kolmogorov_survival((sqn + 0.12 + 0.11 / sqn) * d);
}

/// Two-sample KS test p-value.
inline double ks_test_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  const double ne = static_cast<double>(a.size()) * b.size() / (a.size() + b.size());
  const double sqn = std::sqrt(ne);
  return kolmogorov_survival((sqn + 0.12 + 0.11 / sqn) * d);
}

inline double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / x.size();
}

inline double variance(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / (x.size() - 1);
}

/// Numeric CDF of an unnormalised log density on [lo, hi] via trapezoid
/// quadrature on a fine grid; used as an independent oracle for samplers.
class GridCdf {
public:
  GridCdf(const std::function<double(double)>& log_density, double lo, double hi, int n_points = 20001)
      : lo_(lo), hi_(hi), cdf_(n_points, 0.0) {
    const double h = (hi - lo) / (n_points - 1);
    std::vector<double> logf(n_points);
    double logmax = -1e300;
    for (int i = 0; i < n_points; ++i) {
      logf[i] = log_density(lo + i * h);
      logmax = std::max(logmax, logf[i]);
    }
    std::vector<double> f(n_points);
    for (int i = 0; i < n_points; ++i) f[i] = std::isfinite(logf[i]) ? std::exp(logf[i] - logmax) : 0.0;
    for (int i = 1; i < n_points; ++i) cdf_[i] = cdf_[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
    const double total = cdf_.back();
    if (!(total > 0.0)) throw std::runtime_error("GridCdf: density integrates to zero");
    for (double& c : cdf_) c /= total;
  }

  double operator()(double x) const {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return 1.0;
    const double h = (hi_ - lo_) / (cdf_.size() - 1);
    const double pos = (x - lo_) / h;
    const std::size_t i = std::min(cdf_.size() - 2, static_cast<std::size_t>(pos));
    const double w = pos - i;
    return cdf_[i] * (1.0 - w) + cdf_[i + 1] * w;
  }

private:
  double lo_, hi_;
  std::vector<double> cdf_;
};

/// Thin a chain, keeping every k-th element; tames autocorrelation before KS.
inline std::vector<double> thin(const std::vector<double>& chain, int every) {
  std::vector<double> out;
  out.reserve(chain.size() / every + 1);
  for (std::size_t i = 0; i < chain.size(); i += every) out.push_back(chain[i]);
  return out;
}

}  // namespace testsupport
