#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fluxinv/osse.hpp"
#include "fluxinv/sampler.hpp"
#include "fluxinv/types.hpp"

namespace fluxinv {

/// A set of region-period cells to aggregate over.
struct FluxScope {
  std::vector<int> regions;
  std::vector<int> periods;
};

/// Posterior summary of the total flux over a scope.
struct FluxAggregate {
  std::vector<double> samples;  // per-sample totals, PgC per period set
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
};

/// Per-sample total flux over the scope: sum of prior integrals plus the
/// scaled basis integrals. Quantiles are nearest-rank on sorted samples.
inline FluxAggregate aggregate_flux(const ChainOutput& chain, const BasisLibrary& basis,
                                    const FluxScope& scope) {
  if (scope.regions.empty() || scope.periods.empty())
    throw std::invalid_argument("aggregate_flux: empty scope");
  for (int j : scope.regions)
    if (j < 0 || j >= basis.n_regions) throw std::invalid_argument("aggregate_flux: region out of range");
  for (int k : scope.periods)
    if (k < 0 || k >= basis.n_periods) throw std::invalid_argument("aggregate_flux: period out of range");

  FluxAggregate out;
  out.samples.reserve(chain.samples.size());
  for (const auto& state : chain.samples) {
    double total = 0.0;
    for (int j : scope.regions)
      for (int k : scope.periods) {
        const int c = basis.column(j, k);
        total += basis.prior_flux_integrals[c] + state.alpha[c] * basis.flux_integrals[c];
      }
    out.samples.push_back(total);
  }

  const double n = static_cast<double>(out.samples.size());
  for (double v : out.samples) out.mean += v;
  out.mean /= n;
  for (double v : out.samples) out.sd += (v - out.mean) * (v - out.mean);
  out.sd = n > 1 ? std::sqrt(out.sd / (n - 1)) : 0.0;
  out.q025 = nearest_rank_quantile(out.samples, 0.025);
  out.q975 = nearest_rank_quantile(out.samples, 0.975);
  return out;
}

/// Holdout-group predictive distribution. Per posterior sample the mean
/// prediction is prior_mean + response * alpha (the holdout bias is zero);
/// the group's error is treated as fully correlated with a single variance
/// equal to the average of the reported variances. Intervals integrate the
/// Gaussian error analytically per sample (a Gaussian-mixture CDF).
struct HoldoutPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd lower;  // 2.5%
  Eigen::VectorXd upper;  // 97.5%
  double error_sd = 0.0;
};

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double mixture_quantile(const std::vector<double>& means, double sd, double p) {
  double lo = means[0], hi = means[0];
  for (double m : means) {
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  lo -= 10.0 * sd + 1e-12;
  hi += 10.0 * sd + 1e-12;
  auto cdf = [&](double z) {
    double acc = 0.0;
    for (double m : means) acc += normal_cdf((z - m) / sd);
    return acc / means.size();
  };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

inline HoldoutPrediction predict_holdout(const ChainOutput& chain, const ObservationGroup& holdout) {
  if (chain.samples.empty()) throw std::invalid_argument("predict_holdout: empty chain");
  if (holdout.response_rows.size() == 0)
    throw std::invalid_argument("predict_holdout: holdout group has no response rows");

  const Eigen::Index m = holdout.size();
  const std::size_t n_samples = chain.samples.size();
  HoldoutPrediction out;
  out.error_sd = std::sqrt(holdout.prescribed_var.mean());
  out.mean = Eigen::VectorXd::Zero(m);
  out.lower.resize(m);
  out.upper.resize(m);

  Eigen::MatrixXd sample_means(m, n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    sample_means.col(s) = holdout.prior_mean + holdout.response_rows * chain.samples[s].alpha;
    out.mean += sample_means.col(s);
  }
  out.mean /= static_cast<double>(n_samples);

  std::vector<double> means(n_samples);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (std::size_t s = 0; s < n_samples; ++s) means[s] = sample_means(i, s);
    out.lower[i] = detail::mixture_quantile(means, out.error_sd, 0.025);
    out.upper[i] = detail::mixture_quantile(means, out.error_sd, 0.975);
  }
  return out;
}

/// Mean and standard deviation of the prediction errors, and their MSE.
struct PredictionErrorStats {
  double mean_error = 0.0;
  double sd_error = 0.0;
  double mse = 0.0;
};

inline PredictionErrorStats prediction_error_stats(const Eigen::VectorXd& predicted,
                                                   const Eigen::VectorXd& observed) {
  if (predicted.size() != observed.size() || predicted.size() == 0)
    throw std::invalid_argument("prediction_error_stats: size mismatch");
  const Eigen::VectorXd err = observed - predicted;
  PredictionErrorStats s;
  s.mean_error = err.mean();
  s.mse = err.squaredNorm() / err.size();
  const double n = static_cast<double>(err.size());
  s.sd_error = n > 1 ? std::sqrt((err.array() - s.mean_error).square().sum() / (n - 1)) : 0.0;
  return s;
}

/// Scalar-chain diagnostics. The effective sample size uses the initial
/// positive sequence of paired autocorrelations, truncated at the first
/// negative pair.
struct ChainDiagnostics {
  double ess = 0.0;
  bool degenerate = false;  // zero-variance chain, ESS undefined
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q500 = 0.0;
  double q975 = 0.0;
};

inline ChainDiagnostics chain_diagnostics(const std::vector<double>& series) {
  if (series.size() < 2) throw std::invalid_argument("chain_diagnostics: series too short");
  ChainDiagnostics d;
  const double n = static_cast<double>(series.size());
  for (double v : series) d.mean += v;
  d.mean /= n;
  double var = 0.0;
  for (double v : series) var += (v - d.mean) * (v - d.mean);
  var /= n;
  d.sd = std::sqrt(var * n / (n - 1.0));
  d.q025 = nearest_rank_quantile(series, 0.025);
  d.q500 = nearest_rank_quantile(series, 0.5);
  d.q975 = nearest_rank_quantile(series, 0.975);

  if (!(var > 1e-28 * std::max(1.0, d.mean * d.mean))) {
    d.degenerate = true;
    return d;
  }

  auto autocorr = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < series.size(); ++i)
      acc += (series[i] - d.mean) * (series[i + lag] - d.mean);
    return acc / (n * var);
  };

  double rho_sum = 0.0;
  for (std::size_t k = 1; k + 1 < series.size(); k += 2) {
    const double pair = autocorr(k) + autocorr(k + 1);
    if (pair < 0.0) break;
    rho_sum += pair;
  }
  d.ess = n / (1.0 + 2.0 * rho_sum);
  return d;
}

}  // namespace fluxinv
