#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fluxinv/rng.hpp"
#include "fluxinv/tridiag.hpp"
#include "fluxinv/types.hpp"

namespace fluxinv {

/// Scale each covariate column to unit empirical variance (population divisor,
/// no centering). Returns the scaled matrix and the per-column scale factors,
/// which map coefficients back to raw-covariate units.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> standardize_covariates(const Eigen::MatrixXd& raw) {
  Eigen::MatrixXd out = raw;
  Eigen::VectorXd scales(raw.cols());
  const double m = static_cast<double>(raw.rows());
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const double mean = raw.col(j).mean();
    const double var = (raw.col(j).array() - mean).square().sum() / m;
    if (!(var > 0.0))
      throw std::invalid_argument("standardize_covariates: column " + std::to_string(j) +
                                  " has zero empirical variance");
    scales[j] = std::sqrt(var);
    out.col(j) /= scales[j];
  }
  return {std::move(out), std::move(scales)};
}

/// Data-model mean for one group: prior_mean + response_rows * alpha + covariates * beta.
inline Eigen::VectorXd predicted_mean(const ObservationGroup& group, const Eigen::VectorXd& alpha,
                                      const Eigen::VectorXd& beta) {
  if (group.response_rows.cols() != alpha.size())
    throw std::invalid_argument("predicted_mean: alpha length does not match response columns");
  if (beta.size() != group.covariates.cols())
    throw std::invalid_argument("predicted_mean: beta length does not match covariate columns");
  Eigen::VectorXd mean = group.prior_mean + group.response_rows * alpha;
  if (beta.size() > 0) mean += group.covariates * beta;
  return mean;
}

inline std::vector<Eigen::VectorXd> predicted_mean(const ModelState& state,
                                                   const std::vector<ObservationGroup>& groups) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g)
    out.push_back(predicted_mean(groups[g], state.alpha, state.beta[g]));
  return out;
}

/// Symmetric tridiagonal bands of one region's AR(1) structure matrix
/// Q(kappa): corner diagonal entries 1, interior entries 1 + kappa^2,
/// off-diagonal -kappa. The region's prior precision block is tau_w * Q.
struct RegionPrecision {
  Eigen::VectorXd diag;
  Eigen::VectorXd subdiag;
};

inline RegionPrecision ar1_structure(double kappa, int n_periods) {
  if (!(std::abs(kappa) < 1.0)) throw std::invalid_argument("ar1_structure: |kappa| must be < 1");
  RegionPrecision q;
  q.diag = Eigen::VectorXd::Constant(n_periods, 1.0 + kappa * kappa);
  q.diag[0] = 1.0;
  q.diag[n_periods - 1] = 1.0;
  q.subdiag = Eigen::VectorXd::Constant(std::max(0, n_periods - 1), -kappa);
  return q;
}

/// log |Q(kappa)| in closed form; equals the tridiagonal Cholesky log-determinant.
inline double ar1_structure_log_det(double kappa, int n_periods) {
  if (!(std::abs(kappa) < 1.0)) throw std::invalid_argument("ar1_structure_log_det: |kappa| must be < 1");
  return n_periods >= 2 ? std::log1p(-kappa * kappa) : 0.0;
}

/// alpha' (tau Q) alpha for one region's slice of the scaling factors.
inline double ar1_quadratic_form(double kappa, double tau_w,
                                 const Eigen::Ref<const Eigen::VectorXd>& alpha_region) {
  const Eigen::Index n = alpha_region.size();
  double q = alpha_region.squaredNorm();
  if (n >= 2) {
    q += kappa * kappa * alpha_region.segment(1, n - 2).squaredNorm();
    for (Eigen::Index k = 0; k + 1 < n; ++k) q -= 2.0 * kappa * alpha_region[k] * alpha_region[k + 1];
  }
  return tau_w * q;
}

/// Block-diagonal prior precision of alpha over all regions, region-major.
struct AlphaPrecision {
  std::vector<RegionPrecision> blocks;  // scaled by tau_w
  int n_periods = 0;

  Eigen::MatrixXd dense() const {
    const int r = static_cast<int>(blocks.size()) * n_periods;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(r, r);
    for (std::size_t j = 0; j < blocks.size(); ++j) {
      const int off = static_cast<int>(j) * n_periods;
      out.block(off, off, n_periods, n_periods) = tridiag_dense(blocks[j].diag, blocks[j].subdiag);
    }
    return out;
  }
};

inline AlphaPrecision alpha_prior_precision(const Eigen::VectorXd& kappa, const Eigen::VectorXd& tau_w,
                                            int n_periods) {
  if (kappa.size() != tau_w.size())
    throw std::invalid_argument("alpha_prior_precision: kappa/tau_w length mismatch");
  AlphaPrecision p;
  p.n_periods = n_periods;
  p.blocks.reserve(kappa.size());
  for (Eigen::Index j = 0; j < kappa.size(); ++j) {
    if (!(tau_w[j] > 0.0)) throw std::invalid_argument("alpha_prior_precision: tau_w must be positive");
    RegionPrecision q = ar1_structure(kappa[j], n_periods);
    q.diag *= tau_w[j];
    q.subdiag *= tau_w[j];
    p.blocks.push_back(std::move(q));
  }
  return p;
}

/// Draw alpha from its prior: per region a stationary AR(1) with innovation
/// precision tau_w and marginal variance 1 / (tau_w (1 - kappa^2)).
inline Eigen::VectorXd draw_alpha_prior(const Eigen::VectorXd& kappa, const Eigen::VectorXd& tau_w,
                                        int n_periods, Rng& rng) {
  Eigen::VectorXd alpha(kappa.size() * n_periods);
  for (Eigen::Index j = 0; j < kappa.size(); ++j) {
    const double k = kappa[j];
    const double innov_sd = 1.0 / std::sqrt(tau_w[j]);
    double x = rng.normal() * innov_sd / std::sqrt(1.0 - k * k);
    alpha[j * n_periods] = x;
    for (int t = 1; t < n_periods; ++t) {
      x = k * x + rng.normal() * innov_sd;
      alpha[j * n_periods + t] = x;
    }
  }
  return alpha;
}

}  // namespace fluxinv
