#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fluxinv/markov.hpp"
#include "fluxinv/model.hpp"
#include "fluxinv/rng.hpp"
#include "fluxinv/sampler.hpp"
#include "fluxinv/types.hpp"

namespace fluxinv {

/// Data-generating settings for the observing-system simulation experiment.
struct OsseSpec {
  double truth_alpha_var = 0.09;       // variance of the true scaling factors
  Eigen::VectorXd bias_coefficients;   // true bias weights on standardized covariates
  double gamma_true = 1.25;            // variance inflation of the prescribed variances
  double rho_true = 0.8;               // fraction allocated to the correlated component
  double ell_true_minutes = 1.0;       // correlated-error length scale
  int n_replicates = 20;

  OsseSpec() {
    bias_coefficients.resize(3);
    bias_coefficients << 0.3, 0.028, 0.6;
  }

  void validate() const {
    if (!(truth_alpha_var >= 0.0)) throw std::invalid_argument("OsseSpec: negative truth variance");
    if (!(gamma_true >= 0.0)) throw std::invalid_argument("OsseSpec: gamma_true must be non-negative");
    if (!(rho_true >= 0.0 && rho_true <= 1.0)) throw std::invalid_argument("OsseSpec: rho_true must be in [0,1]");
    if (!(ell_true_minutes > 0.0)) throw std::invalid_argument("OsseSpec: ell_true must be positive");
    if (n_replicates < 1) throw std::invalid_argument("OsseSpec: need at least one replicate");
  }
};

/// Draw a full model state from the prior: hyperparameters from their
/// marginals, alpha from its conditional AR(1) prior, beta Gaussian.
inline ModelState draw_prior_state(const InversionModel& model, const SamplerConfig& config, Rng& rng) {
  ModelState s;
  const int rs = model.basis.n_regions;
  const int rt = model.basis.n_periods;
  s.kappa.resize(rs);
  s.tau_w.resize(rs);
  for (int j = 0; j < rs; ++j) {
    const auto& prior = model.priors.regions[j];
    s.kappa[j] = prior.kappa_fixed ? prior.kappa_value : rng.beta(prior.kappa_a, prior.kappa_b);
    s.tau_w[j] =
        prior.tau_w_fixed ? prior.tau_w_value : rng.gamma(prior.tau_w_nu, prior.omega_rate(s.kappa[j]));
  }
  s.alpha = draw_alpha_prior(s.kappa, s.tau_w, rt, rng);
  const double beta_sd = std::sqrt(model.priors.sigma2_beta);
  for (std::size_t g = 0; g < model.groups.size(); ++g) {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(model.groups[g].n_covariates());
    if (config.bias_enabled && model.groups[g].role == GroupRole::Training)
      for (Eigen::Index i = 0; i < beta.size(); ++i) beta[i] = beta_sd * rng.normal();
    s.beta.push_back(beta);
    const auto& ep = model.priors.groups[g];
    ErrorParams e;
    e.gamma = rng.inverse_gamma(ep.gamma_nu, ep.gamma_omega);
    e.rho = config.correlated_enabled ? rng.uniform() : 0.0;
    e.tau_xi = rng.gamma(ep.tau_xi_nu, ep.tau_xi_omega);
    e.ell_minutes = rng.gamma(ep.ell_nu, ep.ell_omega);
    s.error_params.push_back(e);
  }
  return s;
}

/// True scaling factors: alpha^s ~ Gau(0, truth_alpha_var I). The
/// dimension-reduction error is taken to be zero.
inline Eigen::VectorXd generate_truth(const OsseSpec& spec, const BasisLibrary& basis, Rng& rng) {
  const double sd = std::sqrt(spec.truth_alpha_var);
  Eigen::VectorXd alpha(basis.size());
  for (Eigen::Index j = 0; j < alpha.size(); ++j) alpha[j] = sd * rng.normal();
  return alpha;
}

/// Draw observations for one group from the data model
/// z = prior_mean + Psi alpha + A beta + xi + eps at the given parameters.
inline Eigen::VectorXd simulate_group_values(const ObservationGroup& group, const Eigen::VectorXd& alpha,
                                             const Eigen::VectorXd& beta, const ErrorParams& params,
                                             Rng& rng, bool correlated = true) {
  Eigen::VectorXd z = predicted_mean(group, alpha, beta);
  if (params.gamma == 0.0) return z;  // degenerate noise-free simulation
  const ErrorVariances v = error_variances(group, params, correlated);
  if (v.xi_var.size() > 0) z += sample_xi(group.times, params.ell_minutes, v.xi_var, rng);
  if (v.eps_var.size() > 0)
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] += rng.normal() * std::sqrt(v.eps_var[i]);
  return z;
}

/// Simulate every group's observations in place from the OSSE truth.
inline void simulate_observations(const OsseSpec& spec, const Eigen::VectorXd& alpha_true,
                                  std::vector<ObservationGroup>& groups, Rng& rng) {
  spec.validate();
  ErrorParams truth;
  truth.gamma = spec.gamma_true;
  truth.rho = spec.rho_true;
  truth.ell_minutes = spec.ell_true_minutes;
  for (auto& group : groups) {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(group.n_covariates());
    const Eigen::Index p = std::min<Eigen::Index>(beta.size(), spec.bias_coefficients.size());
    beta.head(p) = spec.bias_coefficients.head(p);
    group.values = simulate_group_values(group, alpha_true, beta, truth, rng);
  }
}

/// The four model configurations: bias correction on/off crossed with
/// correlated errors on/off. Bias-off fixes beta at zero; correlated-off
/// fixes rho at zero while the inflation factor is still sampled.
struct OsseConfiguration {
  bool bias_on = true;
  bool correlated_on = true;

  const char* name() const {
    if (bias_on && correlated_on) return "bias_correlated";
    if (bias_on) return "bias_uncorrelated";
    if (correlated_on) return "nobias_correlated";
    return "nobias_uncorrelated";
  }
};

inline std::array<OsseConfiguration, 4> osse_configurations() {
  return {OsseConfiguration{true, true}, OsseConfiguration{true, false}, OsseConfiguration{false, true},
          OsseConfiguration{false, false}};
}

inline ChainOutput run_configuration(const InversionModel& model, const SamplerConfig& base,
                                     const OsseConfiguration& which, std::uint64_t seed,
                                     const std::string& config_hash = std::string()) {
  SamplerConfig config = base;
  config.bias_enabled = which.bias_on;
  config.correlated_enabled = which.correlated_on;
  config.seed = seed;
  return run_chain(model, config, config_hash);
}

/// Flux value of every region-period cell implied by one draw of the
/// scaling factors: prior integral plus alpha times the basis integral.
inline Eigen::VectorXd flux_cells(const Eigen::VectorXd& alpha, const BasisLibrary& basis) {
  return basis.prior_flux_integrals + alpha.cwiseProduct(basis.flux_integrals);
}

/// RMSE of the posterior-mean region-period fluxes against the truth.
inline double score_rmse(const ChainOutput& chain, const Eigen::VectorXd& alpha_true,
                         const BasisLibrary& basis) {
  if (chain.samples.empty()) throw std::invalid_argument("score_rmse: empty chain");
  Eigen::VectorXd mean_flux = Eigen::VectorXd::Zero(basis.size());
  for (const auto& s : chain.samples) mean_flux += flux_cells(s.alpha, basis);
  mean_flux /= static_cast<double>(chain.samples.size());
  const Eigen::VectorXd truth = flux_cells(alpha_true, basis);
  return std::sqrt((mean_flux - truth).squaredNorm() / basis.size());
}

/// Sample-based CRPS estimator for one cell:
/// mean_i |x_i - y| - mean_{i,i'} |x_i - x_{i'}| / 2, evaluated with the
/// O(S log S) sorted form of the second term.
inline double crps_from_samples(std::vector<double> samples, double truth) {
  if (samples.size() < 2) throw std::invalid_argument("crps_from_samples: need at least two samples");
  const double n = static_cast<double>(samples.size());
  double first = 0.0;
  for (double x : samples) first += std::abs(x - truth);
  first /= n;
  std::sort(samples.begin(), samples.end());
  double pair_sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    pair_sum += (2.0 * (static_cast<double>(i) + 1.0) - 1.0 - n) * samples[i];
  return first - pair_sum / (n * n);
}

/// CRPS of the region-period fluxes against the truth, averaged over cells.
inline double score_crps(const ChainOutput& chain, const Eigen::VectorXd& alpha_true,
                         const BasisLibrary& basis) {
  const Eigen::VectorXd truth = flux_cells(alpha_true, basis);
  const std::size_t n_samples = chain.samples.size();
  double total = 0.0;
  std::vector<double> cell(n_samples);
  for (int c = 0; c < basis.size(); ++c) {
    for (std::size_t s = 0; s < n_samples; ++s)
      cell[s] = basis.prior_flux_integrals[c] + chain.samples[s].alpha[c] * basis.flux_integrals[c];
    total += crps_from_samples(cell, truth[c]);
  }
  return total / basis.size();
}

/// Nearest-rank quantile of a sample vector (sorted copy).
inline double nearest_rank_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("nearest_rank_quantile: empty sample");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("nearest_rank_quantile: p must be in (0,1]");
  std::sort(values.begin(), values.end());
  const std::size_t rank = static_cast<std::size_t>(std::ceil(p * values.size()));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

/// Per-cell interval coverage and width of the 95% flux intervals.
struct IntervalScore {
  double coverage = 0.0;    // fraction of cells whose interval contains the truth
  double mean_width = 0.0;  // average interval width over cells
};

inline IntervalScore score_intervals(const ChainOutput& chain, const Eigen::VectorXd& alpha_true,
                                     const BasisLibrary& basis) {
  const Eigen::VectorXd truth = flux_cells(alpha_true, basis);
  IntervalScore out;
  std::vector<double> cell(chain.samples.size());
  for (int c = 0; c < basis.size(); ++c) {
    for (std::size_t s = 0; s < chain.samples.size(); ++s)
      cell[s] = basis.prior_flux_integrals[c] + chain.samples[s].alpha[c] * basis.flux_integrals[c];
    const double lo = nearest_rank_quantile(cell, 0.025);
    const double hi = nearest_rank_quantile(cell, 0.975);
    if (truth[c] >= lo && truth[c] <= hi) out.coverage += 1.0;
    out.mean_width += hi - lo;
  }
  out.coverage /= basis.size();
  out.mean_width /= basis.size();
  return out;
}

}  // namespace fluxinv
