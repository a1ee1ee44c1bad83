#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fluxinv/markov.hpp"
#include "fluxinv/model.hpp"
#include "fluxinv/rng.hpp"
#include "fluxinv/slice.hpp"
#include "fluxinv/types.hpp"

namespace fluxinv {

struct SamplerConfig {
  int n_iterations = 11000;
  int n_burn_in = 1000;
  std::uint64_t seed = 1;

  // Slice-sampler step widths. Positive and bounded parameters are updated on
  // transformed scales (log for gamma/ell/tau_xi, logit for kappa/rho) with
  // the Jacobian folded into the target.
  double kappa_slice_width = 1.5;
  double gamma_slice_width = 1.0;
  double rho_slice_width = 1.5;
  double ell_slice_width = 1.0;
  double tau_xi_slice_width = 1.0;
  int max_slice_steps = 50;

  bool bias_enabled = true;
  bool correlated_enabled = true;
  // Reproduce the plug-in kappa conditional (no p(tau_w | kappa) factor) even
  // when the tau_w prior rate is declared as a function of kappa.
  bool plug_in_omega = false;

  // Per-parameter free flags for the error model; fixed parameters keep their
  // current values. kappa and tau_w are fixed per region through the priors.
  bool sample_gamma = true;
  bool sample_rho_or_tau_xi = true;
  bool sample_ell = true;

  int progress_every = 0;  // iterations between progress lines; 0 disables

  void validate() const {
    if (n_iterations <= 0 || n_burn_in < 0 || n_burn_in >= n_iterations)
      throw std::invalid_argument("SamplerConfig: need 0 <= burn-in < iterations");
    if (!(kappa_slice_width > 0 && gamma_slice_width > 0 && rho_slice_width > 0 && ell_slice_width > 0 &&
          tau_xi_slice_width > 0))
      throw std::invalid_argument("SamplerConfig: slice widths must be positive");
    if (max_slice_steps < 1) throw std::invalid_argument("SamplerConfig: max_slice_steps must be >= 1");
  }
};

struct ChainOutput {
  std::vector<ModelState> samples;  // post burn-in states, in order
  std::uint64_t seed = 0;
  std::string config_hash;
  int n_iterations = 0;
  int n_burn_in = 0;
  long long density_evaluations = 0;  // slice-sampler target evaluations
};

/// Everything an inversion needs: basis metadata, observation groups, priors.
struct InversionModel {
  BasisLibrary basis;
  std::vector<ObservationGroup> groups;
  Priors priors;

  void validate() const {
    basis.validate();
    priors.validate();
    if (priors.regions.size() != static_cast<std::size_t>(basis.n_regions))
      throw std::invalid_argument("InversionModel: one alpha prior per region required");
    if (priors.groups.size() != groups.size())
      throw std::invalid_argument("InversionModel: one error prior per group required");
    for (const auto& g : groups) {
      g.validate();
      if (g.size() > 0 && g.response_rows.cols() != basis.size())
        throw std::invalid_argument("InversionModel: group response width != r");
    }
  }

  bool has_training_group() const {
    for (const auto& g : groups)
      if (g.role == GroupRole::Training) return true;
    return false;
  }
};

inline ModelState initial_state(const InversionModel& model, const SamplerConfig& config) {
  const auto& basis = model.basis;
  ModelState s;
  s.alpha = Eigen::VectorXd::Zero(basis.size());
  s.kappa.resize(basis.n_regions);
  s.tau_w.resize(basis.n_regions);
  for (int j = 0; j < basis.n_regions; ++j) {
    const auto& prior = model.priors.regions[j];
    s.kappa[j] = prior.kappa_fixed ? prior.kappa_value : prior.kappa_a / (prior.kappa_a + prior.kappa_b);
    s.tau_w[j] =
        prior.tau_w_fixed ? prior.tau_w_value : prior.tau_w_nu / prior.omega_rate(s.kappa[j]);
  }
  s.beta.reserve(model.groups.size());
  s.error_params.reserve(model.groups.size());
  for (std::size_t g = 0; g < model.groups.size(); ++g) {
    s.beta.push_back(Eigen::VectorXd::Zero(model.groups[g].n_covariates()));
    ErrorParams e;
    e.gamma = 1.0;
    e.rho = config.correlated_enabled ? 0.5 : 0.0;
    const auto& ep = model.priors.groups[g];
    e.tau_xi = ep.tau_xi_nu / ep.tau_xi_omega;
    e.ell_minutes = ep.ell_nu / ep.ell_omega;
    s.error_params.push_back(e);
  }
  return s;
}

/// Gaussian full conditional of the stacked vector x = (alpha', beta')'. The
/// precision is B' Sigma_g^{-1} B summed over training groups plus the prior
/// precision, with the Sigma_g^{-1} applications done by the O(m) group
/// solvers; the small dense system is factored by Cholesky.
struct AlphaBetaConditional {
  Eigen::MatrixXd precision;
  Eigen::VectorXd rhs;
  std::vector<int> beta_offset;  // -1 for groups whose beta is not sampled

  Eigen::VectorXd mean() const { return precision.llt().solve(rhs); }
};

inline AlphaBetaConditional alpha_beta_conditional(const ModelState& state, const InversionModel& model,
                                                   const SamplerConfig& config) {
  const int r = model.basis.size();
  AlphaBetaConditional cond;
  cond.beta_offset.assign(model.groups.size(), -1);
  int dim = r;
  for (std::size_t g = 0; g < model.groups.size(); ++g) {
    const auto& group = model.groups[g];
    if (config.bias_enabled && group.role == GroupRole::Training && group.n_covariates() > 0) {
      cond.beta_offset[g] = dim;
      dim += static_cast<int>(group.n_covariates());
    }
  }

  cond.precision = Eigen::MatrixXd::Zero(dim, dim);
  cond.rhs = Eigen::VectorXd::Zero(dim);

  const AlphaPrecision prior_prec = alpha_prior_precision(state.kappa, state.tau_w, model.basis.n_periods);
  for (int j = 0; j < model.basis.n_regions; ++j) {
    const auto& block = prior_prec.blocks[j];
    const int off = j * model.basis.n_periods;
    for (int t = 0; t < model.basis.n_periods; ++t) {
      cond.precision(off + t, off + t) += block.diag[t];
      if (t + 1 < model.basis.n_periods) {
        cond.precision(off + t, off + t + 1) += block.subdiag[t];
        cond.precision(off + t + 1, off + t) += block.subdiag[t];
      }
    }
  }
  for (int i = r; i < dim; ++i) cond.precision(i, i) += 1.0 / model.priors.sigma2_beta;

  for (std::size_t g = 0; g < model.groups.size(); ++g) {
    const auto& group = model.groups[g];
    if (group.role != GroupRole::Training || group.size() == 0) continue;
    const int p = cond.beta_offset[g] >= 0 ? static_cast<int>(group.n_covariates()) : 0;

    Eigen::MatrixXd design(group.size(), r + p);
    design.leftCols(r) = group.response_rows;
    if (p > 0) design.rightCols(p) = group.covariates;

    const GroupSolver solver = make_group_solver(group, state.error_params[g], config.correlated_enabled);
    const Eigen::MatrixXd weighted = solver.solve(design);
    const Eigen::MatrixXd gram = design.transpose() * weighted;
    const Eigen::VectorXd info = weighted.transpose() * (group.values - group.prior_mean);

    cond.precision.topLeftCorner(r, r) += gram.topLeftCorner(r, r);
    cond.rhs.head(r) += info.head(r);
    if (p > 0) {
      const int off = cond.beta_offset[g];
      cond.precision.block(0, off, r, p) += gram.topRightCorner(r, p);
      cond.precision.block(off, 0, p, r) += gram.bottomLeftCorner(p, r);
      cond.precision.block(off, off, p, p) += gram.bottomRightCorner(p, p);
      cond.rhs.segment(off, p) += info.tail(p);
    }
  }
  return cond;
}

/// Step 1: joint Gaussian draw of (alpha, beta).
inline void sample_alpha_beta(ModelState& state, const InversionModel& model, const SamplerConfig& config,
                              Rng& rng) {
  const int r = model.basis.size();
  const AlphaBetaConditional cond = alpha_beta_conditional(state, model, config);
  const int dim = static_cast<int>(cond.rhs.size());

  const Eigen::LLT<Eigen::MatrixXd> llt(cond.precision);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("sample_alpha_beta: conditional precision not positive definite");

  Eigen::VectorXd draw(dim);
  for (int i = 0; i < dim; ++i) draw[i] = rng.normal();
  const Eigen::VectorXd mean = llt.solve(cond.rhs);
  const Eigen::VectorXd x = mean + llt.matrixU().solve(draw);

  state.alpha = x.head(r);
  for (std::size_t g = 0; g < model.groups.size(); ++g) {
    if (cond.beta_offset[g] >= 0)
      state.beta[g] = x.segment(cond.beta_offset[g], model.groups[g].n_covariates());
    else
      state.beta[g].setZero();
  }
}

namespace detail {

inline double logit(double x) { return std::log(x / (1.0 - x)); }
inline double inv_logit(double u) { return 1.0 / (1.0 + std::exp(-u)); }

}  // namespace detail

/// Step 2: slice-sample each free region's kappa on the logit scale. The
/// target is |Q|^{1/2} exp(-tau_w/2 alpha' Q alpha) Beta(kappa; a, b) and,
/// when the tau_w prior rate depends on kappa and plug_in_omega is off, the
/// Gamma density of tau_w given kappa.
inline void sample_kappa(ModelState& state, const InversionModel& model, const SamplerConfig& config,
                         Rng& rng, long long* evals = nullptr) {
  const int rt = model.basis.n_periods;
  for (int j = 0; j < model.basis.n_regions; ++j) {
    const auto& prior = model.priors.regions[j];
    if (prior.kappa_fixed) continue;
    const auto alpha_region = state.alpha.segment(j * rt, rt);
    const double tau = state.tau_w[j];
    const bool tau_factor = !config.plug_in_omega && !prior.tau_w_fixed && prior.omega_kappa_linked;

    auto log_target = [&](double u) {
      if (evals) ++*evals;
      const double kappa = detail::inv_logit(u);
      if (!(kappa > 0.0 && kappa < 1.0)) return -std::numeric_limits<double>::infinity();
      double lp = 0.5 * ar1_structure_log_det(kappa, rt) -
                  0.5 * ar1_quadratic_form(kappa, tau, alpha_region) +
                  (prior.kappa_a - 1.0) * std::log(kappa) + (prior.kappa_b - 1.0) * std::log1p(-kappa);
      if (tau_factor) {
        const double omega = prior.omega_rate(kappa);
        lp += prior.tau_w_nu * std::log(omega) - omega * tau;
      }
      // logit Jacobian
      lp += std::log(kappa) + std::log1p(-kappa);
      return lp;
    };

    const double u0 = detail::logit(state.kappa[j]);
    const double u1 = slice_sample(log_target, u0, config.kappa_slice_width, config.max_slice_steps, rng);
    state.kappa[j] = detail::inv_logit(u1);
  }
}

/// Step 3: direct Gamma draw of each free region's innovation precision,
/// tau_w ~ Ga(nu + r_t/2, omega(kappa) + alpha' Q alpha / 2).
inline void sample_tau_w(ModelState& state, const InversionModel& model, Rng& rng) {
  const int rt = model.basis.n_periods;
  for (int j = 0; j < model.basis.n_regions; ++j) {
    const auto& prior = model.priors.regions[j];
    if (prior.tau_w_fixed) continue;
    const auto alpha_region = state.alpha.segment(j * rt, rt);
    const double shape = prior.tau_w_nu + 0.5 * rt;
    const double rate =
        prior.omega_rate(state.kappa[j]) + 0.5 * ar1_quadratic_form(state.kappa[j], 1.0, alpha_region);
    state.tau_w[j] = rng.gamma(shape, rate);
  }
}

/// Step 4: univariate slice-sampling sweeps over each group's free error
/// parameters (gamma, then rho or tau_xi, then ell), holding alpha and beta
/// fixed so the residual is computed once per group.
inline void sample_error_params(ModelState& state, const InversionModel& model, const SamplerConfig& config,
                                Rng& rng, long long* evals = nullptr) {
  for (std::size_t g = 0; g < model.groups.size(); ++g) {
    const auto& group = model.groups[g];
    if (group.role != GroupRole::Training) continue;
    const auto& prior = model.priors.groups[g];
    const Eigen::VectorXd residual =
        group.size() > 0 ? Eigen::VectorXd(group.values - predicted_mean(group, state.alpha, state.beta[g]))
                         : Eigen::VectorXd();
    ErrorParams params = state.error_params[g];

    auto loglik = [&](const ErrorParams& p) {
      if (evals) ++*evals;
      if (group.size() == 0) return 0.0;  // no data: the conditional is the prior
      return group_loglik(group, residual, p, config.correlated_enabled);
    };

    if (config.sample_gamma) {  // gamma, log scale, inverse-gamma prior
      auto target = [&](double lg) {
        ErrorParams p = params;
        p.gamma = std::exp(lg);
        return loglik(p) - prior.gamma_nu * lg - prior.gamma_omega / p.gamma;
      };
      params.gamma = std::exp(
          slice_sample(target, std::log(params.gamma), config.gamma_slice_width, config.max_slice_steps, rng));
    }

    if (config.correlated_enabled) {
      if (config.sample_rho_or_tau_xi) {
        if (group.error_case == ErrorCase::CaseII) {  // rho, logit scale, uniform prior
          auto target = [&](double u) {
            ErrorParams p = params;
            p.rho = detail::inv_logit(u);
            return loglik(p) + std::log(p.rho) + std::log1p(-p.rho);
          };
          params.rho = detail::inv_logit(slice_sample(target, detail::logit(params.rho),
                                                      config.rho_slice_width, config.max_slice_steps, rng));
        } else {  // tau_xi, log scale, Gamma prior
          auto target = [&](double lt) {
            ErrorParams p = params;
            p.tau_xi = std::exp(lt);
            return loglik(p) + prior.tau_xi_nu * lt - prior.tau_xi_omega * p.tau_xi;
          };
          params.tau_xi = std::exp(slice_sample(target, std::log(params.tau_xi), config.tau_xi_slice_width,
                                                config.max_slice_steps, rng));
        }
      }

      if (config.sample_ell) {  // ell, log scale, Gamma prior
        auto target = [&](double le) {
          ErrorParams p = params;
          p.ell_minutes = std::exp(le);
          return loglik(p) + prior.ell_nu * le - prior.ell_omega * p.ell_minutes;
        };
        params.ell_minutes = std::exp(slice_sample(target, std::log(params.ell_minutes),
                                                   config.ell_slice_width, config.max_slice_steps, rng));
      }
    }

    state.error_params[g] = params;
  }
}

/// One full Gibbs sweep (steps 1-4).
inline void gibbs_sweep(ModelState& state, const InversionModel& model, const SamplerConfig& config,
                        Rng& rng, long long* evals = nullptr) {
  sample_alpha_beta(state, model, config, rng);
  sample_kappa(state, model, config, rng, evals);
  sample_tau_w(state, model, rng);
  sample_error_params(state, model, config, rng, evals);
}

/// Run one chain: deterministic given the seed; stores post-burn-in states.
inline ChainOutput run_chain(const InversionModel& model, const SamplerConfig& config,
                             const std::string& config_hash = std::string()) {
  config.validate();
  model.validate();
  if (!model.has_training_group()) throw std::invalid_argument("run_chain: no training groups");

  Rng rng(config.seed);
  ModelState state = initial_state(model, config);

  ChainOutput out;
  out.seed = config.seed;
  out.config_hash = config_hash;
  out.n_iterations = config.n_iterations;
  out.n_burn_in = config.n_burn_in;
  out.samples.reserve(config.n_iterations - config.n_burn_in);

  for (int iter = 0; iter < config.n_iterations; ++iter) {
    try {
      gibbs_sweep(state, model, config, rng, &out.density_evaluations);
    } catch (const std::exception& e) {
      throw std::runtime_error("run_chain: iteration " + std::to_string(iter) + ": " + e.what());
    }
    if (iter >= config.n_burn_in) out.samples.push_back(state);
    if (config.progress_every > 0 && (iter + 1) % config.progress_every == 0)
      std::fprintf(stderr, "[fluxinv] iteration %d/%d\n", iter + 1, config.n_iterations);
  }
  return out;
}

}  // namespace fluxinv
