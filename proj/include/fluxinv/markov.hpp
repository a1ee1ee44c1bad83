#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "fluxinv/rng.hpp"
#include "fluxinv/tridiag.hpp"
#include "fluxinv/types.hpp"

namespace fluxinv {

// Gaps wider than this many length scales contribute exactly zero coupling,
// which avoids 0/0 from underflow of e^{-2 delta}.
inline constexpr double kGapUnderflowThreshold = 37.0;

/// Tridiagonal precision of a temporally ordered Gaussian process with
/// exponential covariance sigma_i sigma_j exp(-|t_i - t_j| / ell). The
/// previous-neighbour conditional factorisation is exact for this kernel,
/// so the bands below give the exact inverse of the dense covariance.
struct TridiagonalPrecision {
  Eigen::VectorXd diag;          // n
  Eigen::VectorXd subdiag;       // n - 1
  Eigen::VectorXd marginal_sds;  // n

  Eigen::Index size() const { return diag.size(); }
};

/// Bands of the exact precision. Times are in seconds, ell in minutes; the
/// normalised gaps are delta_k = (t_{k+1} - t_k) / (60 ell).
inline TridiagonalPrecision build_xi_precision(const Eigen::VectorXd& times_seconds, double ell_minutes,
                                               const Eigen::VectorXd& marginal_vars) {
  const Eigen::Index n = times_seconds.size();
  if (n == 0) throw std::invalid_argument("build_xi_precision: no observations");
  if (!(ell_minutes > 0.0)) throw std::invalid_argument("build_xi_precision: ell must be positive");
  if (marginal_vars.size() != n)
    throw std::invalid_argument("build_xi_precision: variance length mismatch");

  TridiagonalPrecision q;
  q.diag = Eigen::VectorXd::Ones(n);
  q.subdiag = Eigen::VectorXd::Zero(std::max<Eigen::Index>(0, n - 1));
  q.marginal_sds.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(marginal_vars[i] > 0.0))
      throw std::invalid_argument("build_xi_precision: marginal variances must be positive");
    q.marginal_sds[i] = std::sqrt(marginal_vars[i]);
  }

  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double gap = times_seconds[k + 1] - times_seconds[k];
    if (!(gap > 0.0))
      throw std::invalid_argument("build_xi_precision: duplicate or decreasing timestamps");
    const double delta = gap / (60.0 * ell_minutes);
    if (delta > kGapUnderflowThreshold) continue;  // block boundary
    const double corr = std::exp(-delta);
    const double denom = 1.0 - corr * corr;
    q.diag[k] += corr * corr / denom;
    q.diag[k + 1] += corr * corr / denom;
    q.subdiag[k] = -corr / denom;
  }

  for (Eigen::Index i = 0; i < n; ++i) q.diag[i] /= marginal_vars[i];
  for (Eigen::Index k = 0; k + 1 < n; ++k) q.subdiag[k] /= q.marginal_sds[k] * q.marginal_sds[k + 1];
  return q;
}

/// Correlated draw with covariance sigma_i sigma_j exp(-|t_i - t_j|/ell),
/// produced by back-substitution against the Cholesky factor of the precision.
inline Eigen::VectorXd sample_xi(const Eigen::VectorXd& times_seconds, double ell_minutes,
                                 const Eigen::VectorXd& marginal_vars, Rng& rng) {
  const TridiagonalPrecision q = build_xi_precision(times_seconds, ell_minutes, marginal_vars);
  const TridiagonalCholesky chol(q.diag, q.subdiag);
  Eigen::VectorXd z(q.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  chol.solve_upper_in_place(z);
  return z;
}

/// Marginal-variance split of the two error components for one group.
/// Case (ii): var(xi) = rho gamma v_ps, var(eps) = (1-rho) gamma v_ps.
/// Case (i):  var(eps) = gamma v_ps, var(xi) = 1/tau_xi (constant per group).
struct ErrorVariances {
  Eigen::VectorXd xi_var;   // empty when the correlated component is absent
  Eigen::VectorXd eps_var;  // empty when rho = 1 (pure correlated model)
};

inline ErrorVariances error_variances(const ObservationGroup& group, const ErrorParams& params,
                                      bool correlated = true) {
  params.validate(group.error_case);
  ErrorVariances v;
  const Eigen::VectorXd inflated = params.gamma * group.prescribed_var;
  if (group.error_case == ErrorCase::CaseII) {
    const double rho = correlated ? params.rho : 0.0;
    if (rho > 0.0) v.xi_var = rho * inflated;
    if (rho < 1.0) v.eps_var = (1.0 - rho) * inflated;
  } else {
    v.eps_var = inflated;
    if (correlated)
      v.xi_var = Eigen::VectorXd::Constant(group.size(), 1.0 / params.tau_xi);
  }
  return v;
}

/// Factored form of Sigma_g = Sigma_xi + Sigma_eps for one group, exposing
/// O(m) solves with Sigma_g^{-1} and log |Sigma_g|. With Q_xi the tridiagonal
/// precision of xi and D = Sigma_eps diagonal, the identities used are
///   (D + Q^{-1})^{-1} = D^{-1} - D^{-1} (Q + D^{-1})^{-1} D^{-1},
///   |D + Q^{-1}|      = |Q + D^{-1}| |D| / |Q|,
/// with Q + D^{-1} factored by tridiagonal Cholesky.
class GroupSolver {
public:
  GroupSolver(const Eigen::VectorXd& times_seconds, const ErrorVariances& vars, double ell_minutes) {
    const bool has_xi = vars.xi_var.size() > 0;
    const bool has_eps = vars.eps_var.size() > 0;
    if (!has_xi && !has_eps) throw std::invalid_argument("GroupSolver: no error components");
    n_ = has_eps ? vars.eps_var.size() : vars.xi_var.size();

    if (!has_xi) {
      eps_inv_ = vars.eps_var.cwiseInverse();
      log_det_ = vars.eps_var.array().log().sum();
      return;
    }

    TridiagonalPrecision q = build_xi_precision(times_seconds, ell_minutes, vars.xi_var);
    xi_precision_ = std::make_unique<TridiagonalCholesky>(q.diag, q.subdiag);
    if (!has_eps) {
      // Pure correlated model: Sigma_g^{-1} is the precision itself.
      q_diag_ = std::move(q.diag);
      q_subdiag_ = std::move(q.subdiag);
      log_det_ = -xi_precision_->log_det();
      return;
    }

    eps_inv_ = vars.eps_var.cwiseInverse();
    Eigen::VectorXd inner_diag = q.diag + eps_inv_;
    inner_ = std::make_unique<TridiagonalCholesky>(inner_diag, q.subdiag);
    log_det_ = inner_->log_det() + vars.eps_var.array().log().sum() - xi_precision_->log_det();
  }

  Eigen::Index size() const { return n_; }

  /// log |Sigma_g|.
  double log_det() const { return log_det_; }

  /// Sigma_g^{-1} b, columnwise for matrix arguments.
  template <typename Derived>
  Eigen::MatrixXd solve(const Eigen::MatrixBase<Derived>& b) const {
    if (b.rows() != n_) throw std::invalid_argument("GroupSolver::solve: dimension mismatch");
    if (!xi_precision_) return eps_inv_.asDiagonal() * b;
    if (!inner_) {
      // Pure correlated model: multiply by the tridiagonal precision.
      Eigen::MatrixXd out(b.rows(), b.cols());
      for (Eigen::Index c = 0; c < b.cols(); ++c)
        out.col(c) = tridiag_apply(q_diag_, q_subdiag_, b.col(c));
      return out;
    }
    Eigen::MatrixXd u = eps_inv_.asDiagonal() * b;
    Eigen::MatrixXd w = u;
    inner_->solve_in_place(w);
    u.noalias() -= eps_inv_.asDiagonal() * w;
    return u;
  }

  /// b' Sigma_g^{-1} b.
  double quad_form(const Eigen::VectorXd& b) const { return b.dot(solve(b).col(0)); }

private:
  Eigen::Index n_ = 0;
  Eigen::VectorXd eps_inv_;
  Eigen::VectorXd q_diag_, q_subdiag_;
  std::unique_ptr<TridiagonalCholesky> xi_precision_;
  std::unique_ptr<TridiagonalCholesky> inner_;
  double log_det_ = 0.0;
};

inline GroupSolver make_group_solver(const ObservationGroup& group, const ErrorParams& params,
                                     bool correlated = true) {
  return GroupSolver(group.times, error_variances(group, params, correlated), params.ell_minutes);
}

/// Group log-likelihood: -(m/2) log 2 pi - (1/2) log |Sigma_g| - (1/2) r' Sigma_g^{-1} r
/// with r the residual of the predicted mean. Runs in O(m).
inline double group_loglik(const ObservationGroup& group, const Eigen::VectorXd& residual,
                           const ErrorParams& params, bool correlated = true) {
  const GroupSolver solver = make_group_solver(group, params, correlated);
  const double m = static_cast<double>(group.size());
  return -0.5 * m * std::log(2.0 * std::numbers::pi) - 0.5 * solver.log_det() -
         0.5 * solver.quad_form(residual);
}

}  // namespace fluxinv
