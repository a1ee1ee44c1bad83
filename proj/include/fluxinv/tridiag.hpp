#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace fluxinv {

/// Cholesky factorisation A = L L' of a symmetric positive-definite
/// tridiagonal matrix, stored as the two bands of the bidiagonal factor L.
/// Factorisation, solves, and log-determinant all run in O(n).
class TridiagonalCholesky {
public:
  TridiagonalCholesky(const Eigen::VectorXd& diag, const Eigen::VectorXd& subdiag)
      : d_(diag.size()), s_(subdiag.size()) {
    const Eigen::Index n = diag.size();
    if (n == 0) throw std::invalid_argument("TridiagonalCholesky: empty matrix");
    if (subdiag.size() != n - 1)
      throw std::invalid_argument("TridiagonalCholesky: subdiag must have size n-1");
    double piv = diag[0];
    if (!(piv > 0.0)) throw std::runtime_error("TridiagonalCholesky: matrix not positive definite");
    d_[0] = std::sqrt(piv);
    log_det_ = std::log(d_[0]);
    for (Eigen::Index i = 1; i < n; ++i) {
      s_[i - 1] = subdiag[i - 1] / d_[i - 1];
      piv = diag[i] - s_[i - 1] * s_[i - 1];
      if (!(piv > 0.0)) throw std::runtime_error("TridiagonalCholesky: matrix not positive definite");
      d_[i] = std::sqrt(piv);
      log_det_ += std::log(d_[i]);
    }
  }

  Eigen::Index size() const { return d_.size(); }

  /// log |A| (twice the log-determinant of L).
  double log_det() const { return 2.0 * log_det_; }

  /// Solve L x = b in place (forward substitution).
  template <typename Derived>
  void solve_lower_in_place(Eigen::MatrixBase<Derived>& b) const {
    const Eigen::Index n = d_.size();
    for (Eigen::Index c = 0; c < b.cols(); ++c) {
      b(0, c) /= d_[0];
      for (Eigen::Index i = 1; i < n; ++i)
        b(i, c) = (b(i, c) - s_[i - 1] * b(i - 1, c)) / d_[i];
    }
  }

  /// Solve L' x = b in place (backward substitution).
  template <typename Derived>
  void solve_upper_in_place(Eigen::MatrixBase<Derived>& b) const {
    const Eigen::Index n = d_.size();
    for (Eigen::Index c = 0; c < b.cols(); ++c) {
      b(n - 1, c) /= d_[n - 1];
      for (Eigen::Index i = n - 2; i >= 0; --i)
        b(i, c) = (b(i, c) - s_[i] * b(i + 1, c)) / d_[i];
    }
  }

  /// Solve A x = b in place.
  template <typename Derived>
  void solve_in_place(Eigen::MatrixBase<Derived>& b) const {
    solve_lower_in_place(b);
    solve_upper_in_place(b);
  }

  Eigen::VectorXd solve(Eigen::VectorXd b) const {
    solve_in_place(b);
    return b;
  }

  Eigen::MatrixXd solve(Eigen::MatrixXd b) const {
    solve_in_place(b);
    return b;
  }

private:
  Eigen::VectorXd d_;  // diagonal of L
  Eigen::VectorXd s_;  // subdiagonal of L
  double log_det_ = 0.0;
};

/// y = A x for a symmetric tridiagonal A given by its bands.
inline Eigen::VectorXd tridiag_apply(const Eigen::VectorXd& diag, const Eigen::VectorXd& subdiag,
                                     const Eigen::VectorXd& x) {
  const Eigen::Index n = diag.size();
  Eigen::VectorXd y = diag.cwiseProduct(x);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    y[i] += subdiag[i] * x[i + 1];
    y[i + 1] += subdiag[i] * x[i];
  }
  return y;
}

/// Dense form of a symmetric tridiagonal matrix (test and small-n use).
inline Eigen::MatrixXd tridiag_dense(const Eigen::VectorXd& diag, const Eigen::VectorXd& subdiag) {
  const Eigen::Index n = diag.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  a.diagonal() = diag;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    a(i, i + 1) = subdiag[i];
    a(i + 1, i) = subdiag[i];
  }
  return a;
}

}  // namespace fluxinv
