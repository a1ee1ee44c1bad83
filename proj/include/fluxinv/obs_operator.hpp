#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace fluxinv {

/// Column-averaging retrieval kernel: quadrature weights c (summing to one),
/// averaging-kernel vector a, and the retrieval's prior profile with its
/// column average. The operator maps a vertical mole-fraction profile to a
/// single column-averaged value.
struct RetrievalKernel {
  Eigen::VectorXd quadrature_weights;  // c, length n_levels
  Eigen::VectorXd averaging_kernel;    // a, length n_levels
  Eigen::VectorXd prior_profile;       // ppm per level
  double prior_column = 0.0;           // c' prior_profile, ppm

  Eigen::Index n_levels() const { return quadrature_weights.size(); }

  void validate() const {
    const Eigen::Index n = quadrature_weights.size();
    if (n == 0) throw std::invalid_argument("RetrievalKernel: empty kernel");
    if (averaging_kernel.size() != n || prior_profile.size() != n)
      throw std::invalid_argument("RetrievalKernel: vector length mismatch");
    if (std::abs(quadrature_weights.sum() - 1.0) > 1e-10)
      throw std::invalid_argument("RetrievalKernel: quadrature weights must sum to 1");
    if (!averaging_kernel.allFinite() || !prior_profile.allFinite())
      throw std::invalid_argument("RetrievalKernel: non-finite entries");
    if (std::abs(quadrature_weights.dot(prior_profile) - prior_column) > 1e-10)
      throw std::invalid_argument("RetrievalKernel: prior column inconsistent with profile");
  }
};

/// prior_column + sum_k c_k a_k (profile_k - prior_profile_k).
inline double column_average(const RetrievalKernel& kernel, const Eigen::VectorXd& profile) {
  if (profile.size() != kernel.n_levels())
    throw std::invalid_argument("column_average: profile length mismatch");
  return kernel.prior_column +
         (kernel.quadrature_weights.array() * kernel.averaging_kernel.array() *
          (profile - kernel.prior_profile).array())
             .sum();
}

/// Apply the deviation part of the operator to response-function profiles,
/// one column per basis function. Response functions are perturbations, so
/// the prior-profile terms do not appear; the prior-column offset belongs to
/// the prior mole-fraction expectation alone.
inline Eigen::RowVectorXd apply_to_basis(const RetrievalKernel& kernel,
                                         const Eigen::MatrixXd& basis_profiles) {
  if (basis_profiles.rows() != kernel.n_levels())
    throw std::invalid_argument("apply_to_basis: profile rows must match kernel levels");
  return (kernel.quadrature_weights.array() * kernel.averaging_kernel.array()).matrix().transpose() *
         basis_profiles;
}

/// Identity-like kernel used by the transport surrogate: uniform quadrature
/// weights, unit averaging kernel, constant prior profile.
inline RetrievalKernel surrogate_kernel(int n_levels, double prior_value) {
  RetrievalKernel k;
  k.quadrature_weights = Eigen::VectorXd::Constant(n_levels, 1.0 / n_levels);
  k.averaging_kernel = Eigen::VectorXd::Ones(n_levels);
  k.prior_profile = Eigen::VectorXd::Constant(n_levels, prior_value);
  k.prior_column = prior_value;
  return k;
}

}  // namespace fluxinv
