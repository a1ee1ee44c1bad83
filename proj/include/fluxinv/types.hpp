#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace fluxinv {

enum class RegionType { Land, Ocean };
enum class ErrorCase { CaseI, CaseII };
enum class GroupRole { Training, Holdout };

/// Flux basis bookkeeping: r = n_regions * n_periods basis functions ordered
/// region-major (all periods of region 0, then region 1, ...). Response values
/// are in ppm per unit scaling; flux integrals in PgC per period.
struct BasisLibrary {
  int n_regions = 0;
  int n_periods = 0;
  std::vector<RegionType> region_type;   // n_regions
  Eigen::VectorXd flux_integrals;        // r, integral of each basis function
  Eigen::VectorXd prior_flux_integrals;  // r, integral of the prior flux over each cell
  Eigen::MatrixXd response;              // m_total x r, ordered as the observation file

  int size() const { return n_regions * n_periods; }
  int column(int region, int period) const { return region * n_periods + period; }

  void validate() const {
    if (n_regions <= 0 || n_periods <= 0)
      throw std::invalid_argument("BasisLibrary: region and period counts must be positive");
    if (static_cast<int>(region_type.size()) != n_regions)
      throw std::invalid_argument("BasisLibrary: region_type size mismatch");
    const int r = size();
    if (flux_integrals.size() != r || prior_flux_integrals.size() != r)
      throw std::invalid_argument("BasisLibrary: integral vectors must have length r");
    if (response.size() > 0 && response.cols() != r)
      throw std::invalid_argument("BasisLibrary: response matrix must have r columns");
    if (response.size() > 0 && !response.allFinite())
      throw std::invalid_argument("BasisLibrary: response matrix has non-finite entries");
  }
};

/// One instrument group's time-ordered observations. Covariates are stored
/// standardized (unit empirical variance, population divisor); the scales
/// map coefficients back to raw units.
struct ObservationGroup {
  std::string id;
  Eigen::VectorXd times;            // seconds, strictly increasing
  Eigen::VectorXd values;           // observed mole fractions, ppm
  Eigen::VectorXd prior_mean;       // prior expected mole fractions, ppm
  Eigen::VectorXd prescribed_var;   // ppm^2, strictly positive
  Eigen::MatrixXd covariates;       // m x p standardized bias covariates (p may be 0)
  Eigen::MatrixXd covariates_raw;   // m x p covariates in raw units, as stored on disk
  Eigen::VectorXd covariate_scales; // p
  Eigen::MatrixXd response_rows;    // m x r slice of the response matrix
  ErrorCase error_case = ErrorCase::CaseII;
  GroupRole role = GroupRole::Training;

  Eigen::Index size() const { return times.size(); }
  Eigen::Index n_covariates() const { return covariates.cols(); }

  void validate() const {
    const Eigen::Index m = times.size();
    if (values.size() != m || prior_mean.size() != m || prescribed_var.size() != m)
      throw std::invalid_argument("ObservationGroup " + id + ": column length mismatch");
    for (Eigen::Index i = 0; i < m; ++i)
      if (!(prescribed_var[i] > 0.0))
        throw std::invalid_argument("ObservationGroup " + id + ": non-positive prescribed variance at row " +
                                    std::to_string(i));
    for (Eigen::Index i = 1; i < m; ++i)
      if (!(times[i] > times[i - 1]))
        throw std::invalid_argument("ObservationGroup " + id + ": duplicate or decreasing timestamp at index " +
                                    std::to_string(i));
    if (covariates.size() > 0 && covariates.rows() != m)
      throw std::invalid_argument("ObservationGroup " + id + ": covariate row count mismatch");
    if (response_rows.size() > 0 && response_rows.rows() != m)
      throw std::invalid_argument("ObservationGroup " + id + ": response row count mismatch");
  }
};

/// Per-region prior on the scaling-factor autoregression. kappa is either
/// fixed or Beta(a, b); tau_w is either fixed or Gamma(nu, omega), where the
/// rate omega may be declared as omega_scale * (1 - kappa^2) so that the
/// implied stationary variance of the scalings does not depend on kappa.
struct AlphaPriorRegion {
  bool kappa_fixed = false;
  double kappa_value = 0.0;  // used when fixed
  double kappa_a = 1.0;
  double kappa_b = 1.0;

  bool tau_w_fixed = false;
  double tau_w_value = 1.0;  // used when fixed
  double tau_w_nu = 0.354;
  bool omega_kappa_linked = true;
  double omega_scale = 0.0153;  // rate = omega_scale * (1 - kappa^2)
  double omega_const = 1.0;     // rate when not kappa-linked

  double omega_rate(double kappa) const {
    return omega_kappa_linked ? omega_scale * (1.0 - kappa * kappa) : omega_const;
  }

  void validate() const {
    if (kappa_fixed) {
      if (!(kappa_value >= 0.0 && kappa_value < 1.0))
        throw std::invalid_argument("AlphaPriorRegion: fixed kappa must be in [0,1)");
    } else if (!(kappa_a > 0.0 && kappa_b > 0.0)) {
      throw std::invalid_argument("AlphaPriorRegion: Beta hyperparameters must be positive");
    }
    if (tau_w_fixed) {
      if (!(tau_w_value > 0.0)) throw std::invalid_argument("AlphaPriorRegion: fixed tau_w must be positive");
    } else if (!(tau_w_nu > 0.0) || !(omega_kappa_linked ? omega_scale > 0.0 : omega_const > 0.0)) {
      throw std::invalid_argument("AlphaPriorRegion: Gamma hyperparameters must be positive");
    }
  }
};

/// Priors for a group's error-model parameters.
struct ErrorPriors {
  double gamma_nu = 1.627;  // inverse-gamma shape
  double gamma_omega = 2.171;  // inverse-gamma rate
  double ell_nu = 1.0;         // Gamma shape for the length scale (minutes)
  double ell_omega = 1.0;      // Gamma rate, 1/min
  double tau_xi_nu = 1.0;      // Case (i) correlated-precision Gamma shape
  double tau_xi_omega = 1.0;   // Case (i) correlated-precision Gamma rate
  // rho (Case (ii)) is Uniform(0, 1)

  void validate() const {
    if (!(gamma_nu > 0 && gamma_omega > 0 && ell_nu > 0 && ell_omega > 0 && tau_xi_nu > 0 && tau_xi_omega > 0))
      throw std::invalid_argument("ErrorPriors: hyperparameters must be positive");
  }
};

struct Priors {
  std::vector<AlphaPriorRegion> regions;
  double sigma2_beta = 100.0;
  std::vector<ErrorPriors> groups;

  void validate() const {
    if (!(sigma2_beta > 0.0)) throw std::invalid_argument("Priors: sigma2_beta must be positive");
    for (const auto& r : regions) r.validate();
    for (const auto& g : groups) g.validate();
  }
};

/// Error-model parameters for one group. rho applies in Case (ii), tau_xi in
/// Case (i); the inactive field is ignored.
struct ErrorParams {
  double gamma = 1.0;        // variance inflation, > 0
  double rho = 0.5;          // correlated-variance fraction in [0, 1]
  double tau_xi = 1.0;       // correlated-component precision, > 0
  double ell_minutes = 1.0;  // temporal length scale, > 0

  void validate(ErrorCase error_case) const {
    if (!(gamma > 0.0)) throw std::invalid_argument("ErrorParams: gamma must be positive");
    if (!(ell_minutes > 0.0)) throw std::invalid_argument("ErrorParams: ell must be positive");
    if (error_case == ErrorCase::CaseII) {
      if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("ErrorParams: rho must be in [0,1]");
    } else if (!(tau_xi > 0.0)) {
      throw std::invalid_argument("ErrorParams: tau_xi must be positive");
    }
  }
};

/// One MCMC sample of every unknown in the model.
struct ModelState {
  Eigen::VectorXd alpha;                  // r
  std::vector<Eigen::VectorXd> beta;      // per group, length p_g
  Eigen::VectorXd kappa;                  // n_regions
  Eigen::VectorXd tau_w;                  // n_regions
  std::vector<ErrorParams> error_params;  // per group
};

}  // namespace fluxinv
