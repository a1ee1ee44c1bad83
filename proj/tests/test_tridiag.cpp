#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "fluxinv/tridiag.hpp"

using fluxinv::TridiagonalCholesky;
using fluxinv::tridiag_apply;
using fluxinv::tridiag_dense;

namespace {

// Random diagonally dominant SPD tridiagonal system.
void random_spd(std::mt19937_64& rng, int n, Eigen::VectorXd& diag, Eigen::VectorXd& sub) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  diag.resize(n);
  sub.resize(n - 1);
  for (int i = 0; i < n - 1; ++i) sub[i] = u(rng) - 0.5;
  for (int i = 0; i < n; ++i) {
    double coupling = 0.0;
    if (i > 0) coupling += std::abs(sub[i - 1]);
    if (i < n - 1) coupling += std::abs(sub[i]);
    diag[i] = coupling + u(rng) + 0.2;
  }
}

}  // namespace

TEST_CASE("tridiagonal Cholesky matches dense factorisation") {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 40);
    Eigen::VectorXd diag, sub;
    random_spd(rng, n, diag, sub);
    const Eigen::MatrixXd dense = tridiag_dense(diag, sub);
    const TridiagonalCholesky chol(diag, sub);

    const Eigen::LLT<Eigen::MatrixXd> ref(dense);
    double ref_log_det = 0.0;
    for (int i = 0; i < n; ++i) ref_log_det += 2.0 * std::log(ref.matrixL()(i, i));
    CHECK(chol.log_det() == Catch::Approx(ref_log_det).epsilon(1e-12));

    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b[i] = std::normal_distribution<double>()(rng);
    const Eigen::VectorXd x = chol.solve(b);
    CHECK((dense * x - b).norm() <= 1e-10 * b.norm());
    CHECK((tridiag_apply(diag, sub, x) - b).norm() <= 1e-10 * b.norm());
  }
}

TEST_CASE("tridiagonal Cholesky rejects indefinite matrices") {
  Eigen::VectorXd diag(3), sub(2);
  diag << 1.0, -2.0, 1.0;
  sub << 0.1, 0.1;
  CHECK_THROWS_AS(TridiagonalCholesky(diag, sub), std::runtime_error);

  diag << 1.0, 1.0, 1.0;
  sub << 2.0, 0.1;  // breaks positive definiteness
  CHECK_THROWS_AS(TridiagonalCholesky(diag, sub), std::runtime_error);
}

TEST_CASE("lower and upper triangular solves invert each other") {
  std::mt19937_64 rng(7);
  Eigen::VectorXd diag, sub;
  random_spd(rng, 17, diag, sub);
  const TridiagonalCholesky chol(diag, sub);

  Eigen::VectorXd z(17);
  for (int i = 0; i < 17; ++i) z[i] = std::normal_distribution<double>()(rng);
  Eigen::VectorXd x = z;
  chol.solve_lower_in_place(x);
  chol.solve_upper_in_place(x);
  Eigen::VectorXd y = z;
  chol.solve_in_place(y);
  CHECK((x - y).norm() <= 1e-13 * y.norm());
}
