#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "fluxinv/transport.hpp"

using namespace fluxinv;

namespace {

SurrogateGrid small_grid() {
  SurrogateGrid g;
  g.n_lon = 12;
  g.n_lat = 8;
  g.flux_to_ppm = 100.0;
  return g;
}

}  // namespace

TEST_CASE("constants are preserved without flux") {
  const SurrogateGrid grid = small_grid();
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(grid.cells(), 407.5);
  auto no_flux = [](int) -> const Eigen::VectorXd* { return nullptr; };
  const auto fields = run_transport(grid, no_flux, uniform, 50);
  for (const auto& f : fields) CHECK((f.array() - 407.5).abs().maxCoeff() < 1e-12);
}

TEST_CASE("transport is linear in the flux") {
  const SurrogateGrid grid = small_grid();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd f1(grid.cells()), f2(grid.cells());
  for (int i = 0; i < grid.cells(); ++i) {
    f1[i] = gauss(rng);
    f2[i] = gauss(rng);
  }
  const Eigen::VectorXd fsum = f1 + f2;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(grid.cells());

  auto at1 = [&](int s) { return s < 10 ? &f1 : nullptr; };
  auto at2 = [&](int) { return &f2; };
  auto at12 = [&](int s) -> const Eigen::VectorXd* { return s < 10 ? &fsum : &f2; };

  const auto a = run_transport(grid, at1, zero, 30);
  const auto b = run_transport(grid, at2, zero, 30);
  const auto c = run_transport(grid, at12, zero, 30);
  for (int s = 0; s <= 30; ++s)
    CHECK((c[s] - a[s] - b[s]).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("global mass accounting is exact on the periodic domain") {
  const SurrogateGrid grid = small_grid();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd flux(grid.cells()), initial(grid.cells());
  for (int i = 0; i < grid.cells(); ++i) {
    flux[i] = gauss(rng);
    initial[i] = 400.0 + gauss(rng);
  }
  auto at = [&](int s) { return s % 3 == 0 ? &flux : nullptr; };
  const int n_steps = 40;
  const auto fields = run_transport(grid, at, initial, n_steps);

  double injected = 0.0;
  for (int s = 0; s < n_steps; ++s)
    if (s % 3 == 0) injected += flux.sum();
  const double delta = fields.back().sum() - fields.front().sum();
  CHECK(delta == Catch::Approx(grid.flux_to_ppm * injected).epsilon(1e-10));
}

TEST_CASE("stability bounds are enforced") {
  SurrogateGrid grid = small_grid();
  grid.wind = 1.2;
  CHECK_THROWS_AS(grid.validate(), std::invalid_argument);
  grid.wind = 0.5;
  grid.diffusion = 0.3;
  CHECK_THROWS_AS(grid.validate(), std::invalid_argument);
}

namespace {

SurrogateConfig test_config() {
  SurrogateConfig cfg;
  cfg.grid = small_grid();
  cfg.basis.regions_lon = 3;
  cfg.basis.regions_lat = 2;
  cfg.basis.n_periods = 3;
  cfg.basis.steps_per_period = 40;
  cfg.basis.n_ocean_regions = 2;
  cfg.track.obs_per_pass = 8;
  cfg.track.holdout_cell_lon = 5;
  cfg.track.holdout_cell_lat = 4;
  cfg.n_levels = 5;
  return cfg;
}

}  // namespace

TEST_CASE("response functions respect causality and linearity") {
  const SurrogateConfig cfg = test_config();
  const TrackSpec track = make_track(cfg.grid, cfg.basis, cfg.track);
  std::vector<RetrievalKernel> kernels(track.size());
  for (auto& k : kernels) k = surrogate_kernel(cfg.n_levels, cfg.initial_ppm);
  const Eigen::VectorXd initial = Eigen::VectorXd::Constant(cfg.grid.cells(), cfg.initial_ppm);
  const ResponseBuild rb = make_response_functions(cfg.grid, cfg.basis, track, kernels, initial);

  const int rt = cfg.basis.n_periods;
  for (std::size_t i = 0; i < track.size(); ++i) {
    for (int region = 0; region < cfg.basis.n_regions(); ++region) {
      for (int period = 0; period < rt; ++period) {
        const double support_start =
            period * cfg.basis.steps_per_period * cfg.grid.step_seconds;
        if (track.times_seconds[i] <= support_start)
          CHECK(rb.response(i, region * rt + period) == 0.0);
      }
    }
  }

  // spot re-simulation oracle for one (track point, basis) pair
  const int region = 1, period = 0;
  const Eigen::VectorXd pattern = cfg.basis.region_pattern(cfg.grid, region);
  auto at = [&](int s) {
    return (s >= 0 && s < cfg.basis.steps_per_period) ? &pattern : nullptr;
  };
  const auto fields = run_transport(cfg.grid, at, Eigen::VectorXd::Zero(cfg.grid.cells()),
                                    cfg.basis.total_steps());
  const std::size_t pick = track.size() / 2;
  const int step = static_cast<int>(track.times_seconds[pick] / cfg.grid.step_seconds);
  CHECK(rb.response(pick, region * rt + period) ==
        Catch::Approx(fields[step][track.cell_index[pick]]).margin(1e-12));

  // doubling the flux pattern doubles the response
  const Eigen::VectorXd doubled = 2.0 * pattern;
  auto at2 = [&](int s) {
    return (s >= 0 && s < cfg.basis.steps_per_period) ? &doubled : nullptr;
  };
  const auto fields2 = run_transport(cfg.grid, at2, Eigen::VectorXd::Zero(cfg.grid.cells()),
                                     cfg.basis.total_steps());
  CHECK(fields2[step][track.cell_index[pick]] ==
        Catch::Approx(2.0 * fields[step][track.cell_index[pick]]).margin(1e-12));
}

TEST_CASE("track times beyond the horizon are rejected") {
  const SurrogateConfig cfg = test_config();
  TrackSpec track;
  track.group_ids = {"G"};
  track.group_roles = {GroupRole::Training};
  track.times_seconds = {cfg.basis.total_steps() * cfg.grid.step_seconds + 10.0};
  track.cell_index = {0};
  track.group_index = {0};
  std::vector<RetrievalKernel> kernels{surrogate_kernel(cfg.n_levels, cfg.initial_ppm)};
  const Eigen::VectorXd initial = Eigen::VectorXd::Constant(cfg.grid.cells(), cfg.initial_ppm);
  CHECK_THROWS_WITH(make_response_functions(cfg.grid, cfg.basis, track, kernels, initial),
                    Catch::Matchers::ContainsSubstring("horizon"));
}

TEST_CASE("surrogate dataset is well formed") {
  const SurrogateConfig cfg = test_config();
  const SurrogateDataset data = build_surrogate_dataset(cfg);

  data.basis.validate();
  CHECK(data.basis.n_regions == 6);
  CHECK(data.basis.n_periods == 3);
  CHECK(data.basis.region_type[5] == RegionType::Ocean);
  CHECK(data.basis.region_type[0] == RegionType::Land);
  CHECK(data.basis.flux_integrals.minCoeff() == 1.0);
  CHECK(data.basis.prior_flux_integrals.minCoeff() > 0.0);

  REQUIRE(data.groups.size() == 3);
  Eigen::Index total = 0;
  for (const auto& g : data.groups) {
    g.validate();
    total += g.size();
    if (g.role == GroupRole::Training) {
      REQUIRE(g.covariates.cols() == 3);
      for (int c = 0; c < 3; ++c) {
        const double mean = g.covariates.col(c).mean();
        const double var = (g.covariates.col(c).array() - mean).square().sum() / g.size();
        CHECK(var == Catch::Approx(1.0).epsilon(1e-10));
      }
    } else {
      CHECK(g.covariates.cols() == 0);
    }
  }
  CHECK(total == data.basis.response.rows());
  CHECK(static_cast<Eigen::Index>(data.kernels.size()) == total);

  // deterministic rebuild
  const SurrogateDataset again = build_surrogate_dataset(cfg);
  CHECK(again.basis.response == data.basis.response);
  CHECK(again.groups[0].prescribed_var == data.groups[0].prescribed_var);
  CHECK(again.groups[0].covariates_raw == data.groups[0].covariates_raw);
}
