#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "fluxinv/model.hpp"
#include "fluxinv/obs_operator.hpp"
#include "fluxinv/rng.hpp"
#include "fluxinv/types.hpp"

namespace fluxinv {

/// Toy linear transport on a doubly periodic lon-lat grid: explicit upwind
/// zonal advection plus five-point diffusion plus a flux source. Linear in
/// the initial field and the fluxes, and exactly mass conserving.
struct SurrogateGrid {
  int n_lon = 36;
  int n_lat = 18;
  double wind = 0.5;          // cells per step, zonal (positive = eastward)
  double diffusion = 0.1;     // cells^2 per step
  double step_seconds = 3600.0;
  double flux_to_ppm = 200.0; // ppm per flux unit per step

  int cells() const { return n_lon * n_lat; }
  int cell(int lon, int lat) const { return lat * n_lon + lon; }

  void validate() const {
    if (n_lon < 2 || n_lat < 2) throw std::invalid_argument("SurrogateGrid: grid too small");
    if (!(std::abs(wind) <= 1.0))
      throw std::invalid_argument("SurrogateGrid: |wind| must be <= 1 cell per step");
    if (!(diffusion >= 0.0 && diffusion <= 0.25))
      throw std::invalid_argument("SurrogateGrid: diffusion must be in [0, 1/4] cells^2 per step");
    if (!(step_seconds > 0.0)) throw std::invalid_argument("SurrogateGrid: non-positive time step");
  }
};

/// One explicit step. flux, when present, is a per-cell rate for this step.
inline Eigen::VectorXd transport_step(const SurrogateGrid& grid, const Eigen::VectorXd& field,
                                      const Eigen::VectorXd* flux) {
  const int nx = grid.n_lon, ny = grid.n_lat;
  Eigen::VectorXd out(field.size());
  for (int lat = 0; lat < ny; ++lat) {
    const int north = (lat + 1) % ny, south = (lat + ny - 1) % ny;
    for (int lon = 0; lon < nx; ++lon) {
      const int east = (lon + 1) % nx, west = (lon + nx - 1) % nx;
      const double here = field[grid.cell(lon, lat)];
      const double upwind = grid.wind >= 0.0 ? field[grid.cell(west, lat)] - here
                                             : here - field[grid.cell(east, lat)];
      const double laplacian = field[grid.cell(east, lat)] + field[grid.cell(west, lat)] +
                               field[grid.cell(lon, north)] + field[grid.cell(lon, south)] - 4.0 * here;
      out[grid.cell(lon, lat)] = here + std::abs(grid.wind) * upwind + grid.diffusion * laplacian;
    }
  }
  if (flux) out += grid.flux_to_ppm * *flux;
  return out;
}

/// Run the surrogate for n_steps. flux_at(s) returns the flux field applied
/// during step s, or nullptr for no flux. Element s of the result is the
/// field after s steps (element 0 is the initial field).
inline std::vector<Eigen::VectorXd> run_transport(const SurrogateGrid& grid,
                                                  const std::function<const Eigen::VectorXd*(int)>& flux_at,
                                                  const Eigen::VectorXd& initial_field, int n_steps) {
  grid.validate();
  if (initial_field.size() != grid.cells())
    throw std::invalid_argument("run_transport: initial field size mismatch");
  std::vector<Eigen::VectorXd> fields;
  fields.reserve(n_steps + 1);
  fields.push_back(initial_field);
  for (int s = 0; s < n_steps; ++s) fields.push_back(transport_step(grid, fields.back(), flux_at(s)));
  return fields;
}

/// Observation track: timestamps, ground cells, and group assignment.
/// Group ids ending in the holdout marker are validation-only.
struct TrackSpec {
  std::vector<double> times_seconds;
  std::vector<int> cell_index;
  std::vector<int> group_index;
  std::vector<std::string> group_ids;
  std::vector<GroupRole> group_roles;

  std::size_t size() const { return times_seconds.size(); }

  void validate(int n_cells) const {
    if (cell_index.size() != size() || group_index.size() != size())
      throw std::invalid_argument("TrackSpec: column length mismatch");
    std::vector<double> last(group_ids.size(), -1.0);
    for (std::size_t i = 0; i < size(); ++i) {
      if (cell_index[i] < 0 || cell_index[i] >= n_cells)
        throw std::invalid_argument("TrackSpec: cell index out of range");
      const int g = group_index[i];
      if (g < 0 || g >= static_cast<int>(group_ids.size()))
        throw std::invalid_argument("TrackSpec: group index out of range");
      if (times_seconds[i] <= last[g])
        throw std::invalid_argument("TrackSpec: timestamps not strictly increasing within group");
      last[g] = times_seconds[i];
    }
  }
};

/// Region-period flux basis on the surrogate grid. Regions tile the grid as
/// regions_lon x regions_lat blocks; periods split the horizon evenly. Each
/// basis function is a uniform flux over one region during one period,
/// normalised so its space-time integral is one mass unit.
struct SurrogateBasisSpec {
  int regions_lon = 4;
  int regions_lat = 2;
  int n_periods = 6;
  int steps_per_period = 120;
  int n_ocean_regions = 2;  // trailing regions are flagged as ocean

  int n_regions() const { return regions_lon * regions_lat; }
  int total_steps() const { return n_periods * steps_per_period; }

  void validate(const SurrogateGrid& grid) const {
    if (regions_lon < 1 || regions_lat < 1 || n_periods < 1 || steps_per_period < 1)
      throw std::invalid_argument("SurrogateBasisSpec: counts must be positive");
    if (grid.n_lon % regions_lon != 0 || grid.n_lat % regions_lat != 0)
      throw std::invalid_argument("SurrogateBasisSpec: regions must tile the grid evenly");
    if (n_ocean_regions < 0 || n_ocean_regions > n_regions())
      throw std::invalid_argument("SurrogateBasisSpec: bad ocean region count");
  }

  int region_of_cell(const SurrogateGrid& grid, int cell) const {
    const int lon = cell % grid.n_lon;
    const int lat = cell / grid.n_lon;
    const int rlon = lon / (grid.n_lon / regions_lon);
    const int rlat = lat / (grid.n_lat / regions_lat);
    return rlat * regions_lon + rlon;
  }

  /// Uniform flux pattern of one region, normalised to unit space-time
  /// integral over a single period.
  Eigen::VectorXd region_pattern(const SurrogateGrid& grid, int region) const {
    Eigen::VectorXd pattern = Eigen::VectorXd::Zero(grid.cells());
    int count = 0;
    for (int c = 0; c < grid.cells(); ++c)
      if (region_of_cell(grid, c) == region) ++count;
    const double rate = 1.0 / (static_cast<double>(count) * steps_per_period);
    for (int c = 0; c < grid.cells(); ++c)
      if (region_of_cell(grid, c) == region) pattern[c] = rate;
    return pattern;
  }

  /// Smooth prior flux field, in mass units per cell per step.
  Eigen::VectorXd prior_flux_field(const SurrogateGrid& grid) const {
    Eigen::VectorXd field(grid.cells());
    for (int c = 0; c < grid.cells(); ++c) {
      const double lon_frac = static_cast<double>(c % grid.n_lon) / grid.n_lon;
      const double lat_frac = static_cast<double>(c / grid.n_lon) / grid.n_lat;
      field[c] = 2e-5 * (1.0 + 0.6 * std::sin(2.0 * std::numbers::pi * lon_frac) *
                                   std::cos(std::numbers::pi * (lat_frac - 0.5)));
    }
    return field;
  }
};

/// Response-function matrix and prior mole-fraction expectation along a track.
struct ResponseBuild {
  Eigen::MatrixXd response;    // m x r, ppm per unit scaling
  Eigen::VectorXd prior_mole;  // m, ppm
};

namespace detail {

inline int sample_step(double time_seconds, const SurrogateGrid& grid, int total_steps) {
  if (time_seconds < 0.0 || time_seconds >= total_steps * grid.step_seconds)
    throw std::invalid_argument("track time beyond simulated horizon");
  return static_cast<int>(std::floor(time_seconds / grid.step_seconds));
}

inline Eigen::VectorXd replicated_profile(double surface_value, int n_levels) {
  return Eigen::VectorXd::Constant(n_levels, surface_value);
}

}  // namespace detail

/// Build the response matrix by running the surrogate once per basis function
/// with that basis's flux alone (linearity makes the subtraction form of the
/// response equivalent), sampling the field along the track through the
/// retrieval kernels. The prior mole-fraction expectation comes from a run
/// under the prior flux with the actual initial field.
inline ResponseBuild make_response_functions(const SurrogateGrid& grid, const SurrogateBasisSpec& spec,
                                             const TrackSpec& track,
                                             const std::vector<RetrievalKernel>& kernels,
                                             const Eigen::VectorXd& initial_field) {
  grid.validate();
  spec.validate(grid);
  track.validate(grid.cells());
  if (kernels.size() != track.size())
    throw std::invalid_argument("make_response_functions: one kernel per track point required");

  const int m = static_cast<int>(track.size());
  const int r = spec.n_regions() * spec.n_periods;
  const int total = spec.total_steps();
  ResponseBuild out;
  out.response.resize(m, r);
  out.prior_mole.resize(m);

  // sample steps are shared by every run
  std::vector<int> step_of(m);
  for (int i = 0; i < m; ++i) step_of[i] = detail::sample_step(track.times_seconds[i], grid, total);

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(grid.cells());
  for (int region = 0; region < spec.n_regions(); ++region) {
    const Eigen::VectorXd pattern = spec.region_pattern(grid, region);
    for (int period = 0; period < spec.n_periods; ++period) {
      const int col = region * spec.n_periods + period;
      const int start = period * spec.steps_per_period;
      const int stop = start + spec.steps_per_period;
      auto flux_at = [&](int s) { return (s >= start && s < stop) ? &pattern : nullptr; };
      const auto fields = run_transport(grid, flux_at, zero, total);
      for (int i = 0; i < m; ++i) {
        const Eigen::MatrixXd profile =
            detail::replicated_profile(fields[step_of[i]][track.cell_index[i]], kernels[i].n_levels());
        out.response(i, col) = apply_to_basis(kernels[i], profile)(0);
      }
    }
  }

  const Eigen::VectorXd prior_flux = spec.prior_flux_field(grid);
  auto prior_at = [&](int) { return &prior_flux; };
  const auto prior_fields = run_transport(grid, prior_at, initial_field, total);
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd profile =
        detail::replicated_profile(prior_fields[step_of[i]][track.cell_index[i]], kernels[i].n_levels());
    out.prior_mole[i] = column_average(kernels[i], profile);
  }
  return out;
}

/// Deterministic sun-synchronous-like track: one pass per orbit sweeping the
/// latitude range at a longitude that precesses by a fixed irrational
/// fraction per orbit. Passes alternate between two training groups; a fixed
/// ground site sampled at regular intervals forms the holdout group.
struct TrackConfig {
  int obs_per_pass = 12;
  double pass_obs_gap_seconds = 15.0;
  double orbit_period_seconds = 99.0 * 60.0;
  double holdout_gap_seconds = 7200.0;
  int holdout_cell_lon = 9;
  int holdout_cell_lat = 9;
};

inline TrackSpec make_track(const SurrogateGrid& grid, const SurrogateBasisSpec& spec,
                            const TrackConfig& cfg) {
  TrackSpec track;
  track.group_ids = {"LG", "LN", "HO"};
  track.group_roles = {GroupRole::Training, GroupRole::Training, GroupRole::Holdout};

  const double horizon = spec.total_steps() * grid.step_seconds;
  const int n_orbits = static_cast<int>(horizon / cfg.orbit_period_seconds);
  const double golden = 0.6180339887498949;
  for (int orbit = 0; orbit < n_orbits; ++orbit) {
    const double start = orbit * cfg.orbit_period_seconds + 120.0;
    const int lon = static_cast<int>(std::floor(std::fmod(orbit * golden, 1.0) * grid.n_lon));
    for (int i = 0; i < cfg.obs_per_pass; ++i) {
      const double t = start + i * cfg.pass_obs_gap_seconds;
      if (t >= horizon) break;
      const int lat = static_cast<int>((i + 0.5) * grid.n_lat / cfg.obs_per_pass) % grid.n_lat;
      track.times_seconds.push_back(t);
      track.cell_index.push_back(grid.cell(lon, lat));
      track.group_index.push_back(orbit % 2);
    }
  }
  for (double t = 600.0; t < horizon; t += cfg.holdout_gap_seconds) {
    track.times_seconds.push_back(t);
    track.cell_index.push_back(grid.cell(cfg.holdout_cell_lon, cfg.holdout_cell_lat));
    track.group_index.push_back(2);
  }
  track.validate(grid.cells());
  return track;
}

/// Complete desk-scale dataset skeleton: basis metadata, response matrix,
/// per-group prior means, prescribed variances, and bias covariates. The
/// observation values themselves are left at zero for the simulation step.
struct SurrogateDataset {
  BasisLibrary basis;
  std::vector<ObservationGroup> groups;  // rows ordered group-major, time-sorted
  std::vector<RetrievalKernel> kernels;  // per observation, in row order
};

struct SurrogateConfig {
  SurrogateGrid grid;
  SurrogateBasisSpec basis;
  TrackConfig track;
  int n_levels = 20;
  double initial_ppm = 400.0;
  double variance_lo = 0.6;   // prescribed-variance range, ppm^2
  double variance_hi = 1.4;
  int n_covariates = 3;
  std::uint64_t dataset_seed = 42;
};

inline SurrogateDataset build_surrogate_dataset(const SurrogateConfig& cfg) {
  cfg.grid.validate();
  cfg.basis.validate(cfg.grid);
  const TrackSpec track = make_track(cfg.grid, cfg.basis, cfg.track);
  const int n_groups = static_cast<int>(track.group_ids.size());

  // group-major, time-sorted row order shared by every per-observation array
  std::vector<std::size_t> order;
  for (int g = 0; g < n_groups; ++g)
    for (std::size_t i = 0; i < track.size(); ++i)
      if (track.group_index[i] == g) order.push_back(i);

  std::vector<RetrievalKernel> kernels_track(track.size());
  for (auto& k : kernels_track) k = surrogate_kernel(cfg.n_levels, cfg.initial_ppm);
  const Eigen::VectorXd initial = Eigen::VectorXd::Constant(cfg.grid.cells(), cfg.initial_ppm);
  const ResponseBuild rb = make_response_functions(cfg.grid, cfg.basis, track, kernels_track, initial);

  SurrogateDataset out;
  out.basis.n_regions = cfg.basis.n_regions();
  out.basis.n_periods = cfg.basis.n_periods;
  out.basis.region_type.assign(out.basis.n_regions, RegionType::Land);
  for (int j = out.basis.n_regions - cfg.basis.n_ocean_regions; j < out.basis.n_regions; ++j)
    out.basis.region_type[j] = RegionType::Ocean;
  const int r = out.basis.size();
  out.basis.flux_integrals = Eigen::VectorXd::Ones(r);  // patterns have unit integral
  out.basis.prior_flux_integrals.resize(r);
  const Eigen::VectorXd prior_flux = cfg.basis.prior_flux_field(cfg.grid);
  for (int j = 0; j < out.basis.n_regions; ++j) {
    double region_total = 0.0;
    for (int c = 0; c < cfg.grid.cells(); ++c)
      if (cfg.basis.region_of_cell(cfg.grid, c) == j) region_total += prior_flux[c];
    for (int k = 0; k < out.basis.n_periods; ++k)
      out.basis.prior_flux_integrals[out.basis.column(j, k)] = region_total * cfg.basis.steps_per_period;
  }

  out.basis.response.resize(track.size(), r);
  out.kernels.resize(track.size());
  Rng rng(cfg.dataset_seed);
  std::size_t row = 0;
  for (int g = 0; g < n_groups; ++g) {
    ObservationGroup group;
    group.id = track.group_ids[g];
    group.role = track.group_roles[g];
    group.error_case = ErrorCase::CaseII;
    std::vector<std::size_t> rows;
    for (std::size_t i : order)
      if (track.group_index[i] == g) rows.push_back(i);
    const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
    group.times.resize(m);
    group.prior_mean.resize(m);
    group.prescribed_var.resize(m);
    group.values = Eigen::VectorXd::Zero(m);
    group.response_rows.resize(m, r);
    const int p = group.role == GroupRole::Training ? cfg.n_covariates : 0;
    Eigen::MatrixXd raw(m, p);
    for (Eigen::Index k = 0; k < m; ++k) {
      const std::size_t i = rows[k];
      group.times[k] = track.times_seconds[i];
      group.prior_mean[k] = rb.prior_mole[i];
      group.prescribed_var[k] = rng.uniform(cfg.variance_lo, cfg.variance_hi);
      group.response_rows.row(k) = rb.response.row(i);
      out.basis.response.row(row) = rb.response.row(i);
      out.kernels[row] = kernels_track[i];
      ++row;
      // Bias covariates with seasonal, meridional, and zonal structure, so a
      // neglected bias projects onto the response functions instead of
      // averaging out as white noise.
      const double horizon = cfg.basis.total_steps() * cfg.grid.step_seconds;
      const double period_frac =
          track.times_seconds[i] / (horizon / cfg.basis.n_periods);
      const double lat_frac =
          static_cast<double>(track.cell_index[i] / cfg.grid.n_lon) / cfg.grid.n_lat;
      const double lon_frac =
          static_cast<double>(track.cell_index[i] % cfg.grid.n_lon) / cfg.grid.n_lon;
      for (int c = 0; c < p; ++c) {
        const double noise = rng.normal();
        if (c == 0)
          raw(k, c) = std::sin(2.0 * std::numbers::pi * period_frac) + 0.15 * noise;
        else if (c == 1)
          raw(k, c) = 2.0 * (lat_frac - 0.5) + 0.15 * noise;
        else
          raw(k, c) = std::cos(2.0 * std::numbers::pi * lon_frac) + 0.15 * noise;
      }
    }
    if (p > 0) {
      auto [standardized, scales] = standardize_covariates(raw);
      group.covariates = standardized;
      group.covariates_raw = raw;
      group.covariate_scales = scales;
    }
    out.groups.push_back(std::move(group));
  }
  return out;
}

}  // namespace fluxinv
