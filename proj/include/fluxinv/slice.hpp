#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "fluxinv/rng.hpp"

namespace fluxinv {

/// One update of a univariate slice sampler with the stepping-out and
/// shrinkage procedures of Neal (2003, Figs. 3 and 5). The slice height is
/// drawn on the log scale and the interval is expanded until both endpoints
/// leave the slice. max_steps is a guard against pathological targets, not
/// part of the kernel: if it trips, the search is retried once with a widened
/// step before giving up.
template <typename LogDensity>
double slice_sample(LogDensity&& log_density, double current, double width, int max_steps, Rng& rng) {
  if (!(width > 0.0)) throw std::invalid_argument("slice_sample: width must be positive");
  const double log_fx = log_density(current);
  if (!std::isfinite(log_fx)) throw std::invalid_argument("slice_sample: log density not finite at current point");
  const double log_y = log_fx - rng.exponential();

  auto find_interval = [&](double w) -> std::pair<double, double> {
    double lower = current - w * rng.uniform();
    double upper = lower + w;
    int lower_budget = max_steps;
    int upper_budget = max_steps;
    while (lower_budget > 0 && log_density(lower) > log_y) {
      lower -= w;
      --lower_budget;
    }
    while (upper_budget > 0 && log_density(upper) > log_y) {
      upper += w;
      --upper_budget;
    }
    if (log_density(lower) > log_y || log_density(upper) > log_y)
      return {std::numeric_limits<double>::quiet_NaN(), 0.0};  // budget exhausted inside the slice
    return {lower, upper};
  };

  auto [lower, upper] = find_interval(width);
  if (std::isnan(lower)) {
    std::tie(lower, upper) = find_interval(width * max_steps);
    if (std::isnan(lower)) throw std::runtime_error("slice_sample: step-out budget exceeded");
  }

  for (int i = 0; i < 1000; ++i) {
    const double proposal = rng.uniform(lower, upper);
    if (log_density(proposal) > log_y) return proposal;
    if (proposal < current)
      lower = proposal;
    else
      upper = proposal;
  }
  throw std::runtime_error("slice_sample: shrinkage failed to terminate");
}

}  // namespace fluxinv
