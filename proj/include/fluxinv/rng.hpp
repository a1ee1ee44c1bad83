#pragma once

#include <cstdint>
#include <random>

namespace fluxinv {

/// Seedable random stream used throughout the sampler. Distribution objects
/// are constructed per call so draws are a pure function of the engine state,
/// which keeps chains reproducible for a given seed.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }

  double normal(double mean, double sd) {
    return mean + sd * normal();
  }

  /// Gamma with shape/rate parameterisation.
  double gamma(double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(eng_);
  }

  /// Inverse-gamma with shape/rate parameterisation (density ~ x^{-s-1} e^{-r/x}).
  double inverse_gamma(double shape, double rate) { return rate / gamma(shape, 1.0); }

  double beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
  }

  double exponential(double rate = 1.0) {
    return std::exponential_distribution<double>(rate)(eng_);
  }

  std::uint64_t integer() { return eng_(); }

  std::mt19937_64& engine() { return eng_; }

private:
  std::mt19937_64 eng_;
};

/// Derive a distinct, reproducible child seed (splitmix64 finaliser).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace fluxinv
