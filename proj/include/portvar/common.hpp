#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

namespace portvar {

inline constexpr const char* kVersion = "portvar 0.1.0";

using Complex = std::complex<double>;

/// Thrown when a numerical procedure cannot produce a usable result
/// (invalid input throws std::invalid_argument instead).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// SplitMix64-style hash, used to derive independent per-path seeds so that
/// retry draws do not depend on thread scheduling.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform draw on the complex unit circle.
inline Complex random_unit_complex(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double theta = 2.0 * std::numbers::pi * u(rng);
  return {std::cos(theta), std::sin(theta)};
}

/// Exact binomial coefficient as a double; valid well past the orders used here.
inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
  return std::round(r);
}

}  // namespace portvar
