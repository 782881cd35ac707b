#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace megh {

inline constexpr double kLog2Pi = 1.8378770664093454836;
inline constexpr double kZ975 = 1.959963984540054;  // Phi^{-1}(0.975)

// log(1 + e^z), stable for large |z|.
inline double softplus(double z) {
  if (z > 36.0) return z + std::exp(-z);
  if (z < -36.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

// standard normal cdf / survival via erfc
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

inline double sq(double x) { return x * x; }

// SplitMix64 step; used to derive independent per-stream seeds from a master
// seed so that parallel replications are reproducible regardless of schedule.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream + 1));
}

}  // namespace megh
