#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dspg {

// All stochastic components draw through the helpers below so that a stream's
// output is fully determined by its seed and the draw sequence, independent of
// standard-library distribution internals.
using Rng = std::mt19937_64;

inline std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Decorrelated sub-stream seed. Distinct salts give distinct streams; chain
// calls for multi-part salts.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) noexcept {
  return mix64(base ^ (0xd1342543de82ef95ULL * (salt + 1)));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt1,
                                 std::uint64_t salt2) noexcept {
  return derive_seed(derive_seed(base, salt1), salt2);
}

// Stream tags used when deriving the per-run sub-streams from a master seed.
namespace stream {
inline constexpr std::uint64_t kEstimator = 0x01;
inline constexpr std::uint64_t kActivation = 0x02;
inline constexpr std::uint64_t kNetwork = 0x03;
inline constexpr std::uint64_t kInit = 0x04;
inline constexpr std::uint64_t kObjective = 0x05;
inline constexpr std::uint64_t kShareNetwork = 0x06;
inline constexpr std::uint64_t kTrial = 0x07;
inline constexpr std::uint64_t kDiagnostics = 0x08;
}  // namespace stream

// Uniform on [0, 1), 53-bit resolution, one engine call.
inline double uniform01(Rng& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

inline bool bernoulli(Rng& g, double p) { return uniform01(g) < p; }

// Symmetric Bernoulli sign; exactly one engine call.
inline double sign_draw(Rng& g) { return (g() >> 63) ? 1.0 : -1.0; }

// Uniform integer on {0, ..., n-1} via 128-bit multiply (no modulo bias).
inline std::uint64_t uniform_below(Rng& g, std::uint64_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(g()) * n) >> 64);
}

// Standard normal via Box-Muller; consumes exactly two engine calls.
inline double normal(Rng& g) {
  const double u1 = static_cast<double>((g() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

}  // namespace dspg
