#pragma once

#include <cmath>
#include <cstdint>

namespace sdae {

// Counter-based random numbers: every variate is a pure function of the
// 64-bit words fed to the mixer, so streams can be replayed from any index
// and paths can be generated in parallel without shared state.

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = mix64(a ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  return h;
}

/// Uniform in (0, 1]: never returns 0, so it is safe under log().
inline double to_unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace detail

/// One standard normal variate addressed by (seed, stream, counter).
inline double counter_normal(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t counter) {
  const std::uint64_t h = detail::hash3(seed, stream, counter);
  const double u1 = detail::to_unit_open(detail::mix64(h ^ 0xd1b54a32d192ed03ULL));
  const double u2 = detail::to_unit_open(detail::mix64(h ^ 0x8cb92ba72f3d8dd7ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

/// Uniform in [lo, hi) addressed the same way.
inline double counter_uniform(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t counter, double lo, double hi) {
  const std::uint64_t h = detail::hash3(seed, stream, counter);
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

/// Small stateful view over the counter stream, for sampling loops.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  double normal() { return counter_normal(seed_, stream_, next_++); }
  double uniform(double lo, double hi) {
    return counter_uniform(seed_, stream_, next_++, lo, hi);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t next_ = 0;
};

}  // namespace sdae
