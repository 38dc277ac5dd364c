#include "sdae/wiener.hpp"

#include <cmath>

#include "sdae/error.hpp"
#include "sdae/rng.hpp"

namespace sdae {

namespace {

// Counter layout: epoch in the high bits, (step * d + driver) below. Steps
// stay comfortably under 2^36 at any realistic horizon.
std::uint64_t encode(std::uint64_t epoch, std::uint64_t step, int driver, int d) {
  return (epoch << 40) + step * static_cast<std::uint64_t>(d) +
         static_cast<std::uint64_t>(driver);
}

}  // namespace

WienerPath wiener_path(std::uint64_t seed, std::uint64_t path_index, int d,
                       int n_steps, double dt) {
  if (n_steps < 1 || d < 1 || dt <= 0.0) {
    fail(ErrorCode::ConfigInvalid, "wiener_path requires n_steps, d >= 1 and dt > 0");
  }
  WienerPath path;
  path.d = d;
  path.dt = dt;
  path.increments.resize(n_steps, d);
  const double scale = std::sqrt(dt);
  for (int k = 0; k < n_steps; ++k) {
    for (int l = 0; l < d; ++l) {
      path.increments(k, l) =
          scale * counter_normal(seed, path_index, encode(0, k, l, d));
    }
  }
  return path;
}

double WienerSource::increment(std::uint64_t epoch, std::uint64_t step,
                               int driver) const {
  return std::sqrt(dt_) *
         counter_normal(seed_, path_, encode(epoch, step, driver, d_));
}

}  // namespace sdae
