#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace sdae {

/// Precomputed Wiener increments for one path: an n_steps x d matrix with
/// entries Normal(0, dt), reproducible bit-exactly from (seed, path_index).
struct WienerPath {
  int d = 0;
  double dt = 0.0;
  Eigen::MatrixXd increments;  // n_steps x d

  int n_steps() const { return static_cast<int>(increments.rows()); }
};

WienerPath wiener_path(std::uint64_t seed, std::uint64_t path_index, int d,
                       int n_steps, double dt);

/// On-demand increments addressed by (epoch, step, driver). Epoch 0 matches
/// wiener_path entry for entry; bumping the epoch yields a fresh stream for
/// retry loops configured to resample.
class WienerSource {
 public:
  WienerSource(std::uint64_t seed, std::uint64_t path_index, int d, double dt)
      : seed_(seed), path_(path_index), d_(d), dt_(dt) {}

  double increment(std::uint64_t epoch, std::uint64_t step, int driver) const;
  double dt() const { return dt_; }
  int drivers() const { return d_; }

 private:
  std::uint64_t seed_;
  std::uint64_t path_;
  int d_;
  double dt_;
};

}  // namespace sdae
