#pragma once

#include <cstdint>
#include <vector>

#include "cubesim/metrics.hpp"

namespace cubesim {

/// Ranges for randomized cube tosses. Initial poses are drawn uniformly in
/// these boxes with a uniformly random orientation.
struct TossDistribution {
  double height_min = 0.12;  // COM height, m
  double height_max = 0.30;
  double horizontal_speed_max = 1.5;  // |vx|, |vy| bound, m/s
  double vertical_speed_min = -1.5;
  double vertical_speed_max = 0.0;
  double angular_speed_max = 6.0;  // per-axis bound, rad/s
  double duration = 1.0;           // s

  /// Low, flat-ish tosses with fast horizontal motion; most of each
  /// trajectory is spent sliding.
  static TossDistribution sliding();
};

/// Small deterministic generator (splitmix64) so datasets are identical
/// across standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

RigidState random_toss_state(SplitMix64& rng, const TossDistribution& dist);

/// Simulates `count` tosses at `params` and returns them as ground-truth
/// trajectories named toss_000, toss_001, ... with cube metadata attached.
/// Tosses whose rollout fails are redrawn.
std::vector<Trajectory> synthetic_cube_dataset(std::size_t count, std::uint64_t seed,
                                               const ContactParams& params,
                                               const SimContext& ctx,
                                               const TossDistribution& dist = {});

}  // namespace cubesim
