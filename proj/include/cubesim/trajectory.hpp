#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cubesim/rigid_body.hpp"

namespace cubesim {

/// Uniformly sampled states. `states[0]` is the rollout initial condition.
struct Trajectory {
  double rate_hz = 148.0;
  double start_time = 0.0;  // s
  std::vector<RigidState> states;

  std::string name;
  std::string body = "cube";
  std::optional<double> side_length_m;
  std::optional<double> mass_kg;

  std::size_t size() const { return states.size(); }
  double duration() const {
    return states.empty() ? 0.0 : static_cast<double>(states.size() - 1) / rate_hz;
  }
};

/// Keeps samples 0, n, 2n, ... and divides the rate by n.
Trajectory downsample(const Trajectory& full, int n);

}  // namespace cubesim
