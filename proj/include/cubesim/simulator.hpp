#pragma once

#include <string>

#include "cubesim/contact_solvers.hpp"
#include "cubesim/trajectory.hpp"

namespace cubesim {

struct SimConfig {
  double dt = 1.0 / 1480.0;
  int downsample = 10;
  int solver_iters = 50;          // PGS sweeps
  double slip_tolerance = 1e-3;   // m/s
  double activation_margin = 1e-3;
  double impedance = 0.9;
  int qp_iters = 500;
  double qp_tolerance = 1e-10;
  double pgs_tolerance = 1e-8;
  bool warm_start = true;

  void validate() const;
  SolverSettings solver_settings() const;
  double output_rate() const { return 1.0 / (dt * downsample); }
};

enum class RolloutFailure { none, non_finite, not_converged };

struct SimulationResult {
  Trajectory trajectory;  // states up to the failure, downsampled
  bool diverged = false;  // any failure
  RolloutFailure failure = RolloutFailure::none;
  std::size_t failed_step = 0;  // 1-based index of the step that failed
  double solver_residual = 0.0;
  int solver_iterations = 0;
  std::string message;
};

/// Rolls out `steps` integration steps without throwing on divergence.
SimulationResult try_simulate_steps(const RigidState& x0, const ContactParams& params,
                                    const InertialParams& inertia, const BoxGeometry& geom,
                                    const SimConfig& cfg, std::size_t steps);

/// Rolls out round(duration / dt) steps and downsamples by cfg.downsample.
/// Throws SimulationDiverged (carrying the failing step) on a non-finite
/// state and SolverNotConverged when the regularized convex solver stalls.
Trajectory simulate(const RigidState& x0, const ContactParams& params,
                    const InertialParams& inertia, const BoxGeometry& geom, const SimConfig& cfg,
                    double duration);

/// Number of integration steps covering `samples` output samples.
std::size_t steps_for_samples(std::size_t samples, const SimConfig& cfg);

}  // namespace cubesim
