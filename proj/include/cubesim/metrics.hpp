#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cubesim/simulator.hpp"
#include "cubesim/trajectory.hpp"

namespace cubesim {

/// Angle in [0, pi] of the relative rotation. Throws std::invalid_argument
/// for quaternions whose norm is off by more than 1e-6.
double rotation_angle(const Quat& q1, const Quat& q2);
double rotation_angle(const Mat3& R1, const Mat3& R2);

struct ErrorReport {
  double e_q = 0.0;
  double mean_position_error_frac = 0.0;  // mean |dp| / l
  double mean_rotation_error_deg = 0.0;
  std::vector<double> e_q_series;       // per-sample summand of e_q
  std::vector<double> position_error;   // |dp|, m
  std::vector<double> rotation_error;   // rad
};

/// Cube configuration error: mean over samples of (2/l)|dp|^2 + angle^2.
/// Velocities are ignored.
ErrorReport cube_config_error(const Trajectory& truth, const Trajectory& sim, double l);

/// sum_t x~^T W x~ for x~ = truth_t - sim_t, W = diag(weights).
double weighted_state_error(std::span<const Eigen::VectorXd> truth,
                            std::span<const Eigen::VectorXd> sim, const Eigen::VectorXd& weights);

/// (p, qw, qx, qy, qz, v, w).
Eigen::VectorXd state_vector(const RigidState& s);

struct WeightProfile {
  std::vector<std::string> names;
  Eigen::VectorXd weights;
};

/// Biped landing weights over the floating-base state q (23) and v (22):
/// 10 on every position, velocity weights 5 on base rotation, 100 on base
/// translation, 0.01 on hip roll / knee spring / toe, 0 on the unmeasured
/// heel spring, 1 elsewhere.
WeightProfile cassie_weight_profile();

/// Everything a rollout needs besides the contact parameters.
struct SimContext {
  InertialParams inertia = InertialParams::cube();
  BoxGeometry geom = BoxGeometry::cube();
  SimConfig cfg;
  double penalty = 1e3;
  int workers = 1;

  double side_length() const { return 2.0 * geom.half_extents.x(); }
};

struct DatasetLoss {
  double mean = 0.0;
  std::vector<double> per_trajectory;
  std::vector<ErrorReport> reports;  // empty report for diverged rollouts
  std::vector<bool> diverged;
  std::size_t diverged_count() const;
};

/// Mean e_q over the dataset, each trajectory simulated from its first
/// sample for its own length. Failed rollouts score ctx.penalty.
DatasetLoss dataset_loss(std::span<const Trajectory> dataset, const ContactParams& params,
                         const SimContext& ctx);

/// Mean and population standard deviation.
struct Stat {
  double mean = 0.0;
  double stddev = 0.0;
};
Stat mean_and_stddev(std::span<const double> values);

}  // namespace cubesim
