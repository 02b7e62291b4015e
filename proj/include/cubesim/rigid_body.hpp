#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace cubesim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Quat = Eigen::Quaterniond;

/// State of one free body. Velocities are expressed in the world frame;
/// `quat` maps body-frame vectors to the world frame.
struct RigidState {
  Vec3 p = Vec3::Zero();
  Quat quat = Quat::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 w = Vec3::Zero();

  /// Stacked (v, w).
  Vec6 twist() const;
};

bool is_finite(const RigidState& s);

struct InertialParams {
  double mass = 0.37;
  Mat3 inertia_body = Mat3::Identity() * 0.0081;
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);

  /// Mass 0.37 kg, isotropic inertia 0.0081 kg m^2.
  static InertialParams cube();

  /// Throws std::invalid_argument unless mass > 0 and the inertia is SPD.
  void validate() const;
};

Mat3 world_inertia(const Quat& quat, const InertialParams& inertia);

/// 6x6 generalized mass diag(m I, I_world).
Mat6 generalized_mass(const RigidState& state, const InertialParams& inertia);

/// Non-contact generalized force: gravity on the linear block, the
/// gyroscopic torque -w x (I w) on the angular block.
Vec6 external_force(const RigidState& state, const InertialParams& inertia);

/// One semi-implicit Euler step. `impulse` is the contact impulse at the
/// COM (linear N s, angular N m s, world frame). Velocities update first,
/// then the pose with the new velocities; the orientation advances by the
/// exponential map of dt * w' and is renormalized.
RigidState step(const RigidState& state, const InertialParams& inertia, const Vec6& impulse,
                double dt);

/// 1/2 m |v|^2 + 1/2 w^T I_world w.
double kinetic_energy(const RigidState& state, const InertialParams& inertia);

}  // namespace cubesim
