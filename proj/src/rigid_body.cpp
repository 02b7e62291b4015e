#include "cubesim/rigid_body.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace cubesim {

namespace {

bool finite3(const Vec3& x) { return x.allFinite(); }

// Unit quaternion for a rotation vector `phi` (axis * angle).
Quat exp_map(const Vec3& phi) {
  const double angle = phi.norm();
  if (angle < 1e-8) {
    // second-order series; error below machine precision at this size
    const Vec3 xyz = 0.5 * phi;
    return Quat(1.0 - angle * angle / 8.0, xyz.x(), xyz.y(), xyz.z());
  }
  const double half = 0.5 * angle;
  const Vec3 xyz = std::sin(half) / angle * phi;
  return Quat(std::cos(half), xyz.x(), xyz.y(), xyz.z());
}

}  // namespace

Vec6 RigidState::twist() const {
  Vec6 t;
  t << v, w;
  return t;
}

bool is_finite(const RigidState& s) {
  return finite3(s.p) && s.quat.coeffs().allFinite() && finite3(s.v) && finite3(s.w);
}

InertialParams InertialParams::cube() { return InertialParams{}; }

void InertialParams::validate() const {
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw std::invalid_argument("mass must be positive and finite");
  }
  if (!inertia_body.allFinite() || !inertia_body.isApprox(inertia_body.transpose(), 1e-12)) {
    throw std::invalid_argument("inertia must be finite and symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(inertia_body, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw std::invalid_argument("inertia must be positive definite");
  }
  if (!gravity.allFinite()) {
    throw std::invalid_argument("gravity must be finite");
  }
}

Mat3 world_inertia(const Quat& quat, const InertialParams& inertia) {
  const Mat3 R = quat.toRotationMatrix();
  return R * inertia.inertia_body * R.transpose();
}

Mat6 generalized_mass(const RigidState& state, const InertialParams& inertia) {
  Mat6 M = Mat6::Zero();
  M.topLeftCorner<3, 3>() = inertia.mass * Mat3::Identity();
  M.bottomRightCorner<3, 3>() = world_inertia(state.quat, inertia);
  return M;
}

Vec6 external_force(const RigidState& state, const InertialParams& inertia) {
  const Mat3 I = world_inertia(state.quat, inertia);
  Vec6 f;
  f << inertia.mass * inertia.gravity, -state.w.cross(I * state.w);
  return f;
}

RigidState step(const RigidState& state, const InertialParams& inertia, const Vec6& impulse,
                double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("step: dt must be positive and finite");
  }
  if (!is_finite(state) || !impulse.allFinite()) {
    std::ostringstream msg;
    msg << "step: non-finite input (p=" << state.p.transpose() << ", v=" << state.v.transpose()
        << ", w=" << state.w.transpose() << ", impulse=" << impulse.transpose() << ")";
    throw std::invalid_argument(msg.str());
  }

  const Mat3 R = state.quat.toRotationMatrix();
  const Mat3 I = R * inertia.inertia_body * R.transpose();
  const Mat3 I_inv = R * inertia.inertia_body.inverse() * R.transpose();

  RigidState next;
  next.v = state.v + dt * inertia.gravity + impulse.head<3>() / inertia.mass;
  const Vec3 gyro = -state.w.cross(I * state.w);
  next.w = state.w + I_inv * (dt * gyro + impulse.tail<3>());

  next.p = state.p + dt * next.v;
  // world-frame angular velocity composes on the left
  next.quat = exp_map(dt * next.w) * state.quat;
  next.quat.normalize();
  return next;
}

double kinetic_energy(const RigidState& state, const InertialParams& inertia) {
  const Mat3 I = world_inertia(state.quat, inertia);
  return 0.5 * inertia.mass * state.v.squaredNorm() + 0.5 * state.w.dot(I * state.w);
}

}  // namespace cubesim
