#include "cubesim/contact_geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace cubesim {

BoxGeometry BoxGeometry::cube(double side_length) {
  BoxGeometry g;
  g.half_extents = Vec3::Constant(0.5 * side_length);
  g.validate();
  return g;
}

void BoxGeometry::validate() const {
  if (!half_extents.allFinite() || !(half_extents.minCoeff() > 0.0)) {
    throw std::invalid_argument("box half extents must be positive");
  }
}

Vec3 BoxGeometry::corner(int index) const {
  const double sx = (index & 4) ? 1.0 : -1.0;
  const double sy = (index & 2) ? 1.0 : -1.0;
  const double sz = (index & 1) ? 1.0 : -1.0;
  return Vec3(sx * half_extents.x(), sy * half_extents.y(), sz * half_extents.z());
}

void tangent_basis(const Vec3& n, Vec3& t1, Vec3& t2) {
  // Project +x (or +y when n is near x) onto the tangent plane.
  const Vec3 seed = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  t1 = (seed - n.dot(seed) * n).normalized();
  t2 = n.cross(t1);
}

std::vector<ContactPoint> detect_contacts(const RigidState& state, const BoxGeometry& geom,
                                          double activation_margin) {
  std::vector<ContactPoint> contacts;
  const Mat3 R = state.quat.toRotationMatrix();
  for (int i = 0; i < 8; ++i) {
    const Vec3 arm = R * geom.corner(i);
    const Vec3 r = state.p + arm;
    if (!(r.z() < activation_margin)) continue;
    ContactPoint cp;
    cp.r = r;
    cp.n = Vec3::UnitZ();
    tangent_basis(cp.n, cp.t1, cp.t2);
    cp.delta = -r.z();
    const Vec3 vel = state.v + state.w.cross(arm);
    cp.delta_dot = -cp.n.dot(vel);
    cp.feature = i;
    contacts.push_back(cp);
  }
  return contacts;
}

ContactJacobian contact_jacobian(const RigidState& state, const ContactPoint& cp) {
  const Vec3 arm = cp.r - state.p;
  ContactJacobian J;
  const Vec3* dirs[3] = {&cp.n, &cp.t1, &cp.t2};
  for (int row = 0; row < 3; ++row) {
    const Vec3& d = *dirs[row];
    // d . (v + w x arm) = d . v + w . (arm x d)
    J.block<1, 3>(row, 0) = d.transpose();
    J.block<1, 3>(row, 3) = arm.cross(d).transpose();
  }
  return J;
}

}  // namespace cubesim
