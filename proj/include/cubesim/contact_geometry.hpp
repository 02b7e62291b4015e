#pragma once

#include <vector>

#include "cubesim/rigid_body.hpp"

namespace cubesim {

struct BoxGeometry {
  Vec3 half_extents = Vec3::Constant(0.05);

  /// 10 cm cube.
  static BoxGeometry cube(double side_length = 0.1);

  void validate() const;

  /// Body-frame corner `index` (0..7). Bits of the index select the sign of
  /// x, y, z (most significant first), clear bit = negative, so the order is
  /// lexicographic over the corner signs.
  Vec3 corner(int index) const;
};

/// One point contact between the body and the table.
struct ContactPoint {
  Vec3 r = Vec3::Zero();   // witness point, world
  Vec3 n = Vec3::UnitZ();  // unit normal pointing into the body
  Vec3 t1 = Vec3::UnitX();
  Vec3 t2 = Vec3::UnitY();
  double delta = 0.0;      // penetration depth, > 0 when overlapping
  double delta_dot = 0.0;  // > 0 when deepening
  int feature = -1;        // body corner index, used to carry warm starts
};

/// Contact-frame rows (n, t1, t2) mapping the body twist (v, w) to the
/// witness-point velocity.
using ContactJacobian = Eigen::Matrix<double, 3, 6>;

/// Orthonormal tangent basis for a unit normal. +z yields (+x, +y).
void tangent_basis(const Vec3& n, Vec3& t1, Vec3& t2);

/// Box corners whose height above the z = 0 table is below
/// `activation_margin`, in corner-index order.
std::vector<ContactPoint> detect_contacts(const RigidState& state, const BoxGeometry& geom,
                                          double activation_margin);

ContactJacobian contact_jacobian(const RigidState& state, const ContactPoint& cp);

}  // namespace cubesim
