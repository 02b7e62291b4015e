// Randomized contact problems shared by the solver tests and the acceptance suite.
#pragma once

#include <algorithm>
#include <random>

#include "cubesim/contact_solvers.hpp"

namespace fixtures {

using namespace cubesim;

struct ProblemOptions {
  int contacts = 1;
  bool generic_normals = true;  // false: every normal is +z (table contacts)
  bool gravity = true;
  double delta_lo = -1e-3;
  double delta_hi = 2e-3;
};

// Random body, random lever arms and normals, approaching velocities.
inline ContactProblem random_problem(std::mt19937_64& rng, const ProblemOptions& opt) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  InertialParams inertia;
  inertia.mass = 0.1 + u01(rng);
  const Vec3 diag(0.002 + 0.01 * u01(rng), 0.002 + 0.01 * u01(rng), 0.002 + 0.01 * u01(rng));
  inertia.inertia_body = diag.asDiagonal();
  if (!opt.gravity) inertia.gravity.setZero();

  RigidState s;
  s.p = Vec3(u(rng), u(rng), 0.05);
  s.quat = Quat(u(rng), u(rng), u(rng), u(rng)).normalized();
  s.v = Vec3(2.0 * u(rng), 2.0 * u(rng), -3.0 * u01(rng));
  s.w = 10.0 * Vec3(u(rng), u(rng), u(rng));

  std::vector<ContactPoint> contacts;
  for (int i = 0; i < opt.contacts; ++i) {
    ContactPoint cp;
    Vec3 n = Vec3::UnitZ();
    if (opt.generic_normals) {
      n = Vec3(0.6 * u(rng), 0.6 * u(rng), 1.0).normalized();
    }
    cp.n = n;
    tangent_basis(n, cp.t1, cp.t2);
    const Vec3 arm = 0.05 * Vec3(u(rng), u(rng), u(rng));
    cp.r = s.p + arm;
    cp.delta = opt.delta_lo + (opt.delta_hi - opt.delta_lo) * u01(rng);
    cp.delta_dot = -n.dot(s.v + s.w.cross(arm));
    cp.feature = i;
    contacts.push_back(cp);
  }
  return make_contact_problem(s, inertia, std::move(contacts), 1.0 / 1480.0);
}

inline double kinetic(const ContactProblem& p, const Vec6& twist) {
  return 0.5 * twist.dot(p.M * twist);
}

inline Vec6 post_velocity(const ContactProblem& p, const Vec6& v_start, const Vec6& impulse) {
  return v_start + p.M.llt().solve(impulse);
}

}  // namespace fixtures
