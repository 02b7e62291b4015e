#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cubesim/contact_geometry.hpp"

namespace cubesim {

enum class ContactModel {
  compliant,           // Hunt-Crossley penalty force with regularized Coulomb friction
  regularized_convex,  // soft-constraint convex QP over the friction pyramid
  rigid_pgs,           // inelastic rigid contact, PGS with Baumgarte stabilization
};

std::string_view to_string(ContactModel model);
/// Accepts the enum names; throws std::invalid_argument otherwise.
ContactModel parse_contact_model(std::string_view name);

/// Friction `mu`, stiffness `k` and dissipation `b`. Units depend on the model:
/// compliant uses N/m and s/m; regularized_convex uses mass-normalized
/// 1/s^2 and 1/s; rigid_pgs uses N/m and N s/m.
struct ContactParams {
  double mu = 0.0;
  double k = 0.0;
  double b = 0.0;
  ContactModel model = ContactModel::compliant;

  void validate() const;
};

struct SolverSettings {
  double slip_tolerance = 1e-3;  // compliant friction regularization, m/s
  double impedance = 0.9;        // regularized_convex interpolation d in (0, 1]
  int pgs_iterations = 50;
  double pgs_tolerance = 1e-8;   // inf-norm of the impulse change per sweep
  int qp_iterations = 500;
  double qp_tolerance = 1e-10;   // projected-gradient norm
};

struct ContactProblem {
  std::vector<ContactPoint> contacts;
  std::vector<ContactJacobian> jacobians;
  Mat6 M = Mat6::Identity();
  Vec6 v_minus = Vec6::Zero();
  double h = 1.0 / 1480.0;
  Vec6 f_ext = Vec6::Zero();

  std::size_t size() const { return contacts.size(); }

  /// Stacked 3n x 6 Jacobian.
  Eigen::MatrixXd stacked_jacobian() const;
  /// Delassus operator J M^-1 J^T.
  Eigen::MatrixXd delassus() const;
  /// v_minus + h M^-1 f_ext.
  Vec6 free_velocity() const;
};

/// Contacts, Jacobians, mass and non-contact forces for one step from `state`.
ContactProblem make_contact_problem(const RigidState& state, const InertialParams& inertia,
                                    std::vector<ContactPoint> contacts, double h);

struct ContactImpulse {
  /// Per contact (normal, t1, t2) impulse, N s.
  std::vector<Vec3> per_contact;
  Vec6 generalized = Vec6::Zero();
  bool converged = true;
  int iterations = 0;
  double residual = 0.0;
};

/// Explicit Hunt-Crossley normal force k (1 + b delta_dot)_+ delta_+ with
/// friction -mu f_n v_t / max(|v_t|, v_s), integrated over h.
ContactImpulse hunt_crossley_impulse(const ContactProblem& problem, const ContactParams& params,
                                     const SolverSettings& settings = {});

/// Minimizer of 1/2 l^T (A + R) l + l^T (J v_free - v_ref) over the friction
/// pyramid. Throws SolverNotConverged when the iteration cap is hit.
ContactImpulse regularized_convex_impulse(const ContactProblem& problem,
                                          const ContactParams& params,
                                          const SolverSettings& settings = {},
                                          std::span<const Vec3> warm_start = {});

/// Projected Gauss-Seidel on the rigid contact MLCP. Returns the last iterate
/// with `converged == false` when the sweep cap is reached.
ContactImpulse rigid_pgs_impulse(const ContactProblem& problem, const ContactParams& params,
                                 const SolverSettings& settings = {},
                                 std::span<const Vec3> warm_start = {});

/// Dispatch on params.model.
ContactImpulse solve_contact(const ContactProblem& problem, const ContactParams& params,
                             const SolverSettings& settings = {},
                             std::span<const Vec3> warm_start = {});

// Building blocks, exposed for testing.

/// Hunt-Crossley normal force.
double hunt_crossley_normal_force(double k, double b, double delta, double delta_dot);

struct BaumgarteTerms {
  double erp = 0.0;
  double cfm = 0.0;  // 1 / (h k + b), velocity per unit force
};
/// Spring-damper to ERP/CFM mapping. Infinite k gives erp = 1, cfm = 0.
BaumgarteTerms baumgarte_terms(double k, double b, double h);

/// Target post-step separating velocity for one regularized contact.
double reference_normal_velocity(double k, double b, double h, double delta,
                                 double normal_velocity);

/// Euclidean projection onto {n >= 0, |t1| <= mu n, |t2| <= mu n}.
Vec3 project_onto_pyramid(const Vec3& impulse, double mu);

}  // namespace cubesim
