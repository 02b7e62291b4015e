#include "cubesim/contact_solvers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "cubesim/errors.hpp"

namespace cubesim {

std::string_view to_string(ContactModel model) {
  switch (model) {
    case ContactModel::compliant:
      return "compliant";
    case ContactModel::regularized_convex:
      return "regularized_convex";
    case ContactModel::rigid_pgs:
      return "rigid_pgs";
  }
  return "unknown";
}

ContactModel parse_contact_model(std::string_view name) {
  if (name == "compliant") return ContactModel::compliant;
  if (name == "regularized_convex") return ContactModel::regularized_convex;
  if (name == "rigid_pgs") return ContactModel::rigid_pgs;
  throw std::invalid_argument("unknown contact model '" + std::string(name) + "'");
}

void ContactParams::validate() const {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::invalid_argument("mu must be >= 0");
  if (!(k >= 0.0) || std::isnan(k)) throw std::invalid_argument("k must be >= 0");
  if (!(b >= 0.0) || !std::isfinite(b)) throw std::invalid_argument("b must be >= 0");
}

Eigen::MatrixXd ContactProblem::stacked_jacobian() const {
  Eigen::MatrixXd J(3 * jacobians.size(), 6);
  for (std::size_t i = 0; i < jacobians.size(); ++i) {
    J.middleRows<3>(3 * static_cast<Eigen::Index>(i)) = jacobians[i];
  }
  return J;
}

Eigen::MatrixXd ContactProblem::delassus() const {
  const Eigen::MatrixXd J = stacked_jacobian();
  const Mat6 M_inv = M.llt().solve(Mat6::Identity());
  return J * M_inv * J.transpose();
}

Vec6 ContactProblem::free_velocity() const { return v_minus + h * M.llt().solve(f_ext); }

ContactProblem make_contact_problem(const RigidState& state, const InertialParams& inertia,
                                    std::vector<ContactPoint> contacts, double h) {
  ContactProblem problem;
  problem.jacobians.reserve(contacts.size());
  for (const auto& cp : contacts) problem.jacobians.push_back(contact_jacobian(state, cp));
  problem.contacts = std::move(contacts);
  problem.M = generalized_mass(state, inertia);
  problem.v_minus = state.twist();
  problem.h = h;
  problem.f_ext = external_force(state, inertia);
  return problem;
}

namespace {

void require_model(const ContactParams& params, ContactModel expected) {
  if (params.model != expected) {
    throw std::invalid_argument("contact params are for model '" +
                                std::string(to_string(params.model)) + "', solver expects '" +
                                std::string(to_string(expected)) + "'");
  }
  params.validate();
}

ContactImpulse zero_impulse(std::size_t n) {
  ContactImpulse out;
  out.per_contact.assign(n, Vec3::Zero());
  return out;
}

void accumulate_generalized(const ContactProblem& problem, ContactImpulse& out) {
  out.generalized.setZero();
  for (std::size_t i = 0; i < problem.size(); ++i) {
    out.generalized += problem.jacobians[i].transpose() * out.per_contact[i];
  }
}

Eigen::VectorXd stack(std::span<const Vec3> parts, std::size_t n) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(3 * static_cast<Eigen::Index>(n));
  if (parts.size() == n) {
    for (std::size_t i = 0; i < n; ++i) x.segment<3>(3 * static_cast<Eigen::Index>(i)) = parts[i];
  }
  return x;
}

}  // namespace

double hunt_crossley_normal_force(double k, double b, double delta, double delta_dot) {
  return k * std::max(0.0, 1.0 + b * delta_dot) * std::max(0.0, delta);
}

ContactImpulse hunt_crossley_impulse(const ContactProblem& problem, const ContactParams& params,
                                     const SolverSettings& settings) {
  require_model(params, ContactModel::compliant);
  const double v_s = settings.slip_tolerance;
  if (!(v_s > 0.0)) throw std::invalid_argument("slip tolerance must be positive");

  ContactImpulse out = zero_impulse(problem.size());
  for (std::size_t i = 0; i < problem.size(); ++i) {
    const ContactPoint& cp = problem.contacts[i];
    if (!(cp.delta > 0.0)) continue;
    const double f_n = hunt_crossley_normal_force(params.k, params.b, cp.delta, cp.delta_dot);
    const Vec3 vel = problem.jacobians[i] * problem.v_minus;
    const Eigen::Vector2d v_t = vel.tail<2>();
    // -mu f_n v_t/|v_t| * min(1, |v_t|/v_s)
    const Eigen::Vector2d f_t = -params.mu * f_n * v_t / std::max(v_t.norm(), v_s);
    out.per_contact[i] = problem.h * Vec3(f_n, f_t.x(), f_t.y());
  }
  accumulate_generalized(problem, out);
  return out;
}

Vec3 project_onto_pyramid(const Vec3& impulse, double mu) {
  const double a = impulse.x();
  if (mu <= 0.0) return Vec3(std::max(0.0, a), 0.0, 0.0);

  const double b1 = std::abs(impulse.y());
  const double b2 = std::abs(impulse.z());
  // Minimize phi(n) = (n - a)^2 + sum_i (|b_i| - mu n)_+^2 over n >= 0, then
  // clamp each tangential component. phi is convex and piecewise quadratic
  // with breakpoints at |b_i| / mu.
  auto phi = [&](double n) {
    const double e1 = std::max(0.0, b1 - mu * n);
    const double e2 = std::max(0.0, b2 - mu * n);
    return (n - a) * (n - a) + e1 * e1 + e2 * e2;
  };
  const double lo = std::min(b1, b2) / mu;
  const double hi = std::max(b1, b2) / mu;
  const std::array<double, 3> candidates = {
      // both tangential bounds active, n in [0, lo]
      std::clamp((a + mu * (b1 + b2)) / (1.0 + 2.0 * mu * mu), 0.0, lo),
      // only the larger one active, n in [lo, hi]
      std::clamp((a + mu * std::max(b1, b2)) / (1.0 + mu * mu), lo, hi),
      // neither active, n >= hi
      std::max(a, hi),
  };
  double n = candidates[0];
  for (double c : candidates) {
    if (phi(c) < phi(n)) n = c;
  }
  const double bound = mu * n;
  return Vec3(n, std::clamp(impulse.y(), -bound, bound), std::clamp(impulse.z(), -bound, bound));
}

double reference_normal_velocity(double k, double b, double h, double delta,
                                 double normal_velocity) {
  // Spring-damper on the penetration, integrated implicitly over one step:
  // delta_dot' = delta_dot + h (-k (delta + h delta_dot') - b delta_dot').
  const double denom = 1.0 + h * b + h * h * k;
  if (delta > 0.0) return (normal_velocity + h * k * delta) / denom;
  // Separated: allow closing the gap within the step; never request separation.
  return std::min(0.0, normal_velocity / denom) + delta / h;
}

BaumgarteTerms baumgarte_terms(double k, double b, double h) {
  if (std::isinf(k)) return {1.0, 0.0};
  const double denom = h * k + b;
  if (!(denom > 0.0)) return {0.0, 0.0};
  return {h * k / denom, 1.0 / denom};
}

ContactImpulse regularized_convex_impulse(const ContactProblem& problem,
                                          const ContactParams& params,
                                          const SolverSettings& settings,
                                          std::span<const Vec3> warm_start) {
  require_model(params, ContactModel::regularized_convex);
  const double d = settings.impedance;
  if (!(d > 0.0 && d <= 1.0)) throw std::invalid_argument("impedance must be in (0, 1]");

  const std::size_t n = problem.size();
  if (n == 0) return zero_impulse(0);
  const Eigen::Index m = 3 * static_cast<Eigen::Index>(n);

  const Eigen::MatrixXd J = problem.stacked_jacobian();
  const Eigen::MatrixXd A = problem.delassus();
  const Eigen::VectorXd c_free = J * problem.free_velocity();
  const Eigen::VectorXd c_minus = J * problem.v_minus;

  Eigen::MatrixXd Q = A;
  Q.diagonal() += ((1.0 - d) / d) * A.diagonal();
  Eigen::VectorXd q = c_free;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Index row = 3 * static_cast<Eigen::Index>(i);
    q(row) -= reference_normal_velocity(params.k, params.b, problem.h,
                                        problem.contacts[i].delta, c_minus(row));
  }

  const double L = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Q, Eigen::EigenvaluesOnly)
                       .eigenvalues()
                       .maxCoeff();
  auto project = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd out(m);
    for (Eigen::Index i = 0; i < m; i += 3) {
      out.segment<3>(i) = project_onto_pyramid(x.segment<3>(i), params.mu);
    }
    return out;
  };

  // Accelerated projected gradient with gradient-based adaptive restart.
  Eigen::VectorXd x = project(stack(warm_start, n));
  Eigen::VectorXd y = x;
  double t = 1.0;
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  for (;; ++it) {
    const Eigen::VectorXd g = Q * x + q;
    residual = L * (x - project(x - g / L)).norm();
    if (residual <= settings.qp_tolerance) break;
    if (it >= settings.qp_iterations) throw SolverNotConverged(it, residual);

    const Eigen::VectorXd x_next = project(y - (Q * y + q) / L);
    if ((y - x_next).dot(x_next - x) > 0.0) {
      t = 1.0;
      y = x_next;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = x_next + ((t - 1.0) / t_next) * (x_next - x);
      t = t_next;
    }
    x = x_next;
  }

  ContactImpulse out;
  out.per_contact.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.per_contact[i] = x.segment<3>(3 * static_cast<Eigen::Index>(i));
  }
  out.iterations = it;
  out.residual = residual;
  accumulate_generalized(problem, out);
  return out;
}

ContactImpulse rigid_pgs_impulse(const ContactProblem& problem, const ContactParams& params,
                                 const SolverSettings& settings,
                                 std::span<const Vec3> warm_start) {
  require_model(params, ContactModel::rigid_pgs);
  const std::size_t n = problem.size();
  if (n == 0) return zero_impulse(0);

  const Eigen::MatrixXd J = problem.stacked_jacobian();
  const Eigen::MatrixXd A = problem.delassus();
  const double h = problem.h;
  const BaumgarteTerms bt = baumgarte_terms(params.k, params.b, h);
  // cfm is per unit force; the impulse-level diagonal term is cfm / h.
  const double cfm_impulse = bt.cfm / h;
  const double mu = params.mu;

  Eigen::VectorXd lambda = stack(warm_start, n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Index row = 3 * static_cast<Eigen::Index>(i);
    lambda.segment<3>(row) = project_onto_pyramid(lambda.segment<3>(row), mu);
  }
  // Contact-space velocity for the current iterate.
  Eigen::VectorXd vel = J * problem.free_velocity() + A * lambda;

  Eigen::VectorXd target = Eigen::VectorXd::Zero(3 * static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double delta = problem.contacts[i].delta;
    target(3 * static_cast<Eigen::Index>(i)) = delta > 0.0 ? bt.erp / h * delta : delta / h;
  }

  auto apply = [&](Eigen::Index j, double new_value, double& max_change) {
    const double change = new_value - lambda(j);
    if (change == 0.0) return;
    lambda(j) = new_value;
    vel += A.col(j) * change;
    max_change = std::max(max_change, std::abs(change));
  };

  ContactImpulse out;
  out.converged = false;
  int sweep = 0;
  double max_change = 0.0;
  while (sweep < settings.pgs_iterations) {
    ++sweep;
    max_change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Index r = 3 * static_cast<Eigen::Index>(i);
      // normal row, softened by cfm
      const double ln = lambda(r) + (target(r) - vel(r) - cfm_impulse * lambda(r)) /
                                        (A(r, r) + cfm_impulse);
      apply(r, std::max(0.0, ln), max_change);
      // friction rows, box [-mu ln, mu ln] per direction
      const double bound = mu * lambda(r);
      for (Eigen::Index j = r + 1; j <= r + 2; ++j) {
        const double lt = A(j, j) > 0.0 ? lambda(j) - vel(j) / A(j, j) : 0.0;
        apply(j, std::clamp(lt, -bound, bound), max_change);
      }
    }
    if (max_change < settings.pgs_tolerance) {
      out.converged = true;
      break;
    }
  }

  out.per_contact.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.per_contact[i] = lambda.segment<3>(3 * static_cast<Eigen::Index>(i));
  }
  out.iterations = sweep;
  out.residual = max_change;
  accumulate_generalized(problem, out);
  return out;
}

ContactImpulse solve_contact(const ContactProblem& problem, const ContactParams& params,
                             const SolverSettings& settings, std::span<const Vec3> warm_start) {
  switch (params.model) {
    case ContactModel::compliant:
      return hunt_crossley_impulse(problem, params, settings);
    case ContactModel::regularized_convex:
      return regularized_convex_impulse(problem, params, settings, warm_start);
    case ContactModel::rigid_pgs:
      return rigid_pgs_impulse(problem, params, settings, warm_start);
  }
  throw std::invalid_argument("unknown contact model");
}

}  // namespace cubesim
