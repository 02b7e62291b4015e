#include "cubesim/simulator.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "cubesim/errors.hpp"

namespace cubesim {

Trajectory downsample(const Trajectory& full, int n) {
  if (n < 1) throw std::invalid_argument("downsample factor must be >= 1");
  Trajectory out = full;
  out.states.clear();
  for (std::size_t i = 0; i < full.states.size(); i += static_cast<std::size_t>(n)) {
    out.states.push_back(full.states[i]);
  }
  out.rate_hz = full.rate_hz / n;
  return out;
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (downsample < 1) throw std::invalid_argument("downsample must be >= 1");
  if (solver_iters < 1) throw std::invalid_argument("solver_iters must be >= 1");
  if (qp_iters < 1) throw std::invalid_argument("qp_iters must be >= 1");
  if (!(slip_tolerance > 0.0)) throw std::invalid_argument("slip_tolerance must be positive");
  if (!(impedance > 0.0 && impedance <= 1.0)) {
    throw std::invalid_argument("impedance must be in (0, 1]");
  }
  if (!(activation_margin >= 0.0)) throw std::invalid_argument("activation_margin must be >= 0");
}

SolverSettings SimConfig::solver_settings() const {
  SolverSettings s;
  s.slip_tolerance = slip_tolerance;
  s.impedance = impedance;
  s.pgs_iterations = solver_iters;
  s.pgs_tolerance = pgs_tolerance;
  s.qp_iterations = qp_iters;
  s.qp_tolerance = qp_tolerance;
  return s;
}

std::size_t steps_for_samples(std::size_t samples, const SimConfig& cfg) {
  return samples == 0 ? 0 : (samples - 1) * static_cast<std::size_t>(cfg.downsample);
}

SimulationResult try_simulate_steps(const RigidState& x0, const ContactParams& params,
                                    const InertialParams& inertia, const BoxGeometry& geom,
                                    const SimConfig& cfg, std::size_t steps) {
  cfg.validate();
  params.validate();
  inertia.validate();
  geom.validate();
  if (!is_finite(x0)) throw std::invalid_argument("initial state is not finite");

  const SolverSettings settings = cfg.solver_settings();
  // The compliant law only acts on penetrating corners.
  const double margin = params.model == ContactModel::compliant ? 0.0 : cfg.activation_margin;

  SimulationResult result;
  Trajectory& full = result.trajectory;
  full.rate_hz = 1.0 / cfg.dt;
  full.states.reserve(steps + 1);
  RigidState state = x0;
  state.quat.normalize();
  full.states.push_back(state);

  // Previous impulses per body corner.
  std::array<Vec3, 8> cache;
  cache.fill(Vec3::Zero());
  std::vector<Vec3> warm;

  for (std::size_t k = 1; k <= steps; ++k) {
    ContactProblem problem =
        make_contact_problem(state, inertia, detect_contacts(state, geom, margin), cfg.dt);
    warm.clear();
    if (cfg.warm_start) {
      for (const auto& cp : problem.contacts) warm.push_back(cache[cp.feature]);
    }
    ContactImpulse impulse;
    try {
      impulse = solve_contact(problem, params, settings, warm);
    } catch (const SolverNotConverged& e) {
      result.diverged = true;
      result.failure = RolloutFailure::not_converged;
      result.failed_step = k;
      result.solver_residual = e.residual();
      result.solver_iterations = e.iterations();
      result.message = e.what();
      break;
    }
    cache.fill(Vec3::Zero());
    for (std::size_t i = 0; i < problem.size(); ++i) {
      cache[problem.contacts[i].feature] = impulse.per_contact[i];
    }
    if (!impulse.generalized.allFinite()) {
      result.diverged = true;
      result.failure = RolloutFailure::non_finite;
      result.failed_step = k;
      result.message = "non-finite contact impulse";
      break;
    }
    state = step(state, inertia, impulse.generalized, cfg.dt);
    if (!is_finite(state)) {
      result.diverged = true;
      result.failure = RolloutFailure::non_finite;
      result.failed_step = k;
      result.message = "non-finite state";
      break;
    }
    full.states.push_back(state);
  }

  result.trajectory = downsample(full, cfg.downsample);
  return result;
}

Trajectory simulate(const RigidState& x0, const ContactParams& params,
                    const InertialParams& inertia, const BoxGeometry& geom, const SimConfig& cfg,
                    double duration) {
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(duration / cfg.dt));
  SimulationResult r = try_simulate_steps(x0, params, inertia, geom, cfg, steps);
  if (r.failure == RolloutFailure::not_converged) {
    throw SolverNotConverged(r.solver_iterations, r.solver_residual);
  }
  if (r.diverged) throw SimulationDiverged(r.failed_step, r.message);
  return std::move(r.trajectory);
}

}  // namespace cubesim
