// Acceptance checks; one PASS/FAIL/SKIP line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "cubesim/commands.hpp"
#include "cubesim/errors.hpp"
#include "cubesim/synthetic.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cubesim;

namespace {

struct Outcome {
  enum Kind { pass, fail, skip } kind = fail;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Outcome::pass : Outcome::fail, std::move(detail)}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1 ------------------------------------------------------------------------
Outcome ballistic() {
  const auto t0 = std::chrono::steady_clock::now();
  const InertialParams inertia = InertialParams::cube();
  SimConfig cfg;
  cfg.downsample = 1;
  RigidState x0;
  x0.p = Vec3(0.1, -0.2, 5.0);
  x0.v = Vec3(1.5, -0.5, 2.0);
  x0.w = Vec3(3.0, -2.0, 1.0);
  double worst = 0.0;
  for (const ContactParams& p : {preset_params("cube-drake"), preset_params("cube-mujoco-style"),
                                 preset_params("cube-bullet-style")}) {
    const Trajectory t = simulate(x0, p, inertia, BoxGeometry::cube(), cfg, 0.5);
    for (std::size_t n = 0; n < t.size(); ++n) {
      const long k = static_cast<long>(n);
      worst = std::max(worst, (t.states[n].p - oracle::projectile_position(x0.p, x0.v, inertia.gravity,
                                                                           cfg.dt, k)).cwiseAbs().maxCoeff());
      worst = std::max(worst, (t.states[n].v - oracle::projectile_velocity(x0.v, inertia.gravity,
                                                                           cfg.dt, k)).cwiseAbs().maxCoeff());
    }
  }
  const double secs = seconds_since(t0);
  return verdict(worst <= 1e-12 && secs < 1.0,
                 fmt("max deviation %.2e over 740 steps x 3 models, %.3f s", worst, secs));
}

// 2 ------------------------------------------------------------------------
// Point mass on the library's compliant contact at the simulation step,
// against the independent oracle at a 100x finer step.
Outcome compliant_drop() {
  const auto t0 = std::chrono::steady_clock::now();
  const ContactParams params = preset_params("cube-drake");
  const double h = 1.0 / 1480.0, z0 = 0.05;
  InertialParams inertia = InertialParams::cube();

  RigidState s;
  s.p = Vec3(0, 0, z0);
  double peak = 0.0, apex = 0.0;
  bool touched = false, left = false;
  for (int i = 0; i < 5 * 1480; ++i) {
    std::vector<ContactPoint> contacts;
    if (s.p.z() < 0.0) {
      ContactPoint cp;
      cp.r = s.p;
      cp.delta = -s.p.z();
      cp.delta_dot = -s.v.z();
      contacts.push_back(cp);
    }
    const ContactProblem problem = make_contact_problem(s, inertia, contacts, h);
    s = step(s, inertia, hunt_crossley_impulse(problem, params).generalized, h);
    if (s.p.z() < 0.0) touched = true;
    if (touched) peak = std::max(peak, -s.p.z());
    if (touched && s.p.z() > 0.0) left = true;
    if (left) {
      apex = std::max(apex, s.p.z());
      if (s.v.z() < 0.0) break;
    }
  }
  const oracle::DropResult ref = oracle::point_mass_drop(inertia.mass, params.k, params.b, z0, h / 100.0);
  const double e_peak = std::abs(peak - ref.peak_penetration) / ref.peak_penetration;
  const double e_apex = std::abs(apex - ref.rebound_apex) / ref.rebound_apex;
  const double secs = seconds_since(t0);
  return verdict(e_peak <= 0.01 && e_apex <= 0.01 && secs < 10.0,
                 fmt("peak %.4e vs %.4e m (%.2f%%), apex %.4e vs %.4e m (%.2f%%), %.2f s", peak,
                     ref.peak_penetration, 100 * e_peak, apex, ref.rebound_apex, 100 * e_apex, secs));
}

// 3 ------------------------------------------------------------------------
Outcome lcp_oracle() {
  std::mt19937_64 rng(2024);
  SolverSettings settings;
  settings.pgs_iterations = 200000;
  settings.pgs_tolerance = 1e-14;
  int converged = 0;
  double worst_err = 0.0, worst_comp = 0.0;
  const int total = 1000;
  for (int trial = 0; trial < total; ++trial) {
    fixtures::ProblemOptions opt;
    opt.contacts = 1 + trial % 4;
    const ContactProblem p = fixtures::random_problem(rng, opt);
    const ContactParams params = trial % 2 ? ContactParams{0.0, 1800.0, 27.0, ContactModel::rigid_pgs}
                                           : ContactParams{0.0, kInf, 0.0, ContactModel::rigid_pgs};
    const ContactImpulse imp = rigid_pgs_impulse(p, params, settings);
    if (!imp.converged) continue;
    ++converged;
    const Eigen::MatrixXd A = p.delassus();
    const Eigen::VectorXd c = p.stacked_jacobian() * p.free_velocity();
    const BaumgarteTerms bt = baumgarte_terms(params.k, params.b, p.h);
    const int n = opt.contacts;
    Eigen::MatrixXd M(n, n);
    Eigen::VectorXd q(n), lam(n);
    for (int i = 0; i < n; ++i) {
      const double d = p.contacts[i].delta;
      q(i) = c(3 * i) - (d > 0.0 ? bt.erp / p.h * d : d / p.h);
      for (int j = 0; j < n; ++j) M(i, j) = A(3 * i, 3 * j);
      M(i, i) += bt.cfm / p.h;
      lam(i) = imp.per_contact[i].x();
    }
    Eigen::VectorXd x;
    if (!oracle::lcp_enumerate(M, q, x)) return verdict(false, fmt("oracle found no solution in trial %d", trial));
    worst_err = std::max(worst_err, (lam - x).cwiseAbs().maxCoeff());
    worst_comp = std::max(worst_comp, lam.cwiseProduct(M * lam + q).cwiseAbs().maxCoeff());
  }
  return verdict(converged == total && worst_err <= 1e-6 && worst_comp < 1e-8,
                 fmt("%d/%d converged, max impulse error %.2e, max complementarity %.2e", converged,
                     total, worst_err, worst_comp));
}

// 4 ------------------------------------------------------------------------
Outcome friction_cone() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> umu(0.0, 1.2);
  const int total = 100000;
  int bad = 0, failures = 0;
  double worst = 0.0;
  for (int trial = 0; trial < total; ++trial) {
    fixtures::ProblemOptions opt;
    opt.contacts = 1 + trial % 4;
    opt.generic_normals = (trial / 3) % 2 == 0;
    const ContactProblem p = fixtures::random_problem(rng, opt);
    const ContactModel model = static_cast<ContactModel>(trial % 3);
    const ContactParams params{umu(rng), 3300.0, 45.0, model};
    ContactImpulse imp;
    try {
      imp = solve_contact(p, params);
    } catch (const SolverNotConverged&) {
      ++failures;
      continue;
    }
    for (const Vec3& l : imp.per_contact) {
      double excess = std::max({-l.x(), std::abs(l.y()) - params.mu * l.x(),
                                std::abs(l.z()) - params.mu * l.x()});
      if (model == ContactModel::compliant) excess = std::max(excess, l.tail<2>().norm() - params.mu * l.x());
      worst = std::max(worst, excess);
      if (excess > 1e-9) ++bad;
    }
  }
  return verdict(bad == 0 && failures == 0,
                 fmt("%d calls, %d violations, %d solver failures, worst excess %.2e", total, bad,
                     failures, worst));
}

// 5 ------------------------------------------------------------------------
Outcome dissipation() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> umu(0.0, 1.2);
  const int total = 100000;
  int bad = 0;
  double worst = -kInf;
  for (int trial = 0; trial < total; ++trial) {
    fixtures::ProblemOptions opt;
    opt.contacts = 1 + trial % 4;
    opt.generic_normals = (trial / 2) % 2 == 0;
    opt.gravity = false;
    opt.delta_lo = -1e-3;
    opt.delta_hi = 0.0;  // no penetration to recover
    ContactProblem p = fixtures::random_problem(rng, opt);
    p.f_ext.setZero();
    const ContactParams params = trial % 2 ? ContactParams{umu(rng), 1800.0, 27.0, ContactModel::rigid_pgs}
                                           : ContactParams{umu(rng), 3300.0, 45.0, ContactModel::regularized_convex};
    const ContactImpulse imp = solve_contact(p, params);
    const double before = fixtures::kinetic(p, p.v_minus);
    const double after = fixtures::kinetic(p, fixtures::post_velocity(p, p.v_minus, imp.generalized));
    const double gain = (after - before) / std::max(before, 1e-12);
    worst = std::max(worst, gain);
    if (after > before * (1.0 + 1e-12) + 1e-15) ++bad;
  }
  return verdict(bad == 0, fmt("%d impact states, %d energy increases, largest relative change %+.2e",
                               total, bad, worst));
}

// 6 ------------------------------------------------------------------------
Outcome resting() {
  const InertialParams inertia = InertialParams::cube();
  RigidState x0;
  x0.p = Vec3(0, 0, 0.05);
  std::string detail;
  bool ok = true;
  for (const std::string& name : preset_names()) {
    const ContactParams p = preset_params(name);
    const Trajectory t = simulate(x0, p, inertia, BoxGeometry::cube(), SimConfig{}, 5.0);
    double drift = 0.0, rot = 0.0;
    for (const auto& s : t.states) {
      drift = std::max(drift, (s.p - x0.p).norm());
      rot = std::max(rot, rotation_angle(s.quat, x0.quat) * 180.0 / std::numbers::pi);
    }
    ok = ok && drift < 1e-3 && rot < 0.5;
    detail += fmt("%s drift %.3f mm rot %.2e deg; ", name.c_str(), drift * 1e3, rot);
    if (p.model == ContactModel::compliant) {
      const double expected = inertia.mass * -inertia.gravity.z() / (p.k * 4.0);
      const double actual = 0.05 - t.states.back().p.z();
      const double err = std::abs(actual - expected) / expected;
      ok = ok && err <= 0.05;
      detail += fmt("static penetration %.4e vs %.4e m (%.2f%%); ", actual, expected, 100 * err);
    }
  }
  if (detail.size() >= 2) detail.resize(detail.size() - 2);
  return verdict(ok, detail);
}

// 7 ------------------------------------------------------------------------
Outcome identification() {
  const auto t0 = std::chrono::steady_clock::now();
  const ContactParams truth{0.25, 4000.0, 0.8, ContactModel::compliant};
  RunConfig cfg;
  cfg.command = "identify";
  cfg.params.model = ContactModel::compliant;
  cfg.domain = ParamDomain::cube(ContactModel::compliant);
  cfg.domain_source = "cube";
  cfg.optimizer.seed = 1;
  cfg.workers = workers_from_env(1);
  const auto data = synthetic_cube_dataset(25, 123, truth, cfg.context());
  const ResultsDocument doc = cmd_identify(cfg, data);
  const double mu = doc.parameters->mu;
  const double loss = doc.identification["loss"].get<double>();
  const double secs = seconds_since(t0);
  return verdict(std::abs(mu - truth.mu) <= 0.02 && loss <= 1e-3 && secs < 600.0,
                 fmt("mu %.4f (true %.2f), k %.1f, b %.3f, loss %.2e, %zu evaluations, %.1f s", mu,
                     truth.mu, doc.parameters->k, doc.parameters->b, loss,
                     doc.identification["evaluations"].get<std::size_t>(), secs));
}

// 8 ------------------------------------------------------------------------
Outcome real_dataset() {
  const char* dir = std::getenv("CUBESIM_CUBE_DATASET");
  if (!dir || !*dir) {
    return {Outcome::skip, "set CUBESIM_CUBE_DATASET to a converted cube toss directory"};
  }
  RunConfig cfg;
  cfg.command = "identify";
  cfg.params.model = ContactModel::compliant;
  cfg.domain = ParamDomain::cube(ContactModel::compliant);
  cfg.domain_source = "cube";
  cfg.workers = workers_from_env(1);
  auto data = import_external_cube_dataset(dir);
  if (data.size() < 50) return {Outcome::skip, fmt("only %zu trajectories found", data.size())};
  adopt_dataset_metadata(cfg, data);
  if (const char* b = std::getenv("CUBESIM_ACCEPT_BUDGET")) cfg.optimizer.budget = std::atoi(b);
  const ResultsDocument doc = cmd_identify(cfg, data);
  const double e_q = doc.e_q->mean;
  return verdict(e_q <= 0.6, fmt("%zu tosses, mean e_q %.3f with mu %.3f k %.1f b %.3f", data.size(),
                                 e_q, doc.parameters->mu, doc.parameters->k, doc.parameters->b));
}

// 9 ------------------------------------------------------------------------
Outcome sensitivity() {
  SimContext ctx;
  // Near-rigid tosses from a different contact model stand in for measured
  // data, so the compliant model cannot replay them exactly.
  const ContactParams stand_in{0.3, 1e5, 50.0, ContactModel::rigid_pgs};
  const auto mismatch = synthetic_cube_dataset(20, 55, stand_in, ctx);

  // theta* from a short identification, then hold mu and b there
  const ParamDomain domain = ParamDomain::cube(ContactModel::compliant);
  OptimizerSettings opt;
  opt.budget = 400;
  opt.seed = 3;
  const ContactParams blank{0.0, 0.0, 0.0, ContactModel::compliant};
  const OptimizeResult best = optimize(
      [&](std::span<const double> th) {
        return dataset_loss(mismatch, apply_theta(blank, domain, th), ctx).mean;
      },
      domain, opt);
  const ContactParams base = apply_theta(blank, domain, best.theta);

  const SweepGrid k_grid = sweep(base, {make_axis("k", 1e2, 1e5, 16, Scale::log)}, mismatch, ctx);
  const auto& L = k_grid.losses;
  const auto& K = k_grid.axes[0].values;
  // smallest threshold index whose tail stays within +-10% of the tail mean
  std::size_t threshold = L.size();
  for (std::size_t i = 0; i + 3 <= L.size(); ++i) {
    double mean = 0.0;
    for (std::size_t j = i; j < L.size(); ++j) mean += L[j];
    mean /= static_cast<double>(L.size() - i);
    bool flat = true;
    for (std::size_t j = i; j < L.size(); ++j) flat = flat && std::abs(L[j] - mean) <= 0.1 * mean;
    if (flat) {
      threshold = i;
      break;
    }
  }
  const bool plateau = threshold > 0 && threshold + 3 <= L.size() && L[0] > 1.1 * L[threshold];

  // high-sliding tosses from the compliant model itself
  const ContactParams slide_truth{0.3, 1e4, 0.4, ContactModel::compliant};
  const auto sliding = synthetic_cube_dataset(10, 66, slide_truth, ctx, TossDistribution::sliding());
  ContactParams slide_base = slide_truth;
  const SweepGrid f = sweep(slide_base, {make_axis("mu", 0.0, 1.0, 21, Scale::linear)}, sliding, ctx);
  const auto im = static_cast<std::size_t>(std::min_element(f.losses.begin(), f.losses.end()) -
                                           f.losses.begin());
  const bool interior = im > 0 && im + 1 < f.losses.size();
  const double curvature = interior ? f.losses[im - 1] - 2 * f.losses[im] + f.losses[im + 1] : 0.0;

  std::string detail = fmt("theta* mu=%.3f k=%.0f b=%.3f; k threshold %.0f (loss %.4f at k=1e2, tail %.4f..%.4f); "
                           "friction minimum at mu=%.2f, second difference %.3e",
                           base.mu, base.k, base.b, threshold < K.size() ? K[threshold] : NAN, L[0],
                           threshold < L.size() ? *std::min_element(L.begin() + threshold, L.end()) : NAN,
                           threshold < L.size() ? *std::max_element(L.begin() + threshold, L.end()) : NAN,
                           f.axes[0].values[im], curvature);
  return verdict(plateau && interior && curvature > 0.0, detail);
}

// 10 -----------------------------------------------------------------------
Outcome determinism() {
  SimContext ctx;
  TossDistribution dist;
  dist.duration = 0.5;
  const auto data = synthetic_cube_dataset(6, 5, preset_params("cube-bullet-style"), ctx, dist);

  auto run_all = [&](int workers) {
    std::string out;
    RunConfig cfg;
    cfg.workers = workers;
    cfg.params = preset_params("cube-mujoco-style");
    cfg.params_source = "preset:cube-mujoco-style";

    cfg.command = "simulate";
    std::ostringstream traj;
    write_trajectory(traj, cmd_simulate(cfg, data[0].states[0], data[0].size()).result.trajectory);
    out += traj.str();

    cfg.command = "evaluate";
    out += serialize(cmd_evaluate(cfg, data));

    cfg.command = "sweep";
    cfg.axes = {make_axis("k", 1e2, 1e4, 4, Scale::log), make_axis("b", 0.0, 100.0, 3, Scale::linear)};
    out += serialize(cmd_sweep(cfg, data));

    cfg.command = "identify";
    cfg.params = ContactParams{0, 0, 0, ContactModel::rigid_pgs};
    cfg.domain = ParamDomain::cube(ContactModel::rigid_pgs);
    cfg.optimizer.budget = 64;
    cfg.optimizer.seed = 17;
    out += serialize(cmd_identify(cfg, data));
    return out;
  };
  const std::string a = run_all(1), b = run_all(1), c = run_all(4), d = run_all(3);
  return verdict(a == b && a == c && a == d,
                 fmt("simulate, evaluate, sweep and identify documents (%zu bytes) compared at 1, 1, 4 "
                     "and 3 workers", a.size()));
}

}  // namespace

int main(int argc, char** argv) {
  // optional: criterion numbers to run, e.g. `cubesim_acceptance 7 9`
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"discrete ballistic exactness", ballistic},
      {"compliant drop against fine-step reference", compliant_drop},
      {"rigid PGS against LCP enumeration", lcp_oracle},
      {"friction cone and nonnegativity", friction_cone},
      {"impulse dissipation", dissipation},
      {"resting contact", resting},
      {"identification self-consistency", identification},
      {"real cube dataset regression", real_dataset},
      {"sensitivity shape", sensitivity},
      {"determinism across workers", determinism},
  };
  int failed = 0, index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    if (!only.empty() && std::find(only.begin(), only.end(), index) == only.end()) continue;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {Outcome::fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.kind == Outcome::pass ? "PASS" : o.kind == Outcome::skip ? "SKIP" : "FAIL";
    std::printf("criterion %2d %s: %s (%s)\n", index, tag, name, o.detail.c_str());
    std::fflush(stdout);
    if (o.kind == Outcome::fail) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
