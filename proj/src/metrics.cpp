#include "cubesim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cubesim/errors.hpp"
#include "cubesim/parallel.hpp"

namespace cubesim {

namespace {

void require_unit(const Quat& q) {
  if (std::abs(q.norm() - 1.0) > 1e-6) {
    throw std::invalid_argument("rotation_angle: quaternion is not unit norm");
  }
}

}  // namespace

double rotation_angle(const Quat& q1, const Quat& q2) {
  require_unit(q1);
  require_unit(q2);
  // Half-angle form of the trace formula; |w| folds the double cover.
  const Quat rel = q1.conjugate() * q2;
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

double rotation_angle(const Mat3& R1, const Mat3& R2) {
  const double c = 0.5 * ((R1.transpose() * R2).trace() - 1.0);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

ErrorReport cube_config_error(const Trajectory& truth, const Trajectory& sim, double l) {
  if (!(l > 0.0)) throw std::invalid_argument("cube side length must be positive");
  if (truth.size() != sim.size()) {
    throw std::invalid_argument("trajectory length mismatch (" + std::to_string(truth.size()) +
                                " vs " + std::to_string(sim.size()) + ")");
  }
  if (std::abs(truth.rate_hz - sim.rate_hz) > 1e-6 * truth.rate_hz) {
    throw std::invalid_argument("trajectory rate mismatch");
  }
  if (truth.size() == 0) throw std::invalid_argument("empty trajectory");

  ErrorReport r;
  const std::size_t T = truth.size();
  r.e_q_series.resize(T);
  r.position_error.resize(T);
  r.rotation_error.resize(T);
  double sum_eq = 0.0, sum_pos = 0.0, sum_rot = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double dp = (truth.states[t].p - sim.states[t].p).norm();
    const double angle = rotation_angle(truth.states[t].quat, sim.states[t].quat);
    r.position_error[t] = dp;
    r.rotation_error[t] = angle;
    r.e_q_series[t] = (2.0 / l) * dp * dp + angle * angle;
    sum_eq += r.e_q_series[t];
    sum_pos += dp;
    sum_rot += angle;
  }
  const auto n = static_cast<double>(T);
  r.e_q = sum_eq / n;
  r.mean_position_error_frac = sum_pos / n / l;
  r.mean_rotation_error_deg = sum_rot / n * 180.0 / std::numbers::pi;
  return r;
}

double weighted_state_error(std::span<const Eigen::VectorXd> truth,
                            std::span<const Eigen::VectorXd> sim, const Eigen::VectorXd& weights) {
  if (truth.size() != sim.size()) throw std::invalid_argument("trajectory length mismatch");
  if ((weights.array() < 0.0).any() || !weights.allFinite()) {
    throw std::invalid_argument("weights must be finite and nonnegative");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (truth[t].size() != weights.size() || sim[t].size() != weights.size()) {
      throw std::invalid_argument("state dimension mismatch at sample " + std::to_string(t));
    }
    const Eigen::VectorXd e = truth[t] - sim[t];
    total += (weights.array() * e.array().square()).sum();
  }
  return total;
}

Eigen::VectorXd state_vector(const RigidState& s) {
  Eigen::VectorXd x(13);
  x << s.p, s.quat.w(), s.quat.x(), s.quat.y(), s.quat.z(), s.v, s.w;
  return x;
}

WeightProfile cassie_weight_profile() {
  WeightProfile profile;
  std::vector<double> w;
  auto add = [&](const std::string& name, double weight) {
    profile.names.push_back(name);
    w.push_back(weight);
  };
  static const char* joints[] = {"hip_roll",   "hip_yaw",     "hip_pitch",          "knee",
                                 "knee_joint", "ankle_joint", "ankle_spring_joint", "toe"};
  static const char* sides[] = {"left", "right"};

  for (const char* c : {"base_qw", "base_qx", "base_qy", "base_qz", "base_x", "base_y", "base_z"}) {
    add(c, 10.0);
  }
  for (const char* j : joints) {
    for (const char* s : sides) add(std::string(j) + "_" + s, 10.0);
  }

  for (const char* c : {"base_wx", "base_wy", "base_wz"}) add(c, 5.0);
  for (const char* c : {"base_vx", "base_vy", "base_vz"}) add(c, 100.0);
  for (const char* j : joints) {
    const std::string jn = j;
    double weight = 1.0;
    if (jn == "hip_roll" || jn == "knee_joint" || jn == "toe") weight = 0.01;
    if (jn == "ankle_spring_joint") weight = 0.0;  // not measured
    for (const char* s : sides) add(jn + "_dot_" + s, weight);
  }
  profile.weights = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  return profile;
}

std::size_t DatasetLoss::diverged_count() const {
  return static_cast<std::size_t>(std::count(diverged.begin(), diverged.end(), true));
}

DatasetLoss dataset_loss(std::span<const Trajectory> dataset, const ContactParams& params,
                         const SimContext& ctx) {
  if (dataset.empty()) throw std::invalid_argument("dataset_loss: empty dataset");
  const double rate = ctx.cfg.output_rate();
  for (const auto& truth : dataset) {
    if (truth.size() == 0) throw std::invalid_argument("dataset_loss: empty trajectory");
    if (std::abs(truth.rate_hz - rate) > 1e-6 * rate) {
      throw std::invalid_argument("dataset_loss: trajectory '" + truth.name + "' is sampled at " +
                                  std::to_string(truth.rate_hz) + " Hz, simulation outputs " +
                                  std::to_string(rate) + " Hz");
    }
  }

  DatasetLoss out;
  const std::size_t N = dataset.size();
  out.per_trajectory.assign(N, 0.0);
  out.reports.assign(N, ErrorReport{});
  out.diverged.assign(N, false);
  std::vector<char> failed(N, 0);

  parallel_for(N, ctx.workers, [&](std::size_t i) {
    const Trajectory& truth = dataset[i];
    const SimulationResult sim =
        try_simulate_steps(truth.states.front(), params, ctx.inertia, ctx.geom, ctx.cfg,
                           steps_for_samples(truth.size(), ctx.cfg));
    if (sim.diverged) {
      failed[i] = 1;
      out.per_trajectory[i] = ctx.penalty;
      return;
    }
    out.reports[i] = cube_config_error(truth, sim.trajectory, ctx.side_length());
    out.per_trajectory[i] = out.reports[i].e_q;
  });

  double sum = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    out.diverged[i] = failed[i] != 0;
    sum += out.per_trajectory[i];
  }
  out.mean = sum / static_cast<double>(N);
  return out;
}

Stat mean_and_stddev(std::span<const double> values) {
  Stat s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(var / static_cast<double>(values.size()));
  return s;
}

}  // namespace cubesim
