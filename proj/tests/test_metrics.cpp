#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "cubesim/metrics.hpp"
#include "cubesim/synthetic.hpp"

using namespace cubesim;

namespace {

constexpr double kPi = std::numbers::pi;

Trajectory line(int n, const Vec3& offset = Vec3::Zero(), const Quat& rot = Quat::Identity()) {
  Trajectory t;
  t.rate_hz = 148.0;
  for (int i = 0; i < n; ++i) {
    RigidState s;
    s.p = Vec3(0.01 * i, 0.0, 0.1) + offset;
    s.quat = rot * Quat(Eigen::AngleAxisd(0.05 * i, Vec3::UnitZ()));
    t.states.push_back(s);
  }
  return t;
}

Quat random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return Quat(g(rng), g(rng), g(rng), g(rng)).normalized();
}

}  // namespace

TEST(RotationAngle, Basics) {
  const Quat q(Eigen::AngleAxisd(0.4, Vec3(1, 2, 3).normalized()));
  EXPECT_EQ(rotation_angle(q, q), 0.0);
  for (const Vec3& axis : {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 1).normalized()}) {
    const Quat r = q * Quat(Eigen::AngleAxisd(kPi / 2, axis));
    EXPECT_NEAR(rotation_angle(q, r), kPi / 2, 1e-12);
    EXPECT_NEAR(rotation_angle(q.toRotationMatrix(), r.toRotationMatrix()), kPi / 2, 1e-12);
  }
  const Quat flip = q * Quat(Eigen::AngleAxisd(kPi, Vec3::UnitZ()));
  EXPECT_NEAR(rotation_angle(q, flip), kPi, 1e-12);
  EXPECT_NEAR(rotation_angle(q.toRotationMatrix(), flip.toRotationMatrix()), kPi, 1e-7);
  // double cover
  const Quat neg(-q.w(), -q.x(), -q.y(), -q.z());
  EXPECT_NEAR(rotation_angle(q, neg), 0.0, 1e-15);
  EXPECT_THROW(rotation_angle(q, Quat(2, 0, 0, 0)), std::invalid_argument);
}

TEST(RotationAngle, MetricProperties) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 2000; ++i) {
    const Quat a = random_quat(rng), b = random_quat(rng), c = random_quat(rng);
    const double ab = rotation_angle(a, b);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, kPi + 1e-15);
    EXPECT_NEAR(ab, rotation_angle(b, a), 1e-12);
    EXPECT_NEAR(ab, rotation_angle((c * a).normalized(), (c * b).normalized()), 1e-12);
    EXPECT_NEAR(ab, rotation_angle(a.toRotationMatrix(), b.toRotationMatrix()), 1e-6);
  }
}

TEST(CubeError, KnownValues) {
  const Trajectory truth = line(20);
  EXPECT_EQ(cube_config_error(truth, truth, 0.1).e_q, 0.0);

  const ErrorReport shifted = cube_config_error(truth, line(20, Vec3(0.05, 0, 0)), 0.1);
  EXPECT_NEAR(shifted.e_q, 0.05, 1e-15);
  EXPECT_NEAR(shifted.mean_position_error_frac, 0.5, 1e-12);
  EXPECT_NEAR(shifted.mean_rotation_error_deg, 0.0, 1e-12);

  const Quat ten(Eigen::AngleAxisd(10.0 * kPi / 180.0, Vec3(0, 1, 1).normalized()));
  const ErrorReport rotated = cube_config_error(truth, line(20, Vec3::Zero(), ten), 0.1);
  EXPECT_NEAR(rotated.e_q, std::pow(10.0 * kPi / 180.0, 2), 1e-12);
  EXPECT_NEAR(rotated.mean_rotation_error_deg, 10.0, 1e-9);
  EXPECT_NEAR(std::pow(10.0 * kPi / 180.0, 2), 0.0305, 1e-4);
}

TEST(CubeError, TranslationInvariantAndValidated) {
  const Trajectory a = line(10), b = line(10, Vec3(0.01, -0.02, 0.0));
  const Vec3 shift(3.0, -1.0, 0.5);
  Trajectory a2 = a, b2 = b;
  for (auto& s : a2.states) s.p += shift;
  for (auto& s : b2.states) s.p += shift;
  EXPECT_NEAR(cube_config_error(a, b, 0.1).e_q, cube_config_error(a2, b2, 0.1).e_q, 1e-12);
  EXPECT_THROW(cube_config_error(a, line(9), 0.1), std::invalid_argument);
  Trajectory other_rate = b;
  other_rate.rate_hz = 100.0;
  EXPECT_THROW(cube_config_error(a, other_rate, 0.1), std::invalid_argument);
}

TEST(WeightedError, Reductions) {
  std::vector<Eigen::VectorXd> a, b;
  for (int i = 0; i < 5; ++i) {
    a.push_back(Eigen::VectorXd::Constant(3, i));
    b.push_back(Eigen::VectorXd::Constant(3, i + 0.5));
  }
  EXPECT_EQ(weighted_state_error(a, a, Eigen::VectorXd::Ones(3)), 0.0);
  EXPECT_NEAR(weighted_state_error(a, b, Eigen::VectorXd::Ones(3)), 5 * 3 * 0.25, 1e-15);
  EXPECT_THROW(weighted_state_error(a, b, Eigen::VectorXd::Ones(2)), std::invalid_argument);
}

TEST(WeightedError, CassieProfile) {
  const WeightProfile w = cassie_weight_profile();
  ASSERT_EQ(w.names.size(), static_cast<std::size_t>(w.weights.size()));
  ASSERT_EQ(w.names.size(), 45u);
  auto weight = [&](const std::string& name) {
    for (std::size_t i = 0; i < w.names.size(); ++i) {
      if (w.names[i] == name) return w.weights(static_cast<Eigen::Index>(i));
    }
    ADD_FAILURE() << "missing " << name;
    return -1.0;
  };
  for (int i = 0; i < 23; ++i) EXPECT_EQ(w.weights(i), 10.0) << w.names[i];
  EXPECT_EQ(weight("base_wx"), 5.0);
  EXPECT_EQ(weight("base_vz"), 100.0);
  EXPECT_EQ(weight("hip_roll_dot_left"), 0.01);
  EXPECT_EQ(weight("knee_joint_dot_right"), 0.01);
  EXPECT_EQ(weight("toe_dot_left"), 0.01);
  EXPECT_EQ(weight("hip_pitch_dot_left"), 1.0);
  EXPECT_EQ(weight("ankle_spring_joint_dot_left"), 0.0);
}

TEST(Stats, PopulationStddevByHand) {
  const std::vector<double> v = {1.0, 2.0, 4.0};
  const Stat s = mean_and_stddev(v);
  EXPECT_NEAR(s.mean, 7.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.stddev, std::sqrt(42.0 / 27.0), 1e-15);
}

class DatasetLossTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    params_ = {0.3, 10800.0, 0.4, ContactModel::compliant};
    TossDistribution dist;
    dist.duration = 0.5;
    data_ = synthetic_cube_dataset(4, 99, params_, SimContext{}, dist);
  }
  static inline ContactParams params_;
  static inline std::vector<Trajectory> data_;
};

TEST_F(DatasetLossTest, SelfConsistentIsZero) {
  const DatasetLoss l = dataset_loss(data_, params_, SimContext{});
  EXPECT_LT(l.mean, 1e-10);
  EXPECT_EQ(l.diverged_count(), 0u);
}

TEST_F(DatasetLossTest, MeanProperties) {
  ContactParams off = params_;
  off.mu = 0.6;
  off.k = 3000.0;
  const std::vector<Trajectory> one = {data_[0]};
  const std::vector<Trajectory> copies = {data_[0], data_[0], data_[0]};
  const double l1 = dataset_loss(one, off, SimContext{}).mean;
  EXPECT_GT(l1, 0.0);
  EXPECT_DOUBLE_EQ(dataset_loss(copies, off, SimContext{}).mean, l1);

  std::vector<Trajectory> perm = data_;
  std::reverse(perm.begin(), perm.end());
  const double fwd = dataset_loss(data_, off, SimContext{}).mean;
  EXPECT_NEAR(dataset_loss(perm, off, SimContext{}).mean, fwd, 1e-14 * fwd);

  // a trajectory the simulator replays exactly pulls the mean down
  Trajectory still;
  still.rate_hz = 148.0;
  RigidState top;
  top.p = Vec3(0, 0, 1e3);
  still.states = simulate(top, off, InertialParams::cube(), BoxGeometry::cube(), SimConfig{},
                          0.2).states;
  std::vector<Trajectory> with = data_;
  with.push_back(still);
  EXPECT_LT(dataset_loss(with, off, SimContext{}).mean, fwd);
}

TEST_F(DatasetLossTest, ParallelMatchesSerial) {
  ContactParams off = params_;
  off.mu = 0.5;
  SimContext ctx;
  const DatasetLoss a = dataset_loss(data_, off, ctx);
  ctx.workers = 3;
  const DatasetLoss b = dataset_loss(data_, off, ctx);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.per_trajectory, b.per_trajectory);
}

TEST_F(DatasetLossTest, PenaltyAndValidation) {
  SimContext ctx;
  ctx.cfg.qp_iters = 1;
  ctx.cfg.qp_tolerance = 1e-300;
  const DatasetLoss l = dataset_loss(data_, {0.3, 3300, 45, ContactModel::regularized_convex}, ctx);
  EXPECT_EQ(l.diverged_count(), data_.size());
  EXPECT_EQ(l.mean, ctx.penalty);
  EXPECT_THROW(dataset_loss(std::vector<Trajectory>{}, params_, SimContext{}), std::invalid_argument);
  SimContext slow;
  slow.cfg.downsample = 5;
  EXPECT_THROW(dataset_loss(data_, params_, slow), std::invalid_argument);
}
