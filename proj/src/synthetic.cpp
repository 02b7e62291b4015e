#include "cubesim/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace cubesim {

TossDistribution TossDistribution::sliding() {
  TossDistribution d;
  d.height_min = 0.06;
  d.height_max = 0.10;
  d.horizontal_speed_max = 2.0;
  d.vertical_speed_min = -0.5;
  d.vertical_speed_max = 0.0;
  d.angular_speed_max = 1.0;
  return d;
}

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

RigidState random_toss_state(SplitMix64& rng, const TossDistribution& dist) {
  RigidState s;
  s.p = Vec3(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1),
             rng.uniform(dist.height_min, dist.height_max));
  // Uniform random rotation (Shoemake).
  const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const double two_pi = 2.0 * std::numbers::pi;
  s.quat = Quat(b * std::cos(two_pi * u3), a * std::sin(two_pi * u2), a * std::cos(two_pi * u2),
                b * std::sin(two_pi * u3));
  s.quat.normalize();
  const double hv = dist.horizontal_speed_max;
  s.v = Vec3(rng.uniform(-hv, hv), rng.uniform(-hv, hv),
             rng.uniform(dist.vertical_speed_min, dist.vertical_speed_max));
  const double wa = dist.angular_speed_max;
  s.w = Vec3(rng.uniform(-wa, wa), rng.uniform(-wa, wa), rng.uniform(-wa, wa));
  return s;
}

std::vector<Trajectory> synthetic_cube_dataset(std::size_t count, std::uint64_t seed,
                                               const ContactParams& params,
                                               const SimContext& ctx,
                                               const TossDistribution& dist) {
  SplitMix64 rng(seed);
  std::vector<Trajectory> out;
  const auto steps = static_cast<std::size_t>(std::llround(dist.duration / ctx.cfg.dt));
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > 10 * count + 10) {
      throw std::runtime_error("synthetic_cube_dataset: too many failed rollouts");
    }
    RigidState x0 = random_toss_state(rng, dist);
    // Keep the whole cube above the table at release.
    const double lowest = x0.p.z() - ctx.geom.half_extents.norm();
    if (lowest < 0.0) x0.p.z() -= lowest - 1e-3;
    SimulationResult r = try_simulate_steps(x0, params, ctx.inertia, ctx.geom, ctx.cfg, steps);
    if (r.diverged) continue;
    Trajectory t = std::move(r.trajectory);
    char name[32];
    std::snprintf(name, sizeof(name), "toss_%03zu", out.size());
    t.name = name;
    t.body = "cube";
    t.side_length_m = ctx.side_length();
    t.mass_kg = ctx.inertia.mass;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace cubesim
