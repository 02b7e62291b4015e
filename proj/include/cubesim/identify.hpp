#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cubesim/metrics.hpp"

namespace cubesim {

enum class Scale { linear, log };

struct ParamBound {
  std::string name;  // "mu", "k" or "b"
  double lower = 0.0;
  double upper = 1.0;
  Scale scale = Scale::linear;
};

/// Box constraints over named contact parameters.
struct ParamDomain {
  std::vector<ParamBound> bounds;

  void validate() const;
  std::size_t size() const { return bounds.size(); }
  bool contains(std::span<const double> theta) const;

  /// Cube-toss search box for a model: mu in [0, 1]; compliant k in
  /// [1e2, 1e5] (log), b in [0, 2]; the other models k in [1e2, 1e4] (log),
  /// b in [0, 1e3].
  static ParamDomain cube(ContactModel model);
  /// Biped-landing search box. Not defined for rigid_pgs.
  static ParamDomain cassie(ContactModel model);
};

/// Writes named values into a copy of `base`.
ContactParams apply_theta(const ContactParams& base, const ParamDomain& domain,
                          std::span<const double> theta);

struct OptimizerSettings {
  int budget = 2000;      // loss evaluations
  int population = 16;
  double F = 0.7;
  double CR = 0.9;
  std::uint64_t seed = 0;
  int workers = 1;        // concurrent evaluations within a generation
};

struct Evaluation {
  std::vector<double> theta;
  double loss = 0.0;
  double best_loss = 0.0;  // best seen up to and including this evaluation
};

struct OptimizeResult {
  std::vector<double> theta;
  double loss = 0.0;
  std::size_t best_index = 0;  // into history
  std::vector<Evaluation> history;
};

using LossFunction = std::function<double(std::span<const double>)>;

/// Differential evolution (rand/1/bin) with box clipping; log-scaled
/// parameters are searched in log space. Never evaluates outside the
/// domain. Ties keep the earliest evaluation. Deterministic for a seed and
/// independent of `workers`.
OptimizeResult optimize(const LossFunction& loss, const ParamDomain& domain,
                        const OptimizerSettings& settings);

struct SweepAxis {
  std::string name;
  std::vector<double> values;
  Scale scale = Scale::linear;
};

/// `count` points from lo to hi inclusive, evenly spaced in the given scale.
SweepAxis make_axis(std::string name, double lo, double hi, int count, Scale scale);

struct SweepGrid {
  ContactParams baseline;
  std::vector<SweepAxis> axes;
  std::vector<double> losses;   // row-major, last axis fastest
  std::vector<bool> diverged;   // any rollout failed at that point

  std::vector<std::size_t> shape() const;
  /// Per-axis value indices of flat entry `flat`.
  std::vector<std::size_t> unravel(std::size_t flat) const;
  ContactParams params_at(std::size_t flat) const;
};

/// Dataset loss at every grid point, other parameters held at `baseline`.
SweepGrid sweep(const ContactParams& baseline, std::vector<SweepAxis> axes,
                std::span<const Trajectory> dataset, const SimContext& ctx);

/// Long-form CSV: one column per axis, then loss and diverged (0/1).
void write_sweep_csv(std::ostream& out, const SweepGrid& grid);

nlohmann::json to_json(const SweepGrid& grid);
nlohmann::json to_json(const OptimizeResult& result, const ParamDomain& domain);
nlohmann::json to_json(const ParamDomain& domain);

}  // namespace cubesim
