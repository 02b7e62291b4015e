#include "cubesim/identify.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "cubesim/dataset_io.hpp"
#include "cubesim/parallel.hpp"
#include "cubesim/synthetic.hpp"

namespace cubesim {

using nlohmann::json;

namespace {

void set_param(ContactParams& p, const std::string& name, double value) {
  if (name == "mu") {
    p.mu = value;
  } else if (name == "k") {
    p.k = value;
  } else if (name == "b") {
    p.b = value;
  } else {
    throw std::invalid_argument("unknown contact parameter '" + name + "'");
  }
}

const char* scale_name(Scale s) { return s == Scale::log ? "log" : "linear"; }

// Search-space coordinate of a parameter value and back.
double to_internal(const ParamBound& b, double value) {
  return b.scale == Scale::log ? std::log10(value) : value;
}

double to_external(const ParamBound& b, double x) {
  const double v = b.scale == Scale::log ? std::pow(10.0, x) : x;
  return std::clamp(v, b.lower, b.upper);
}

}  // namespace

void ParamDomain::validate() const {
  if (bounds.empty()) throw std::invalid_argument("parameter domain is empty");
  for (const auto& b : bounds) {
    ContactParams probe;
    set_param(probe, b.name, 0.0);  // name check
    if (!(b.lower < b.upper) || !std::isfinite(b.lower) || !std::isfinite(b.upper)) {
      throw std::invalid_argument("domain for '" + b.name + "' needs finite lower < upper");
    }
    if (b.scale == Scale::log && !(b.lower > 0.0)) {
      throw std::invalid_argument("log-scaled '" + b.name + "' needs a positive lower bound");
    }
    if (b.lower < 0.0) throw std::invalid_argument("contact parameters are nonnegative");
  }
}

bool ParamDomain::contains(std::span<const double> theta) const {
  if (theta.size() != bounds.size()) return false;
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (!(theta[i] >= bounds[i].lower && theta[i] <= bounds[i].upper)) return false;
  }
  return true;
}

ParamDomain ParamDomain::cube(ContactModel model) {
  ParamDomain d;
  d.bounds.push_back({"mu", 0.0, 1.0, Scale::linear});
  if (model == ContactModel::compliant) {
    d.bounds.push_back({"k", 1e2, 1e5, Scale::log});
    d.bounds.push_back({"b", 0.0, 2.0, Scale::linear});
  } else {
    d.bounds.push_back({"k", 1e2, 1e4, Scale::log});
    d.bounds.push_back({"b", 0.0, 1e3, Scale::linear});
  }
  return d;
}

ParamDomain ParamDomain::cassie(ContactModel model) {
  ParamDomain d;
  d.bounds.push_back({"mu", 0.0, 1.0, Scale::linear});
  switch (model) {
    case ContactModel::compliant:
      d.bounds.push_back({"k", 1e3, 1e6, Scale::log});
      d.bounds.push_back({"b", 0.0, 3.0, Scale::linear});
      break;
    case ContactModel::regularized_convex:
      // lower bound 0 rules out a log scale
      d.bounds.push_back({"k", 0.0, 1e6, Scale::linear});
      d.bounds.push_back({"b", 0.0, 1e3, Scale::linear});
      break;
    case ContactModel::rigid_pgs:
      throw std::invalid_argument("no biped-landing domain for rigid_pgs");
  }
  return d;
}

ContactParams apply_theta(const ContactParams& base, const ParamDomain& domain,
                          std::span<const double> theta) {
  if (theta.size() != domain.size()) throw std::invalid_argument("theta size mismatch");
  ContactParams p = base;
  for (std::size_t i = 0; i < theta.size(); ++i) set_param(p, domain.bounds[i].name, theta[i]);
  return p;
}

OptimizeResult optimize(const LossFunction& loss, const ParamDomain& domain,
                        const OptimizerSettings& settings) {
  domain.validate();
  if (settings.budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (settings.population < 4) throw std::invalid_argument("population must be >= 4");

  const std::size_t dim = domain.size();
  std::vector<double> lo(dim), hi(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    lo[j] = to_internal(domain.bounds[j], domain.bounds[j].lower);
    hi[j] = to_internal(domain.bounds[j], domain.bounds[j].upper);
  }

  SplitMix64 rng(settings.seed);
  OptimizeResult result;
  result.loss = std::numeric_limits<double>::infinity();
  const auto budget = static_cast<std::size_t>(settings.budget);

  // Evaluates a batch of internal points (possibly concurrently), then
  // appends to the history in batch order.
  auto evaluate = [&](const std::vector<std::vector<double>>& xs) {
    std::vector<std::vector<double>> thetas(xs.size(), std::vector<double>(dim));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (std::size_t j = 0; j < dim; ++j) thetas[i][j] = to_external(domain.bounds[j], xs[i][j]);
    }
    std::vector<double> values(xs.size());
    parallel_for(xs.size(), settings.workers,
                 [&](std::size_t i) { values[i] = loss(std::span<const double>(thetas[i])); });
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (values[i] < result.loss || result.history.empty()) {
        result.loss = values[i];
        result.theta = thetas[i];
        result.best_index = result.history.size();
      }
      result.history.push_back({thetas[i], values[i], result.loss});
    }
    return values;
  };

  const std::size_t pop = std::min<std::size_t>(static_cast<std::size_t>(settings.population),
                                                budget);
  std::vector<std::vector<double>> members(pop, std::vector<double>(dim));
  for (auto& m : members) {
    for (std::size_t j = 0; j < dim; ++j) m[j] = rng.uniform(lo[j], hi[j]);
  }
  std::vector<double> fitness = evaluate(members);
  if (pop < 4) return result;

  auto pick = [&](std::size_t exclude_a, std::size_t exclude_b, std::size_t exclude_c) {
    while (true) {
      const auto r = static_cast<std::size_t>(rng.next() % pop);
      if (r != exclude_a && r != exclude_b && r != exclude_c) return r;
    }
  };

  while (result.history.size() < budget) {
    const std::size_t batch = std::min(pop, budget - result.history.size());
    std::vector<std::vector<double>> trials(batch, std::vector<double>(dim));
    for (std::size_t i = 0; i < batch; ++i) {
      const std::size_t r1 = pick(i, i, i);
      const std::size_t r2 = pick(i, r1, r1);
      const std::size_t r3 = pick(i, r1, r2);
      const auto forced = static_cast<std::size_t>(rng.next() % dim);
      for (std::size_t j = 0; j < dim; ++j) {
        if (j == forced || rng.uniform() < settings.CR) {
          const double mutant =
              members[r1][j] + settings.F * (members[r2][j] - members[r3][j]);
          trials[i][j] = std::clamp(mutant, lo[j], hi[j]);
        } else {
          trials[i][j] = members[i][j];
        }
      }
    }
    const std::vector<double> values = evaluate(trials);
    for (std::size_t i = 0; i < batch; ++i) {
      if (values[i] < fitness[i]) {
        members[i] = trials[i];
        fitness[i] = values[i];
      }
    }
  }
  return result;
}

SweepAxis make_axis(std::string name, double lo, double hi, int count, Scale scale) {
  if (count < 1) throw std::invalid_argument("sweep axis needs at least one point");
  if (scale == Scale::log && !(lo > 0.0 && hi > 0.0)) {
    throw std::invalid_argument("log sweep axis needs positive bounds");
  }
  SweepAxis axis{std::move(name), {}, scale};
  axis.values.resize(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double s = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    axis.values[static_cast<std::size_t>(i)] =
        scale == Scale::log ? std::pow(10.0, std::log10(lo) + s * (std::log10(hi) - std::log10(lo)))
                            : lo + s * (hi - lo);
  }
  // exact endpoints
  axis.values.front() = lo;
  if (count > 1) axis.values.back() = hi;
  return axis;
}

std::vector<std::size_t> SweepGrid::shape() const {
  std::vector<std::size_t> s;
  for (const auto& a : axes) s.push_back(a.values.size());
  return s;
}

std::vector<std::size_t> SweepGrid::unravel(std::size_t flat) const {
  std::vector<std::size_t> idx(axes.size());
  for (std::size_t a = axes.size(); a-- > 0;) {
    idx[a] = flat % axes[a].values.size();
    flat /= axes[a].values.size();
  }
  return idx;
}

ContactParams SweepGrid::params_at(std::size_t flat) const {
  ContactParams p = baseline;
  const auto idx = unravel(flat);
  for (std::size_t a = 0; a < axes.size(); ++a) set_param(p, axes[a].name, axes[a].values[idx[a]]);
  return p;
}

SweepGrid sweep(const ContactParams& baseline, std::vector<SweepAxis> axes,
                std::span<const Trajectory> dataset, const SimContext& ctx) {
  if (axes.empty()) throw std::invalid_argument("sweep needs at least one axis");
  for (std::size_t a = 0; a < axes.size(); ++a) {
    ContactParams probe;
    set_param(probe, axes[a].name, 0.0);
    if (axes[a].values.empty()) throw std::invalid_argument("empty sweep axis " + axes[a].name);
    for (std::size_t b = 0; b < a; ++b) {
      if (axes[a].name == axes[b].name) throw std::invalid_argument("duplicate sweep axis");
    }
  }
  SweepGrid grid;
  grid.baseline = baseline;
  grid.axes = std::move(axes);
  std::size_t total = 1;
  for (const auto& a : grid.axes) total *= a.values.size();
  grid.losses.assign(total, 0.0);
  std::vector<char> failed(total, 0);

  // Parallelize over grid points when there are enough of them, otherwise
  // over trajectories. Either way each entry is the same deterministic sum.
  SimContext inner = ctx;
  const bool outer = total >= static_cast<std::size_t>(std::max(1, ctx.workers));
  if (outer) inner.workers = 1;
  parallel_for(total, outer ? ctx.workers : 1, [&](std::size_t i) {
    const DatasetLoss l = dataset_loss(dataset, grid.params_at(i), inner);
    grid.losses[i] = l.mean;
    failed[i] = l.diverged_count() > 0;
  });
  grid.diverged.assign(failed.begin(), failed.end());
  return grid;
}

void write_sweep_csv(std::ostream& out, const SweepGrid& grid) {
  for (const auto& a : grid.axes) out << a.name << ',';
  out << "loss,diverged\n";
  auto number = [](double x) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, end);
  };
  for (std::size_t i = 0; i < grid.losses.size(); ++i) {
    const auto idx = grid.unravel(i);
    for (std::size_t a = 0; a < grid.axes.size(); ++a) out << number(grid.axes[a].values[idx[a]]) << ',';
    out << number(grid.losses[i]) << ',' << (grid.diverged[i] ? 1 : 0) << '\n';
  }
}

json to_json(const SweepGrid& grid) {
  json axes = json::array();
  for (const auto& a : grid.axes) {
    axes.push_back({{"name", a.name}, {"scale", scale_name(a.scale)}, {"values", a.values}});
  }
  std::vector<int> flags(grid.diverged.begin(), grid.diverged.end());
  return json{{"baseline", to_json(grid.baseline)},
              {"axes", axes},
              {"shape", grid.shape()},
              {"losses", grid.losses},
              {"diverged", flags}};
}

json to_json(const ParamDomain& domain) {
  json out = json::array();
  for (const auto& b : domain.bounds) {
    out.push_back(
        {{"name", b.name}, {"lower", b.lower}, {"upper", b.upper}, {"scale", scale_name(b.scale)}});
  }
  return out;
}

json to_json(const OptimizeResult& result, const ParamDomain& domain) {
  json history = json::array();
  for (const auto& e : result.history) {
    history.push_back({{"theta", e.theta}, {"loss", e.loss}, {"best_loss", e.best_loss}});
  }
  json names = json::array();
  for (const auto& b : domain.bounds) names.push_back(b.name);
  return json{{"parameter_names", names},
              {"theta", result.theta},
              {"loss", result.loss},
              {"best_index", result.best_index},
              {"evaluations", result.history.size()},
              {"history", history}};
}

}  // namespace cubesim
