#include "cubesim/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "cubesim/errors.hpp"

namespace cubesim {

using nlohmann::json;

ContactParams preset_params(std::string_view name) {
  if (name == "cube-drake") return {0.10, 10800.0, 0.4, ContactModel::compliant};
  if (name == "cube-mujoco-style") return {0.22, 3300.0, 45.0, ContactModel::regularized_convex};
  if (name == "cube-bullet-style") return {0.36, 1800.0, 27.0, ContactModel::rigid_pgs};
  throw std::invalid_argument("unknown parameter preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() {
  return {"cube-drake", "cube-mujoco-style", "cube-bullet-style"};
}

ContactParams load_params_file(const std::filesystem::path& path, ContactParams base) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto sep = line.find_first_of("=:");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    if (trim(line).empty()) continue;
    if (sep == std::string::npos) throw ParseError(path.string(), lineno, "expected key = value");
    const std::string key = trim(line.substr(0, sep));
    const std::string value = trim(line.substr(sep + 1));
    try {
      if (key == "model") {
        base.model = parse_contact_model(value);
      } else if (key == "mu" || key == "k" || key == "b") {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size() || !std::isfinite(v)) throw std::invalid_argument(value);
        (key == "mu" ? base.mu : key == "k" ? base.k : base.b) = v;
      } else {
        throw ParseError(path.string(), lineno, "unknown key '" + key + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError(path.string(), lineno, "bad value '" + value + "' for " + key);
    }
  }
  base.validate();
  return base;
}

SimContext RunConfig::context() const {
  SimContext ctx;
  ctx.inertia = inertia;
  ctx.geom = BoxGeometry::cube(side_length);
  ctx.cfg = sim;
  ctx.penalty = penalty;
  ctx.workers = workers;
  return ctx;
}

json RunConfig::to_json() const {
  json sim_json = {{"dt", sim.dt},
                   {"downsample", sim.downsample},
                   {"solver_iters", sim.solver_iters},
                   {"slip_tolerance", sim.slip_tolerance},
                   {"activation_margin", sim.activation_margin},
                   {"impedance", sim.impedance},
                   {"qp_iters", sim.qp_iters},
                   {"qp_tolerance", sim.qp_tolerance},
                   {"pgs_tolerance", sim.pgs_tolerance},
                   {"warm_start", sim.warm_start}};
  json inertia_json = {{"mass", inertia.mass},
                       {"inertia_body",
                        {inertia.inertia_body(0, 0), inertia.inertia_body(0, 1),
                         inertia.inertia_body(0, 2), inertia.inertia_body(1, 1),
                         inertia.inertia_body(1, 2), inertia.inertia_body(2, 2)}},
                       {"gravity", {inertia.gravity.x(), inertia.gravity.y(), inertia.gravity.z()}}};
  json j = {{"command", command},
            {"params", cubesim::to_json(params)},
            {"params_source", params_source},
            {"sim", sim_json},
            {"inertia", inertia_json},
            {"side_length", side_length},
            {"penalty", penalty},
            {"dataset", dataset}};
  if (command == "identify") {
    j["optimizer"] = {{"algorithm", "differential_evolution_rand1bin"},
                      {"budget", optimizer.budget},
                      {"population", optimizer.population},
                      {"F", optimizer.F},
                      {"CR", optimizer.CR},
                      {"seed", optimizer.seed}};
    j["domain"] = cubesim::to_json(domain);
    j["domain_source"] = domain_source;
    j["train_count"] = train_count;
  }
  if (command == "sweep") {
    json axes_json = json::array();
    for (const auto& a : axes) {
      axes_json.push_back({{"name", a.name},
                           {"scale", a.scale == Scale::log ? "log" : "linear"},
                           {"values", a.values}});
    }
    j["axes"] = axes_json;
  }
  return j;
}

int workers_from_env(int fallback) {
  if (const char* env = std::getenv("CUBESIM_WORKERS")) {
    try {
      const int w = std::stoi(env);
      if (w >= 1) return w;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("CUBESIM_WORKERS must be a positive integer");
  }
  return fallback;
}

void adopt_dataset_metadata(RunConfig& cfg, const std::vector<Trajectory>& dataset) {
  if (dataset.empty()) return;
  const auto& first = dataset.front();
  bool same_mass = first.mass_kg.has_value(), same_side = first.side_length_m.has_value();
  for (const auto& t : dataset) {
    same_mass = same_mass && t.mass_kg == first.mass_kg;
    same_side = same_side && t.side_length_m == first.side_length_m;
  }
  if (same_mass) cfg.inertia.mass = *first.mass_kg;
  if (same_side) cfg.side_length = *first.side_length_m;
}

SimulateOutput cmd_simulate(const RunConfig& cfg, const RigidState& x0, std::size_t samples) {
  if (samples < 1) throw std::invalid_argument("simulate: need at least one sample");
  SimConfig full_cfg = cfg.sim;
  full_cfg.downsample = 1;
  SimulateOutput out;
  SimulationResult full = try_simulate_steps(x0, cfg.params, cfg.inertia,
                                             BoxGeometry::cube(cfg.side_length), full_cfg,
                                             steps_for_samples(samples, cfg.sim));
  out.full_rate = full.trajectory;
  out.full_rate.body = "cube";
  out.full_rate.side_length_m = cfg.side_length;
  out.full_rate.mass_kg = cfg.inertia.mass;
  out.result = full;
  out.result.trajectory = downsample(out.full_rate, cfg.sim.downsample);
  return out;
}

namespace {

void require_dataset(const std::vector<Trajectory>& dataset, const char* command) {
  if (dataset.empty()) throw std::invalid_argument(std::string(command) + ": empty dataset");
}

}  // namespace

ResultsDocument cmd_evaluate(const RunConfig& cfg, const std::vector<Trajectory>& dataset) {
  require_dataset(dataset, "evaluate");
  ResultsDocument doc;
  doc.command = "evaluate";
  doc.config = cfg.to_json();
  doc.parameters = cfg.params;
  const DatasetLoss loss = dataset_loss(dataset, cfg.params, cfg.context());
  fill_error_summary(doc, dataset, loss);
  return doc;
}

ResultsDocument cmd_identify(const RunConfig& cfg, const std::vector<Trajectory>& dataset) {
  require_dataset(dataset, "identify");
  cfg.domain.validate();
  const std::size_t n_train =
      cfg.train_count == 0 ? dataset.size() : std::min(cfg.train_count, dataset.size());
  const std::span<const Trajectory> train(dataset.data(), n_train);
  std::vector<Trajectory> eval_set(dataset.begin() + static_cast<std::ptrdiff_t>(
                                                        n_train < dataset.size() ? n_train : 0),
                                   dataset.end());

  SimContext ctx = cfg.context();
  ctx.workers = 1;  // concurrency lives at the generation level
  OptimizerSettings opt = cfg.optimizer;
  opt.workers = cfg.workers;
  const OptimizeResult result = optimize(
      [&](std::span<const double> theta) {
        return dataset_loss(train, apply_theta(cfg.params, cfg.domain, theta), ctx).mean;
      },
      cfg.domain, opt);

  ResultsDocument doc;
  doc.command = "identify";
  doc.config = cfg.to_json();
  doc.parameters = apply_theta(cfg.params, cfg.domain, result.theta);
  json ident = to_json(result, cfg.domain);
  ident["train_size"] = n_train;
  ident["evaluation_size"] = eval_set.size();
  doc.identification = ident;

  SimContext eval_ctx = cfg.context();
  const DatasetLoss loss = dataset_loss(eval_set, *doc.parameters, eval_ctx);
  fill_error_summary(doc, eval_set, loss);
  return doc;
}

ResultsDocument cmd_sweep(const RunConfig& cfg, const std::vector<Trajectory>& dataset,
                          SweepGrid* grid_out) {
  require_dataset(dataset, "sweep");
  SweepGrid grid = sweep(cfg.params, cfg.axes, dataset, cfg.context());
  ResultsDocument doc;
  doc.command = "sweep";
  doc.config = cfg.to_json();
  doc.parameters = cfg.params;
  doc.sweep = to_json(grid);
  if (grid_out) *grid_out = std::move(grid);
  return doc;
}

}  // namespace cubesim
