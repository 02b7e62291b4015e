// Command-line entry point: simulate, evaluate, identify, sweep, synth.
//
// Exit codes: 0 success, 1 unexpected error, 2 usage or input error,
// 3 simulation divergence, 4 solver non-convergence.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cubesim/commands.hpp"
#include "cubesim/errors.hpp"
#include "cubesim/synthetic.hpp"

namespace {

using namespace cubesim;

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitNotConverged = 4;

struct CommonOptions {
  std::string model;
  std::string preset;
  std::string params_file;
  std::optional<double> mu, k, b;
  double rate = 1480.0;
  int downsample = 10;
  int solver_iters = 50;
  int qp_iters = 500;
  double slip_tolerance = 1e-3;
  double margin = 1e-3;
  double impedance = 0.9;
  double penalty = 1e3;
  int workers = 0;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--model", o.model, "compliant | regularized_convex | rigid_pgs");
  app->add_option("--preset", o.preset,
                  "parameter preset (cube-drake, cube-mujoco-style, cube-bullet-style); for "
                  "identify also a domain preset (cube, cassie)");
  app->add_option("--params", o.params_file, "contact parameter file (key = value)");
  app->add_option("--mu", o.mu, "friction coefficient");
  app->add_option("--k", o.k, "stiffness");
  app->add_option("--b", o.b, "dissipation / damping");
  app->add_option("--rate", o.rate, "simulation rate, Hz")->check(CLI::PositiveNumber);
  app->add_option("--downsample", o.downsample, "keep every n-th sample")->check(CLI::PositiveNumber);
  app->add_option("--solver-iters", o.solver_iters, "PGS sweep cap")->check(CLI::PositiveNumber);
  app->add_option("--qp-iters", o.qp_iters, "convex solver iteration cap")->check(CLI::PositiveNumber);
  app->add_option("--slip-tolerance", o.slip_tolerance, "compliant friction regularization, m/s");
  app->add_option("--margin", o.margin, "contact activation margin, m");
  app->add_option("--impedance", o.impedance, "regularized convex interpolation d");
  app->add_option("--penalty", o.penalty, "loss assigned to failed rollouts");
  app->add_option("--workers", o.workers, "rollout threads (env CUBESIM_WORKERS)");
}

bool is_domain_preset(const std::string& s) { return s == "cube" || s == "cassie"; }

RunConfig make_config(const std::string& command, const CommonOptions& o) {
  RunConfig cfg;
  cfg.command = command;
  if (!o.preset.empty() && !is_domain_preset(o.preset)) {
    cfg.params = preset_params(o.preset);
    cfg.params_source = "preset:" + o.preset;
  } else if (o.params_file.empty()) {
    // Nothing given: start from the preset of the requested model.
    const ContactModel m = o.model.empty() ? ContactModel::compliant : parse_contact_model(o.model);
    for (const auto& name : preset_names()) {
      if (preset_params(name).model == m) {
        cfg.params = preset_params(name);
        cfg.params_source = "preset:" + name;
      }
    }
  }
  if (!o.params_file.empty()) {
    cfg.params = load_params_file(o.params_file, cfg.params);
    cfg.params_source = "file:" + o.params_file;
  }
  if (!o.model.empty()) cfg.params.model = parse_contact_model(o.model);
  if (o.mu) cfg.params.mu = *o.mu;
  if (o.k) cfg.params.k = *o.k;
  if (o.b) cfg.params.b = *o.b;
  cfg.params.validate();

  cfg.sim.dt = 1.0 / o.rate;
  cfg.sim.downsample = o.downsample;
  cfg.sim.solver_iters = o.solver_iters;
  cfg.sim.qp_iters = o.qp_iters;
  cfg.sim.slip_tolerance = o.slip_tolerance;
  cfg.sim.activation_margin = o.margin;
  cfg.sim.impedance = o.impedance;
  cfg.sim.validate();
  cfg.penalty = o.penalty;
  cfg.workers = o.workers > 0 ? o.workers : workers_from_env(1);
  return cfg;
}

std::vector<Trajectory> load_dataset(RunConfig& cfg, const std::string& dir) {
  LoadReport report;
  std::vector<Trajectory> data = import_external_cube_dataset(dir, &report);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  cfg.dataset = dir;
  adopt_dataset_metadata(cfg, data);
  return data;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

// "mu=0:1,k=1e2:1e5:log,b=0:2"
ParamDomain parse_domain(const std::string& spec) {
  ParamDomain d;
  for (const auto& item : split(spec, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad domain entry '" + item + "'");
    const auto parts = split(item.substr(eq + 1), ':');
    if (parts.size() < 2 || parts.size() > 3) {
      throw std::invalid_argument("bad domain entry '" + item + "'");
    }
    ParamBound b{item.substr(0, eq), to_double(parts[0]), to_double(parts[1]), Scale::linear};
    if (parts.size() == 3) {
      if (parts[2] == "log") {
        b.scale = Scale::log;
      } else if (parts[2] != "linear") {
        throw std::invalid_argument("bad scale '" + parts[2] + "'");
      }
    }
    d.bounds.push_back(b);
  }
  d.validate();
  return d;
}

// "px,py,pz,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz"
RigidState parse_state(const std::string& s) {
  const auto f = split(s, ',');
  if (f.size() != 13) throw std::invalid_argument("--state needs 13 comma-separated numbers");
  std::vector<double> x;
  for (const auto& v : f) x.push_back(to_double(v));
  RigidState st;
  st.p = Vec3(x[0], x[1], x[2]);
  st.quat = Quat(x[3], x[4], x[5], x[6]);
  if (std::abs(st.quat.norm() - 1.0) > 1e-3) throw std::invalid_argument("--state quaternion is not unit");
  st.quat.normalize();
  st.v = Vec3(x[7], x[8], x[9]);
  st.w = Vec3(x[10], x[11], x[12]);
  return st;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cubesim: cube impact simulation, evaluation and contact-parameter identification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(CUBESIM_VERSION));

  CommonOptions sim_o, eval_o, ident_o, sweep_o;

  auto* sim_cmd = app.add_subcommand("simulate", "simulate one toss and write a trajectory file");
  add_common(sim_cmd, sim_o);
  std::string x0_file, state_text, sim_out, full_out;
  std::optional<std::size_t> samples;
  std::optional<double> duration;
  sim_cmd->add_option("--x0", x0_file, "trajectory file; its first row is the initial state");
  sim_cmd->add_option("--state", state_text, "inline initial state px,py,pz,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz");
  sim_cmd->add_option("--samples", samples, "output samples (default: length of --x0 file)");
  sim_cmd->add_option("--duration", duration, "simulated time, s");
  sim_cmd->add_option("--out", sim_out, "output trajectory file")->required();
  sim_cmd->add_option("--full-rate-out", full_out, "also write the undownsampled trajectory");

  auto* eval_cmd = app.add_subcommand("evaluate", "score a parameter set against a dataset");
  add_common(eval_cmd, eval_o);
  std::string eval_dataset, eval_out;
  eval_cmd->add_option("--dataset", eval_dataset, "directory of trajectory files")->required();
  eval_cmd->add_option("--out", eval_out, "results JSON (default: stdout)");

  auto* ident_cmd = app.add_subcommand("identify", "identify contact parameters");
  add_common(ident_cmd, ident_o);
  std::string ident_dataset, ident_out, domain_text;
  int budget = 2000;
  std::uint64_t seed = 0;
  std::size_t train = 0;
  ident_cmd->add_option("--dataset", ident_dataset, "directory of trajectory files")->required();
  ident_cmd->add_option("--out", ident_out, "results JSON (default: stdout)");
  ident_cmd->add_option("--budget", budget, "loss evaluations")->check(CLI::PositiveNumber);
  ident_cmd->add_option("--seed", seed, "optimizer seed");
  ident_cmd->add_option("--train", train, "train on the first n trajectories, evaluate on the rest");
  ident_cmd->add_option("--domain", domain_text, "custom domain, e.g. mu=0:1,k=1e2:1e5:log,b=0:2");

  auto* sweep_cmd = app.add_subcommand("sweep", "loss over a parameter grid around a baseline");
  add_common(sweep_cmd, sweep_o);
  std::string sweep_dataset, sweep_out, grid_csv, axes_text, log_text, range_text;
  std::string points_text = "20";
  sweep_cmd->add_option("--dataset", sweep_dataset, "directory of trajectory files")->required();
  sweep_cmd->add_option("--axes", axes_text, "swept parameters, e.g. k,b")->required();
  sweep_cmd->add_option("--log", log_text, "axes spaced logarithmically, e.g. k");
  sweep_cmd->add_option("--points", points_text, "points per axis: n or name=n,...");
  sweep_cmd->add_option("--range", range_text, "axis ranges name=lo:hi,... (default: cube domain)");
  sweep_cmd->add_option("--out", sweep_out, "results JSON (default: stdout)");
  sweep_cmd->add_option("--grid-csv", grid_csv, "long-form grid CSV");

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic toss dataset");
  CommonOptions synth_o;
  add_common(synth_cmd, synth_o);
  std::string synth_dir;
  std::size_t count = 25;
  std::uint64_t synth_seed = 1;
  bool sliding = false;
  double synth_duration = 1.0;
  synth_cmd->add_option("--out-dir", synth_dir, "output directory")->required();
  synth_cmd->add_option("--count", count, "number of tosses");
  synth_cmd->add_option("--seed", synth_seed, "toss seed");
  synth_cmd->add_flag("--sliding", sliding, "low, fast horizontal tosses");
  synth_cmd->add_option("--duration", synth_duration, "seconds per toss");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*sim_cmd) {
      RunConfig cfg = make_config("simulate", sim_o);
      RigidState x0;
      std::size_t n = 0;
      if (!x0_file.empty()) {
        const Trajectory src = load_trajectory(x0_file);
        x0 = src.states.front();
        n = src.size();
        if (src.mass_kg) cfg.inertia.mass = *src.mass_kg;
        if (src.side_length_m) cfg.side_length = *src.side_length_m;
      } else if (!state_text.empty()) {
        x0 = parse_state(state_text);
      } else {
        throw std::invalid_argument("simulate needs --x0 or --state");
      }
      if (samples) n = *samples;
      if (duration) {
        n = static_cast<std::size_t>(std::llround(*duration * cfg.sim.output_rate())) + 1;
      }
      if (n == 0) throw std::invalid_argument("simulate needs --samples or --duration with --state");

      const SimulateOutput out = cmd_simulate(cfg, x0, n);
      std::vector<std::string> comments = {"params: " + to_json(cfg.params).dump()};
      if (out.result.diverged) {
        comments.push_back("status: partial, diverged at step " +
                           std::to_string(out.result.failed_step) + " (" + out.result.message + ")");
      }
      save_trajectory(sim_out, out.result.trajectory, comments);
      if (!full_out.empty()) save_trajectory(full_out, out.full_rate, comments);
      if (out.result.diverged) {
        std::cerr << "error: " << out.result.message << " at step " << out.result.failed_step
                  << "; partial output written\n";
        return out.result.failure == RolloutFailure::not_converged ? kExitNotConverged
                                                                    : kExitDiverged;
      }
      return 0;
    }

    auto emit = [](const ResultsDocument& doc, const std::string& path) {
      if (path.empty()) {
        std::cout << serialize(doc);
      } else {
        write_text(path, serialize(doc));
      }
    };

    if (*eval_cmd) {
      RunConfig cfg = make_config("evaluate", eval_o);
      const auto data = load_dataset(cfg, eval_dataset);
      emit(cmd_evaluate(cfg, data), eval_out);
      return 0;
    }

    if (*ident_cmd) {
      RunConfig cfg = make_config("identify", ident_o);
      const auto data = load_dataset(cfg, ident_dataset);
      if (!domain_text.empty()) {
        cfg.domain = parse_domain(domain_text);
        cfg.domain_source = "custom";
      } else if (ident_o.preset == "cassie") {
        cfg.domain = ParamDomain::cassie(cfg.params.model);
        cfg.domain_source = "cassie";
      } else {
        cfg.domain = ParamDomain::cube(cfg.params.model);
        cfg.domain_source = "cube";
      }
      cfg.optimizer.budget = budget;
      cfg.optimizer.seed = seed;
      cfg.train_count = train;
      emit(cmd_identify(cfg, data), ident_out);
      return 0;
    }

    if (*sweep_cmd) {
      RunConfig cfg = make_config("sweep", sweep_o);
      const auto data = load_dataset(cfg, sweep_dataset);
      const ParamDomain defaults = ParamDomain::cube(cfg.params.model);
      std::map<std::string, std::pair<double, double>> ranges;
      for (const auto& b : defaults.bounds) ranges[b.name] = {b.lower, b.upper};
      if (!range_text.empty()) {
        for (const auto& b : parse_domain(range_text).bounds) ranges[b.name] = {b.lower, b.upper};
      }
      std::map<std::string, int> points;
      const auto log_axes = split(log_text, ',');
      int default_points = 20;
      for (const auto& item : split(points_text, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
          default_points = std::stoi(item);
        } else {
          points[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
        }
      }
      for (const auto& name : split(axes_text, ',')) {
        if (!ranges.count(name)) throw std::invalid_argument("unknown sweep axis '" + name + "'");
        const bool log = std::find(log_axes.begin(), log_axes.end(), name) != log_axes.end();
        const int n = points.count(name) ? points[name] : default_points;
        cfg.axes.push_back(make_axis(name, ranges[name].first, ranges[name].second, n,
                                     log ? Scale::log : Scale::linear));
      }
      SweepGrid grid;
      const ResultsDocument doc = cmd_sweep(cfg, data, &grid);
      emit(doc, sweep_out);
      if (!grid_csv.empty()) {
        std::ostringstream csv;
        write_sweep_csv(csv, grid);
        write_text(grid_csv, csv.str());
      }
      return 0;
    }

    if (*synth_cmd) {
      RunConfig cfg = make_config("synth", synth_o);
      TossDistribution dist = sliding ? TossDistribution::sliding() : TossDistribution{};
      dist.duration = synth_duration;
      save_dataset(synth_dir, synthetic_cube_dataset(count, synth_seed, cfg.params, cfg.context(), dist));
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SimulationDiverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const SolverNotConverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}
