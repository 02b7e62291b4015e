#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cubesim/dataset_io.hpp"
#include "cubesim/identify.hpp"

namespace cubesim {

/// Fitted cube parameter rows shipped for immediate evaluation runs:
/// cube-drake (compliant), cube-mujoco-style (regularized_convex),
/// cube-bullet-style (rigid_pgs).
ContactParams preset_params(std::string_view name);
std::vector<std::string> preset_names();

/// Reads `key = value` lines (model, mu, k, b; '#' starts a comment).
/// Missing keys keep the values of `base`.
ContactParams load_params_file(const std::filesystem::path& path, ContactParams base = {});

/// Settings of one command run. Everything except the worker count and
/// output destinations is echoed into the results document.
struct RunConfig {
  std::string command;
  ContactParams params;
  std::string params_source = "inline";
  SimConfig sim;
  InertialParams inertia = InertialParams::cube();
  double side_length = 0.1;
  double penalty = 1e3;
  std::string dataset;
  int workers = 1;

  // identify
  OptimizerSettings optimizer;
  ParamDomain domain;
  std::string domain_source;
  std::size_t train_count = 0;  // 0: train and evaluate on everything

  // sweep
  std::vector<SweepAxis> axes;

  SimContext context() const;
  nlohmann::json to_json() const;
};

/// Worker count from CUBESIM_WORKERS, or `fallback` when unset.
int workers_from_env(int fallback);

/// Takes mass and side length from the dataset metadata when every
/// trajectory agrees on them.
void adopt_dataset_metadata(RunConfig& cfg, const std::vector<Trajectory>& dataset);

struct SimulateOutput {
  SimulationResult result;  // downsampled to the output rate
  Trajectory full_rate;
};

/// Simulates `samples` output samples from x0.
SimulateOutput cmd_simulate(const RunConfig& cfg, const RigidState& x0, std::size_t samples);

/// Position error (% cube width), rotation error (deg) and e_q, each as
/// mean and population standard deviation over trajectories.
ResultsDocument cmd_evaluate(const RunConfig& cfg, const std::vector<Trajectory>& dataset);

/// Identifies the parameters named in cfg.domain on the training subset and
/// reports errors at the optimum on the evaluation subset.
ResultsDocument cmd_identify(const RunConfig& cfg, const std::vector<Trajectory>& dataset);

ResultsDocument cmd_sweep(const RunConfig& cfg, const std::vector<Trajectory>& dataset,
                          SweepGrid* grid_out = nullptr);

}  // namespace cubesim
