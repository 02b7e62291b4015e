#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cubesim/contact_solvers.hpp"
#include "cubesim/metrics.hpp"
#include "cubesim/trajectory.hpp"

namespace cubesim {

// Trajectory files are comma-separated text:
//
//   # rate_hz: 148
//   # body: cube
//   # side_length_m: 0.1
//   # mass_kg: 0.37
//   t,px,py,pz,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz
//   0,...
//
// `# key: value` comment lines carry metadata; other comment lines are
// ignored. Angular velocity is in the world frame, z is up.

inline constexpr const char* kTrajectoryColumns = "t,px,py,pz,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz";

/// Non-fatal findings while loading.
struct LoadReport {
  std::vector<std::size_t> renormalized_rows;  // 1-based file lines
  std::vector<std::string> warnings;
};

/// Parses and validates a trajectory. Quaternions off unit norm by more than
/// 1e-12 (and at most 1e-3) are renormalized and reported; everything else
/// that is malformed raises ParseError with the offending line. Without a
/// `report`, warnings go to std::clog.
Trajectory read_trajectory(std::istream& in, const std::string& source,
                           LoadReport* report = nullptr);
Trajectory load_trajectory(const std::filesystem::path& path, LoadReport* report = nullptr);

/// Numbers are written with 17 significant digits; t_i = start + i / rate.
void write_trajectory(std::ostream& out, const Trajectory& traj,
                      const std::vector<std::string>& extra_comments = {});
void save_trajectory(const std::filesystem::path& path, const Trajectory& traj,
                     const std::vector<std::string>& extra_comments = {});

/// Loads every *.csv in `dir` in filename order. Each file must carry
/// side_length_m and mass_kg metadata. An empty directory yields an empty
/// list and a warning.
std::vector<Trajectory> import_external_cube_dataset(const std::filesystem::path& dir,
                                                     LoadReport* report = nullptr);

/// Writes each trajectory as <dir>/<name>.csv.
void save_dataset(const std::filesystem::path& dir, const std::vector<Trajectory>& dataset);

struct TrajectoryResult {
  std::string name;
  double e_q = 0.0;
  double position_pct = 0.0;  // mean position error, % of cube width
  double rotation_deg = 0.0;
  bool diverged = false;
};

/// Self-describing JSON results of one command.
struct ResultsDocument {
  std::string tool = "cubesim";
  std::string version = CUBESIM_VERSION;
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::optional<ContactParams> parameters;
  std::optional<Stat> loss;
  std::optional<Stat> position_pct;
  std::optional<Stat> rotation_deg;
  std::optional<Stat> e_q;
  std::vector<TrajectoryResult> trajectories;
  nlohmann::json identification;  // null unless `identify`
  nlohmann::json sweep;           // null unless `sweep`
};

nlohmann::json to_json(const ContactParams& p);
ContactParams contact_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ResultsDocument& doc);
ResultsDocument results_from_json(const nlohmann::json& j);

std::string serialize(const ResultsDocument& doc);
void save_results(const std::filesystem::path& path, const ResultsDocument& doc);
ResultsDocument load_results(const std::filesystem::path& path);

/// Fills the Table-V style statistics and per-trajectory rows.
void fill_error_summary(ResultsDocument& doc, const std::vector<Trajectory>& dataset,
                        const DatasetLoss& loss);

}  // namespace cubesim
