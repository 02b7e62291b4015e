#include "cubesim/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "cubesim/errors.hpp"

namespace cubesim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(std::string_view field, const std::string& source, std::size_t line) {
  const std::string text = trim(field);
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(source, line, "malformed number '" + text + "'");
  }
  if (!std::isfinite(value)) throw ParseError(source, line, "non-finite value '" + text + "'");
  return value;
}

// Shortest text that reads back to the same double.
std::string format_double(double x) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

void warn(LoadReport* report, const std::string& message) {
  if (report) {
    report->warnings.push_back(message);
  } else {
    std::clog << "warning: " << message << "\n";
  }
}

}  // namespace

Trajectory read_trajectory(std::istream& in, const std::string& source, LoadReport* report) {
  std::map<std::string, std::string> meta;
  std::vector<double> times;
  Trajectory traj;
  bool have_columns = false;
  std::string line;
  std::size_t lineno = 0;
  std::size_t renormalized = 0;

  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (text[0] == '#') {
      const auto colon = text.find(':');
      if (colon != std::string::npos) {
        meta[trim(std::string_view(text).substr(1, colon - 1))] =
            trim(std::string_view(text).substr(colon + 1));
      }
      continue;
    }
    if (!have_columns) {
      std::string header;
      for (char c : text) {
        if (c != ' ' && c != '\t') header.push_back(c);
      }
      if (header != kTrajectoryColumns) {
        throw ParseError(source, lineno,
                         "expected column header '" + std::string(kTrajectoryColumns) + "'");
      }
      have_columns = true;
      continue;
    }

    std::vector<double> f;
    f.reserve(14);
    std::size_t start = 0;
    while (true) {
      const auto comma = text.find(',', start);
      f.push_back(parse_double(std::string_view(text).substr(start, comma - start), source, lineno));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 14) {
      throw ParseError(source, lineno, "expected 14 columns, found " + std::to_string(f.size()));
    }
    RigidState s;
    s.p = Vec3(f[1], f[2], f[3]);
    s.quat = Quat(f[4], f[5], f[6], f[7]);
    s.v = Vec3(f[8], f[9], f[10]);
    s.w = Vec3(f[11], f[12], f[13]);
    const double norm = s.quat.norm();
    if (std::abs(norm - 1.0) > 1e-3) {
      throw ParseError(source, lineno, "quaternion norm " + format_double(norm) + " is not unit");
    }
    if (std::abs(norm - 1.0) > 1e-12) {
      s.quat.normalize();
      ++renormalized;
      if (report) report->renormalized_rows.push_back(lineno);
    }
    if (!times.empty() && !(f[0] > times.back())) {
      throw ParseError(source, lineno, "timestamps must be strictly increasing");
    }
    times.push_back(f[0]);
    traj.states.push_back(s);
  }

  if (!have_columns) throw ParseError(source, 0, "missing column header");
  if (traj.states.empty()) throw ParseError(source, 0, "no samples");
  const auto rate_it = meta.find("rate_hz");
  if (rate_it == meta.end()) throw ParseError(source, 0, "missing rate_hz metadata");
  traj.rate_hz = parse_double(rate_it->second, source, 0);
  if (!(traj.rate_hz > 0.0)) throw ParseError(source, 0, "rate_hz must be positive");
  if (auto it = meta.find("body"); it != meta.end()) traj.body = it->second;
  if (auto it = meta.find("name"); it != meta.end()) traj.name = it->second;
  if (auto it = meta.find("side_length_m"); it != meta.end()) {
    traj.side_length_m = parse_double(it->second, source, 0);
  }
  if (auto it = meta.find("mass_kg"); it != meta.end()) {
    traj.mass_kg = parse_double(it->second, source, 0);
  }

  traj.start_time = times.front();
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double expected = traj.start_time + static_cast<double>(i) / traj.rate_hz;
    if (std::abs(times[i] - expected) > 1e-6) {
      throw ParseError(source, 0,
                       "sample " + std::to_string(i) + " at t=" + format_double(times[i]) +
                           " breaks uniform spacing at " + format_double(traj.rate_hz) + " Hz");
    }
  }
  if (renormalized > 0) {
    warn(report, source + ": renormalized " + std::to_string(renormalized) + " quaternion(s)");
  }
  return traj;
}

Trajectory load_trajectory(const fs::path& path, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  Trajectory traj = read_trajectory(in, path.string(), report);
  if (traj.name.empty()) traj.name = path.stem().string();
  return traj;
}

void write_trajectory(std::ostream& out, const Trajectory& traj,
                      const std::vector<std::string>& extra_comments) {
  out << "# rate_hz: " << format_double(traj.rate_hz) << "\n";
  if (!traj.name.empty()) out << "# name: " << traj.name << "\n";
  out << "# body: " << traj.body << "\n";
  if (traj.side_length_m) out << "# side_length_m: " << format_double(*traj.side_length_m) << "\n";
  if (traj.mass_kg) out << "# mass_kg: " << format_double(*traj.mass_kg) << "\n";
  for (const auto& c : extra_comments) out << "# " << c << "\n";
  out << kTrajectoryColumns << "\n";
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const RigidState& s = traj.states[i];
    const double t = traj.start_time + static_cast<double>(i) / traj.rate_hz;
    const double row[14] = {t,         s.p.x(),   s.p.y(),   s.p.z(),   s.quat.w(),
                            s.quat.x(), s.quat.y(), s.quat.z(), s.v.x(),   s.v.y(),
                            s.v.z(),   s.w.x(),   s.w.y(),   s.w.z()};
    for (int c = 0; c < 14; ++c) {
      if (c) out << ',';
      out << format_double(row[c]);
    }
    out << "\n";
  }
}

void save_trajectory(const fs::path& path, const Trajectory& traj,
                     const std::vector<std::string>& extra_comments) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_trajectory(out, traj, extra_comments);
}

std::vector<Trajectory> import_external_cube_dataset(const fs::path& dir, LoadReport* report) {
  if (!fs::is_directory(dir)) throw ParseError(dir.string(), 0, "not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Trajectory> out;
  if (files.empty()) {
    warn(report, dir.string() + ": no trajectory files found");
    return out;
  }
  out.reserve(files.size());
  for (const auto& f : files) {
    Trajectory t = load_trajectory(f, report);
    if (!t.side_length_m) throw ParseError(f.string(), 0, "missing side_length_m metadata");
    if (!t.mass_kg) throw ParseError(f.string(), 0, "missing mass_kg metadata");
    out.push_back(std::move(t));
  }
  return out;
}

void save_dataset(const fs::path& dir, const std::vector<Trajectory>& dataset) {
  fs::create_directories(dir);
  for (const auto& t : dataset) {
    if (t.name.empty()) throw std::invalid_argument("save_dataset: trajectory without a name");
    save_trajectory(dir / (t.name + ".csv"), t);
  }
}

// ---------------------------------------------------------------------------
// results

json to_json(const ContactParams& p) {
  return json{{"model", std::string(to_string(p.model))}, {"mu", p.mu}, {"k", p.k}, {"b", p.b}};
}

ContactParams contact_params_from_json(const json& j) {
  ContactParams p;
  p.model = parse_contact_model(j.at("model").get<std::string>());
  p.mu = j.at("mu").get<double>();
  p.k = j.at("k").get<double>();
  p.b = j.at("b").get<double>();
  return p;
}

namespace {

json stat_json(const Stat& s) { return json{{"mean", s.mean}, {"std", s.stddev}}; }

std::optional<Stat> stat_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return Stat{j.at(key).at("mean").get<double>(), j.at(key).at("std").get<double>()};
}

}  // namespace

json to_json(const ResultsDocument& doc) {
  json j;
  j["tool"] = doc.tool;
  j["version"] = doc.version;
  j["command"] = doc.command;
  j["config"] = doc.config;
  j["parameters"] = doc.parameters ? to_json(*doc.parameters) : json(nullptr);
  j["loss"] = doc.loss ? stat_json(*doc.loss) : json(nullptr);
  json summary = json::object();
  if (doc.position_pct) summary["position_pct"] = stat_json(*doc.position_pct);
  if (doc.rotation_deg) summary["rotation_deg"] = stat_json(*doc.rotation_deg);
  if (doc.e_q) summary["e_q"] = stat_json(*doc.e_q);
  j["summary"] = summary;
  json rows = json::array();
  for (const auto& t : doc.trajectories) {
    rows.push_back({{"name", t.name},
                    {"e_q", t.e_q},
                    {"position_pct", t.position_pct},
                    {"rotation_deg", t.rotation_deg},
                    {"diverged", t.diverged}});
  }
  j["trajectories"] = rows;
  j["identification"] = doc.identification;
  j["sweep"] = doc.sweep;
  return j;
}

ResultsDocument results_from_json(const json& j) {
  ResultsDocument doc;
  doc.tool = j.at("tool").get<std::string>();
  doc.version = j.at("version").get<std::string>();
  doc.command = j.at("command").get<std::string>();
  doc.config = j.at("config");
  if (!j.at("parameters").is_null()) doc.parameters = contact_params_from_json(j.at("parameters"));
  doc.loss = stat_from(j, "loss");
  const json& summary = j.at("summary");
  doc.position_pct = stat_from(summary, "position_pct");
  doc.rotation_deg = stat_from(summary, "rotation_deg");
  doc.e_q = stat_from(summary, "e_q");
  for (const auto& row : j.at("trajectories")) {
    doc.trajectories.push_back({row.at("name").get<std::string>(), row.at("e_q").get<double>(),
                                row.at("position_pct").get<double>(),
                                row.at("rotation_deg").get<double>(),
                                row.at("diverged").get<bool>()});
  }
  doc.identification = j.value("identification", json(nullptr));
  doc.sweep = j.value("sweep", json(nullptr));
  return doc;
}

std::string serialize(const ResultsDocument& doc) { return to_json(doc).dump(2) + "\n"; }

void save_results(const fs::path& path, const ResultsDocument& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize(doc);
}

ResultsDocument load_results(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  try {
    return results_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

void fill_error_summary(ResultsDocument& doc, const std::vector<Trajectory>& dataset,
                        const DatasetLoss& loss) {
  std::vector<double> pos, rot, eq;
  doc.trajectories.clear();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    TrajectoryResult row;
    row.name = dataset[i].name;
    row.diverged = loss.diverged[i];
    row.e_q = loss.per_trajectory[i];
    if (!row.diverged) {
      row.position_pct = 100.0 * loss.reports[i].mean_position_error_frac;
      row.rotation_deg = loss.reports[i].mean_rotation_error_deg;
      pos.push_back(row.position_pct);
      rot.push_back(row.rotation_deg);
    }
    eq.push_back(row.e_q);
    doc.trajectories.push_back(row);
  }
  doc.position_pct = mean_and_stddev(pos);
  doc.rotation_deg = mean_and_stddev(rot);
  doc.e_q = mean_and_stddev(eq);
  doc.loss = doc.e_q;
}

}  // namespace cubesim
