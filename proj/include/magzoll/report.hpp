#pragma once

#include <string>
#include <vector>

#include "magzoll/config.hpp"
#include "magzoll/flow.hpp"
#include "magzoll/orbits.hpp"

namespace magzoll {

/// Shortest round-trip text for a double (17 significant digits).
std::string format_number(double x);

struct OrbitRow {
  double start_x = 0.0, start_y = 0.0, dir_angle = 0.0;
  std::optional<double> period, length;
  std::optional<std::size_t> self_int;
  std::string cls;
};

struct DriftRow {
  double lambda = 0.0, measured_dx = 0.0, bound_2delta = 0.0;
};

std::string trajectory_csv(const Trajectory& trajectory);
std::string orbits_csv(const std::vector<OrbitRow>& rows);
std::string drift_csv(const std::vector<DriftRow>& rows);

/// Polylines scaled into a 600 x 600 viewport, y pointing up.
std::string svg_polylines(const std::vector<std::vector<Vec2>>& paths);

/// Report skeleton: tool, version, command and the resolved config.
Json report_header(const std::string& command, const ExperimentConfig& config);

Json state_json(const UnitTangentState& s);
Json closed_orbit_json(const ClosedOrbit& orbit);

/// Writes `text` to dir/name, creating the directory.
void write_file(const std::string& dir, const std::string& name, const std::string& text);

}  // namespace magzoll
