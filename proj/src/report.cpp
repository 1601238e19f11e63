#include "magzoll/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "magzoll/error.hpp"

#ifndef MAGZOLL_VERSION
#define MAGZOLL_VERSION "0.0.0"
#endif

namespace magzoll {

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

template <class T>
std::string opt(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) return format_number(*v);
  else return std::to_string(*v);
}

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

std::string trajectory_csv(const Trajectory& trajectory) {
  std::string out = "t,x,y,vx,vy\n";
  for (const auto& s : trajectory.samples) {
    out += format_number(s.t) + "," + format_number(s.state.q.x) + "," + format_number(s.state.q.y) + "," +
           format_number(s.state.v.x) + "," + format_number(s.state.v.y) + "\n";
  }
  return out;
}

std::string orbits_csv(const std::vector<OrbitRow>& rows) {
  std::string out = "start_x,start_y,dir_angle,period,length,self_int,class\n";
  for (const auto& r : rows) {
    out += format_number(r.start_x) + "," + format_number(r.start_y) + "," + format_number(r.dir_angle) + "," +
           opt(r.period) + "," + opt(r.length) + "," + opt(r.self_int) + "," + r.cls + "\n";
  }
  return out;
}

std::string drift_csv(const std::vector<DriftRow>& rows) {
  std::string out = "lambda,measured_dx,bound_2delta,ratio\n";
  for (const auto& r : rows) {
    out += format_number(r.lambda) + "," + format_number(r.measured_dx) + "," + format_number(r.bound_2delta) + "," +
           format_number(r.measured_dx / r.bound_2delta) + "\n";
  }
  return out;
}

std::string svg_polylines(const std::vector<std::vector<Vec2>>& paths) {
  constexpr double size = 600.0, pad = 10.0;
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x, hi_x = -lo_x, hi_y = -lo_x;
  for (const auto& p : paths) {
    for (const auto& q : p) {
      lo_x = std::min(lo_x, q.x), hi_x = std::max(hi_x, q.x);
      lo_y = std::min(lo_y, q.y), hi_y = std::max(hi_y, q.y);
    }
  }
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-300});
  const double scale = (size - 2 * pad) / span;
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"0 0 600 600\">\n";
  out += "<rect width=\"600\" height=\"600\" fill=\"white\"/>\n";
  char buf[64];
  for (const auto& p : paths) {
    out += "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < p.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", i ? " " : "", pad + (p[i].x - lo_x) * scale,
                    size - pad - (p[i].y - lo_y) * scale);
      out += buf;
    }
    out += "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

Json report_header(const std::string& command, const ExperimentConfig& config) {
  Json j;
  j["tool"] = "magzoll";
  j["version"] = MAGZOLL_VERSION;
  j["command"] = command;
  j["config"] = config.data;
  return j;
}

Json state_json(const UnitTangentState& s) { return Json{{"q", {s.q.x, s.q.y}}, {"v", {s.v.x, s.v.y}}}; }

Json closed_orbit_json(const ClosedOrbit& orbit) {
  Json j;
  j["start"] = state_json(orbit.start);
  j["period"] = orbit.period;
  j["length"] = orbit.length;
  j["self_int"] = orbit.self_int;
  j["flux_value"] = opt_json(orbit.flux_value);
  j["flux_alternative"] = opt_json(orbit.flux_alternative);
  j["return_distance"] = orbit.return_distance;
  j["multiplicity"] = orbit.multiplicity;
  j["reversal_separation"] = orbit.reversal_separation;
  j["cover_lift"] = orbit.orbit_loop.cover_lift;
  return j;
}

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigError, "cli", "cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace magzoll
