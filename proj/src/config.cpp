#include "magzoll/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "magzoll/error.hpp"

namespace magzoll {

namespace {

constexpr std::string_view kModule = "config";

constexpr const char* kDefaults = R"json({
  "surface": {
    "kind": "flat_torus",
    "lattice": [[1, 0], [0, 1]],
    "radius": 1.0,
    "profile": {"a": "sin(theta)", "da": "cos(theta)", "d2a": "-sin(theta)", "length": "pi"},
    "f": "1",
    "orientation": 1,
    "pole_margin": 0.001
  },
  "lambda": 1.0,
  "seed": 1,
  "flow": {"tol": 1e-10, "max_step": null},
  "start": {"point": [0.0, 0.0], "dir_angle": 0.0},
  "simulate": {"t_span": [0.0, 6.283185307179586]},
  "closed_orbit": {"horizon": null, "return_tol": 1e-7},
  "zoll": {"grid": [12, 12, 8], "horizon": null, "period_tol": 1e-6, "return_tol": 1e-7, "chunk": 16,
           "stop_at_witness": true},
  "dichotomy": {"f_min": null, "f_max": null, "eps": 0.05, "n": 1, "length": null, "self_int": null,
                "horizon": null},
  "waist": {
    "seed": {"kind": "parallel", "theta": 1.6707963267948966, "amplitude": 0.03, "mode": 2, "points": 512,
             "class": [1, 0], "center": [0.5, 0.5], "radius": 0.1, "path": ""},
    "grad_tol": 1e-8, "max_iterations": 20000, "tau_min": 1e-4, "probe_radius": 0.05, "probe_directions": 64
  },
  "continue": {"lambda_target": 0.01, "steps": 10, "neighborhood": 0.05, "threshold_step": null,
               "threshold_max": null},
  "drift": {"lambdas": [], "e": 1.0, "L": 1.0, "eps": 0.0, "c": 2.0, "loops": 50, "tol": 1e-10},
  "diagnostics": {"constants": {"euler": null, "area": null, "constant_curvature": null, "f_avg": null,
                                "f_total": null},
                  "constant_f": null}
})json";

std::string type_name(const Json& j) {
  if (j.is_null()) return "null";
  if (j.is_boolean()) return "boolean";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  return "object";
}

// Merges `patch` into `target` following the schema in `schema`.
void merge(Json& target, const Json& patch, const Json& schema, const std::string& path) {
  if (!patch.is_object()) throw Error(ErrorCode::ConfigError, kModule, "'" + path + "' must be an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string full = path.empty() ? key : path + "." + key;
    if (!schema.contains(key)) throw Error(ErrorCode::ConfigError, kModule, "unknown key '" + full + "'");
    const Json& def = schema.at(key);
    if (def.is_object()) {
      merge(target[key], value, def, full);
      continue;
    }
    const bool expression = def.is_string() && full.rfind("surface.", 0) == 0;
    if (expression && value.is_number()) {
      target[key] = value.dump();
      continue;
    }
    const bool ok = def.is_null()     ? (value.is_number() || value.is_null())
                    : def.is_number() ? value.is_number()
                                      : type_name(def) == type_name(value);
    if (!ok) {
      throw Error(ErrorCode::ConfigError, kModule,
                  "'" + full + "' expects " + (def.is_null() ? std::string("number") : type_name(def)) + ", got " +
                      type_name(value));
    }
    target[key] = value;
  }
}

int line_of(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) line += text[i] == '\n';
  return line;
}

Json set_value(const std::string& dotted, const std::string& raw) {
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::parse_error&) {
    value = raw;
  }
  Json patch = value;
  std::string rest = dotted;
  std::vector<std::string> keys;
  std::size_t pos;
  while ((pos = rest.find('.')) != std::string::npos) {
    keys.push_back(rest.substr(0, pos));
    rest = rest.substr(pos + 1);
  }
  keys.push_back(rest);
  for (auto it = keys.rbegin(); it != keys.rend(); ++it) {
    if (it->empty()) throw Error(ErrorCode::ConfigError, kModule, "empty key in '" + dotted + "'");
    Json wrap = Json::object();
    wrap[*it] = patch;
    patch = std::move(wrap);
  }
  return patch;
}

double number_or_expression(const Json& j, const std::string& key) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto c = Expression::parse(j.get<std::string>()).constant_value();
    if (c) return *c;
  }
  throw Error(ErrorCode::ConfigError, kModule, "'" + key + "' must be a constant");
}

}  // namespace

const Json& default_config() {
  static const Json j = Json::parse(kDefaults);
  return j;
}

ExperimentConfig ExperimentConfig::resolve(const std::string& config_text, const std::vector<std::string>& overrides,
                                           const std::string& source) {
  ExperimentConfig cfg;
  cfg.data = default_config();
  if (!config_text.empty()) {
    Json user;
    try {
      user = Json::parse(config_text);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::ConfigError, kModule,
                  source + ":" + std::to_string(line_of(config_text, e.byte)) + ": " + e.what());
    }
    merge(cfg.data, user, default_config(), "");
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::ConfigError, kModule, "--set expects key=value, got '" + o + "'");
    }
    merge(cfg.data, set_value(o.substr(0, eq), o.substr(eq + 1)), default_config(), "");
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path, const std::vector<std::string>& overrides) {
  std::string text;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, kModule, "cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return resolve(text, overrides, path.empty() ? "config" : path);
}

const Json& ExperimentConfig::at(const std::string& dotted) const {
  const Json* cur = &data;
  std::string rest = dotted;
  while (true) {
    const auto pos = rest.find('.');
    const std::string key = rest.substr(0, pos);
    if (!cur->is_object() || !cur->contains(key)) {
      throw Error(ErrorCode::ConfigError, kModule, "missing key '" + dotted + "'");
    }
    cur = &cur->at(key);
    if (pos == std::string::npos) return *cur;
    rest = rest.substr(pos + 1);
  }
}

double ExperimentConfig::number(const std::string& dotted) const {
  const Json& j = at(dotted);
  if (!j.is_number()) throw Error(ErrorCode::ConfigError, kModule, "'" + dotted + "' must be set to a number");
  return j.get<double>();
}

std::optional<double> ExperimentConfig::optional_number(const std::string& dotted) const {
  const Json& j = at(dotted);
  if (j.is_null()) return std::nullopt;
  return number(dotted);
}

int ExperimentConfig::integer(const std::string& dotted) const {
  const double v = number(dotted);
  if (v != std::floor(v)) throw Error(ErrorCode::ConfigError, kModule, "'" + dotted + "' must be an integer");
  return static_cast<int>(v);
}

MagneticSurface surface_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const Expression f = Expression::parse(j.at("f").get<std::string>());
  const int orientation = j.contains("orientation") ? j.at("orientation").get<int>() : 1;
  if (orientation != 1 && orientation != -1) {
    throw Error(ErrorCode::ConfigError, kModule, "'surface.orientation' must be 1 or -1");
  }
  MagneticSurface s = [&] {
    if (kind == "flat_torus") {
      const Json& l = j.at("lattice");
      if (!l.is_array() || l.size() != 2 || l[0].size() != 2 || l[1].size() != 2) {
        throw Error(ErrorCode::ConfigError, kModule, "'surface.lattice' must be a 2x2 array");
      }
      // Rows of the JSON matrix are the generators.
      const Mat2 m{l[0][0].get<double>(), l[1][0].get<double>(), l[0][1].get<double>(), l[1][1].get<double>()};
      return MagneticSurface::flat_torus(m, f, orientation);
    }
    if (kind == "round_sphere") return MagneticSurface::round_sphere(j.at("radius").get<double>(), f, orientation);
    if (kind == "sphere_of_revolution") {
      const Json& p = j.at("profile");
      for (const char* k : {"a", "da", "d2a"}) {
        if (!p.contains(k) || !p.at(k).is_string()) {
          throw Error(ErrorCode::ConfigError, kModule, std::string("'surface.profile.") + k + "' must be an expression");
        }
      }
      const Profile prof = Profile::from_expressions(
          Expression::parse(p.at("a").get<std::string>()), Expression::parse(p.at("da").get<std::string>()),
          Expression::parse(p.at("d2a").get<std::string>()), number_or_expression(p.at("length"), "surface.profile.length"));
      return MagneticSurface::sphere_of_revolution(prof, f, orientation);
    }
    if (kind == "plane") return MagneticSurface::plane(f, orientation);
    throw Error(ErrorCode::ConfigError, kModule, "unknown surface kind '" + kind + "'");
  }();
  if (j.contains("pole_margin")) s = s.with_pole_margin(j.at("pole_margin").get<double>());
  return s;
}

}  // namespace magzoll
