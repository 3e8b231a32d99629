#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "helflow/flow.hpp"
#include "helflow/harmonics.hpp"

// Flat `key = value` configuration with a typed whitelist and documented
// defaults.  Unknown keys are hard errors so parameter sweeps fail loudly on
// typos.  Lines starting with # are comments; values may be double-quoted.

namespace helflow {

struct Config {
  std::string surface_kind = "sphere";  // surface.kind: sphere | torus
  double radius = 1.0;                  // surface.radius (sphere)
  double major = 2.0;                   // surface.major  (torus)
  double minor = 0.5;                   // surface.minor  (torus)
  int n_u = 32;                         // grid.n_u
  int n_v = 32;                         // grid.n_v (even on the sphere)
  double kappa = 1.0;                   // physics.kappa
  double c0 = 0.0;                      // physics.c0
  std::string mobility = "l2";          // flow.mobility: l2 | hinv
  double ell = 0.5;                     // flow.ell (hinv screening length)
  double dt0 = 1e-3;                    // flow.dt0
  double t_end = 1.0;                   // flow.t_end
  double grad_tol = 0.0;                // flow.grad_tol (0 = no stop)
  double dt_max = 0.0;                  // flow.dt_max (0 = uncapped)
  long max_steps = 100000;              // flow.max_steps
  int record_every = 1;                 // flow.record_every
  int snapshot_every = 0;               // flow.snapshot_every (0 = off)
  std::string perturbation_mode = "none";  // perturbation.mode, grammar below
  double amplitude = 0.0;               // perturbation.amplitude
  int spectrum_max_degree = 4;          // spectrum.max_degree
  double spectrum_tol = 1e-6;           // spectrum.tol (near-kernel cut)
  std::string output_dir;               // output.dir; empty -> env/cwd
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    return s.substr(1, s.size() - 2);
  return s;
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + " expects a number, got '" + v + "'");
}

inline long to_long(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const long n = std::stol(v, &pos);
    if (pos == v.size()) return n;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + " expects an integer, got '" + v + "'");
}

inline int to_int(const std::string& key, const std::string& v) {
  const long n = to_long(key, v);
  if (n < -1000000000L || n > 1000000000L)
    throw ConfigError(key + " out of range: " + v);
  return int(n);
}

}  // namespace detail

inline void set_config_value(Config& c, const std::string& key,
                             const std::string& raw) {
  using detail::to_double;
  using detail::to_int;
  using detail::to_long;
  const std::string v = detail::unquote(detail::trim(raw));
  if (key == "surface.kind") {
    if (v != "sphere" && v != "torus")
      throw ConfigError("surface.kind must be sphere or torus, got '" + v +
                        "'");
    c.surface_kind = v;
  } else if (key == "surface.radius") {
    c.radius = to_double(key, v);
  } else if (key == "surface.major") {
    c.major = to_double(key, v);
  } else if (key == "surface.minor") {
    c.minor = to_double(key, v);
  } else if (key == "grid.n_u") {
    c.n_u = to_int(key, v);
  } else if (key == "grid.n_v") {
    c.n_v = to_int(key, v);
  } else if (key == "physics.kappa") {
    c.kappa = to_double(key, v);
  } else if (key == "physics.c0") {
    c.c0 = to_double(key, v);
  } else if (key == "flow.mobility") {
    if (v != "l2" && v != "hinv")
      throw ConfigError("flow.mobility must be l2 or hinv, got '" + v + "'");
    c.mobility = v;
  } else if (key == "flow.ell") {
    c.ell = to_double(key, v);
  } else if (key == "flow.dt0") {
    c.dt0 = to_double(key, v);
  } else if (key == "flow.t_end") {
    c.t_end = to_double(key, v);
  } else if (key == "flow.grad_tol") {
    c.grad_tol = to_double(key, v);
  } else if (key == "flow.dt_max") {
    c.dt_max = to_double(key, v);
  } else if (key == "flow.max_steps") {
    c.max_steps = to_long(key, v);
  } else if (key == "flow.record_every") {
    c.record_every = to_int(key, v);
  } else if (key == "flow.snapshot_every") {
    c.snapshot_every = to_int(key, v);
  } else if (key == "perturbation.mode") {
    c.perturbation_mode = v;
  } else if (key == "perturbation.amplitude") {
    c.amplitude = to_double(key, v);
  } else if (key == "spectrum.max_degree") {
    c.spectrum_max_degree = to_int(key, v);
  } else if (key == "spectrum.tol") {
    c.spectrum_tol = to_double(key, v);
  } else if (key == "output.dir") {
    c.output_dir = v;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

// "key = value" or "key=value" as passed on the command line.
inline void apply_override(Config& c, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must look like key=value, got '" + kv + "'");
  const std::string key = detail::trim(kv.substr(0, eq));
  const std::string val = kv.substr(eq + 1);
  if (key.empty()) throw ConfigError("override with empty key: '" + kv + "'");
  set_config_value(c, key, val);
}

inline Config parse_config(std::istream& is, const std::string& context) {
  Config c;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(context + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + t + "'");
    const std::string key = detail::trim(t.substr(0, eq));
    try {
      set_config_value(c, key, t.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(context + ":" + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
  return c;
}

inline Config load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file '" + path + "'");
  return parse_config(is, path);
}

// ---- builders -------------------------------------------------------------

inline ReferenceSurface config_surface(const Config& c) {
  try {
    return c.surface_kind == "sphere" ? make_sphere(c.radius)
                                      : make_torus(c.major, c.minor);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());  // bad user parameters, not a runtime failure
  }
}

inline GridPtr config_grid(const Config& c) {
  if (c.n_u < 4 || c.n_v < 4)
    throw ConfigError("grid.n_u and grid.n_v must be at least 4");
  if (c.surface_kind == "sphere" && c.n_v % 2 != 0)
    throw ConfigError("grid.n_v must be even on the sphere");
  return make_grid(config_surface(c), c.n_u, c.n_v);
}

inline Physics config_physics(const Config& c) {
  if (!(c.kappa > 0.0)) throw ConfigError("physics.kappa must be positive");
  return Physics{c.kappa, c.c0};
}

inline MobilitySpec config_mobility(const Config& c) {
  MobilitySpec m;
  m.kind = c.mobility == "l2" ? MobilitySpec::Kind::L2
                              : MobilitySpec::Kind::HinvProxy;
  if (!(c.ell >= 0.0)) throw ConfigError("flow.ell must be nonnegative");
  m.ell = c.ell;
  return m;
}

// Initial height from the perturbation grammar:
//   none | y:l,m | cos_u:k | cos_v:k | random:seed
// scaled by perturbation.amplitude.
inline Field config_perturbation(const Config& c, const Grid& g) {
  const std::string& mode = c.perturbation_mode;
  if (mode == "none") return Field::Zero(g.nu, g.nv);
  const auto colon = mode.find(':');
  const std::string head = mode.substr(0, colon);
  const std::string args =
      colon == std::string::npos ? "" : mode.substr(colon + 1);
  auto arg_int = [&](const std::string& a) {
    return detail::to_int("perturbation.mode", a);
  };
  if (head == "y") {
    if (g.kind() != SurfaceKind::Sphere)
      throw ConfigError("perturbation.mode y:l,m needs surface.kind = sphere");
    const auto comma = args.find(',');
    if (comma == std::string::npos)
      throw ConfigError("perturbation.mode y needs 'y:l,m', got '" + mode +
                        "'");
    const int l = arg_int(args.substr(0, comma));
    const int m = arg_int(args.substr(comma + 1));
    if (l < 0 || std::abs(m) > l)
      throw ConfigError("perturbation.mode y:l,m needs l >= 0 and |m| <= l");
    return Field(c.amplitude * sphere_harmonic_field(g, l, m));
  }
  if (head == "cos_u" || head == "cos_v") {
    if (args.empty())
      throw ConfigError("perturbation.mode " + head + " needs '" + head +
                        ":k', got '" + mode + "'");
    const int k = arg_int(args);
    Field f(g.nu, g.nv);
    for (int i = 0; i < g.nu; ++i)
      for (int j = 0; j < g.nv; ++j)
        f(i, j) = head == "cos_u" ? std::cos(k * g.u(i)) : std::cos(k * g.v(j));
    return Field(c.amplitude * f);
  }
  if (head == "random") {
    if (args.empty())
      throw ConfigError("perturbation.mode random needs 'random:seed'");
    const long seed = detail::to_long("perturbation.mode", args);
    if (seed < 0) throw ConfigError("perturbation.mode random seed must be >= 0");
    return random_smooth_field(g, std::uint64_t(seed), c.amplitude);
  }
  throw ConfigError("unknown perturbation.mode '" + mode +
                    "' (expected none, y:l,m, cos_u:k, cos_v:k, random:seed)");
}

inline FlowParams config_flow_params(const Config& c) {
  FlowParams p;
  p.phys = config_physics(c);
  p.mob = config_mobility(c);
  p.dt0 = c.dt0;
  p.t_end = c.t_end;
  p.grad_tol = c.grad_tol;
  p.max_steps = c.max_steps;
  p.record_every = c.record_every;
  p.snapshot_every = c.snapshot_every;
  p.tol.dt_max = c.dt_max;
  return p;
}

// output.dir beats HELFLOW_OUTPUT_DIR beats the working directory.
inline std::string config_output_dir(const Config& c) {
  if (!c.output_dir.empty()) return c.output_dir;
  if (const char* env = std::getenv("HELFLOW_OUTPUT_DIR"); env && *env)
    return env;
  return ".";
}

}  // namespace helflow
