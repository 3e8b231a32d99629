#pragma once

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "helflow/decay.hpp"
#include "helflow/flow.hpp"
#include "helflow/spectra.hpp"

// File formats.
//   Ledger: CSV, header `t,F,grad_l2,grad_proxy,area_0,vol_0,dissipation,dt`,
//           values printed with 15 significant digits; byte-deterministic.
//   Checkpoint: versioned little-endian binary holding the surface, grid
//           shape, time, physics, targets, and the raw height samples, so a
//           re-read reproduces the state bit-exactly.
//   Mesh:   Wavefront OBJ, consistently oriented closed triangulation of the
//           sample grid (pole fans close the sphere).
//   Reports: JSON for decay fits and spectrum analyses.

namespace helflow {

static_assert(std::endian::native == std::endian::little,
              "binary checkpoints assume a little-endian host");

// ---- ledger CSV -------------------------------------------------------

inline const char* kLedgerHeader =
    "t,F,grad_l2,grad_proxy,area_0,vol_0,dissipation,dt";

namespace detail {

inline std::string g15(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

inline std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// locale-independent float parse; accepts subnormals, rejects overflow
inline bool parse_f64(const std::string& cell, double& out) {
  const std::string t = trimmed(cell);
  if (t.empty()) return false;
  const char* e = t.data() + t.size();
  auto r = std::from_chars(t.data(), e, out);
  return r.ec == std::errc() && r.ptr == e;
}

}  // namespace detail

inline void write_ledger(std::ostream& os, const std::vector<FlowRecord>& rs) {
  os << kLedgerHeader << '\n';
  for (const FlowRecord& r : rs)
    os << detail::g15(r.t) << ',' << detail::g15(r.F) << ','
       << detail::g15(r.grad_l2) << ',' << detail::g15(r.grad_proxy) << ','
       << detail::g15(r.area) << ',' << detail::g15(r.volume) << ','
       << detail::g15(r.dissipation) << ',' << detail::g15(r.dt) << '\n';
}

inline void write_ledger_file(const std::string& path,
                              const std::vector<FlowRecord>& rs) {
  std::ofstream os(path, std::ios::binary);  // byte-stable: no eol mangling
  if (!os) throw DomainError("cannot open ledger for writing: " + path);
  write_ledger(os, rs);
  os.flush();
  if (!os.good()) throw DomainError("ledger write failed: " + path);
}

inline std::vector<FlowRecord> read_ledger(std::istream& is,
                                           const std::string& context) {
  std::string line;
  if (!std::getline(is, line) || detail::trimmed(line) != kLedgerHeader)
    throw DomainError(context + ": not a flow ledger (bad header)");
  std::vector<FlowRecord> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::trimmed(line).empty()) continue;
    double v[8];
    std::stringstream ss(line);
    std::string cell;
    for (int k = 0; k < 8; ++k) {
      if (!std::getline(ss, cell, ','))
        throw DomainError(context + ":" + std::to_string(lineno) +
                          ": expected 8 columns");
      if (!detail::parse_f64(cell, v[k]))
        throw DomainError(context + ":" + std::to_string(lineno) +
                          ": bad number '" + cell + "'");
    }
    out.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]});
  }
  return out;
}

inline std::vector<FlowRecord> read_ledger_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DomainError("cannot read ledger file '" + path + "'");
  return read_ledger(is, path);
}

// ---- checkpoint ---------------------------------------------------------

struct Checkpoint {
  ReferenceSurface surface;
  int nu = 0, nv = 0;
  double t = 0.0;
  Physics physics;
  ComponentTargets targets;
  Field h;
};

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t x) {
  os.write(reinterpret_cast<const char*>(&x), 4);
}
inline void put_f64(std::ostream& os, double x) {
  os.write(reinterpret_cast<const char*>(&x), 8);
}
inline std::uint32_t get_u32(std::istream& is, const std::string& ctx) {
  std::uint32_t x = 0;
  if (!is.read(reinterpret_cast<char*>(&x), 4))
    throw DomainError(ctx + ": truncated checkpoint");
  return x;
}
inline double get_f64(std::istream& is, const std::string& ctx) {
  double x = 0;
  if (!is.read(reinterpret_cast<char*>(&x), 8))
    throw DomainError(ctx + ": truncated checkpoint");
  return x;
}

}  // namespace detail

inline constexpr std::uint32_t kCheckpointMagic = 0x4b434648u;  // "HFCK"
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void write_checkpoint(std::ostream& os, const Checkpoint& c) {
  using detail::put_f64;
  using detail::put_u32;
  put_u32(os, kCheckpointMagic);
  put_u32(os, kCheckpointVersion);
  put_u32(os, c.surface.kind == SurfaceKind::Sphere ? 0u : 1u);
  put_f64(os, c.surface.radius);
  put_f64(os, c.surface.major);
  put_f64(os, c.surface.minor);
  put_u32(os, std::uint32_t(c.nu));
  put_u32(os, std::uint32_t(c.nv));
  put_f64(os, c.t);
  put_f64(os, c.physics.kappa);
  put_f64(os, c.physics.c0);
  put_f64(os, c.targets.area);
  put_f64(os, c.targets.volume);
  put_u32(os, c.targets.round ? 1u : 0u);
  for (int i = 0; i < c.nu; ++i)
    for (int j = 0; j < c.nv; ++j) put_f64(os, c.h(i, j));
}

inline void write_checkpoint_file(const std::string& path,
                                  const Checkpoint& c) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DomainError("cannot open checkpoint for writing: " + path);
  write_checkpoint(os, c);
  os.flush();
  if (!os.good()) throw DomainError("checkpoint write failed: " + path);
}

inline Checkpoint read_checkpoint(std::istream& is, const std::string& ctx) {
  using detail::get_f64;
  using detail::get_u32;
  if (get_u32(is, ctx) != kCheckpointMagic)
    throw DomainError(ctx + ": not a checkpoint file (bad magic)");
  const std::uint32_t version = get_u32(is, ctx);
  if (version != kCheckpointVersion)
    throw DomainError(ctx + ": unsupported checkpoint version " +
                      std::to_string(version));
  Checkpoint c;
  const std::uint32_t kind = get_u32(is, ctx);
  if (kind > 1) throw DomainError(ctx + ": bad surface kind in checkpoint");
  const double radius = get_f64(is, ctx);
  const double major = get_f64(is, ctx);
  const double minor = get_f64(is, ctx);
  c.surface = kind == 0 ? make_sphere(radius) : make_torus(major, minor);
  c.surface.radius = radius;
  c.surface.major = major;
  c.surface.minor = minor;
  c.nu = int(get_u32(is, ctx));
  c.nv = int(get_u32(is, ctx));
  if (c.nu < 1 || c.nv < 1 || c.nu > (1 << 20) || c.nv > (1 << 20))
    throw DomainError(ctx + ": implausible grid shape in checkpoint");
  c.t = get_f64(is, ctx);
  c.physics.kappa = get_f64(is, ctx);
  c.physics.c0 = get_f64(is, ctx);
  c.targets.area = get_f64(is, ctx);
  c.targets.volume = get_f64(is, ctx);
  c.targets.round = get_u32(is, ctx) != 0;
  c.h.resize(c.nu, c.nv);
  for (int i = 0; i < c.nu; ++i)
    for (int j = 0; j < c.nv; ++j) c.h(i, j) = get_f64(is, ctx);
  return c;
}

inline Checkpoint read_checkpoint_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DomainError("cannot read checkpoint file '" + path + "'");
  return read_checkpoint(is, path);
}

// ---- OBJ surface export ---------------------------------------------------

namespace detail {

inline void obj_vertex(std::ostream& os, double x, double y, double z) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", x, y, z);
  os << buf;
}

}  // namespace detail

// Closed, consistently oriented triangulation of the sample grid.  Torus
// grids wrap in both directions; sphere grids get two pole vertices (the
// reference pole offset by the v-averaged nearest-ring height) and fans.
inline void write_obj(std::ostream& os, const GeometryState& s) {
  const Grid& g = *s.grid;
  const int nu = g.nu, nv = g.nv;
  os << "# closed surface mesh, " << to_string(g.kind()) << " chart "
     << nu << "x" << nv << "\n";
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j)
      detail::obj_vertex(os, s.P[0](i, j), s.P[1](i, j), s.P[2](i, j));
  auto idx = [nv](int i, int j) { return 1 + i * nv + j; };

  if (g.kind() == SurfaceKind::Torus) {
    for (int i = 0; i < nu; ++i) {
      const int i1 = (i + 1) % nu;
      for (int j = 0; j < nv; ++j) {
        const int j1 = (j + 1) % nv;
        const int a = idx(i, j), b = idx(i1, j), c = idx(i1, j1),
                  d = idx(i, j1);
        os << "f " << a << ' ' << b << ' ' << c << '\n';
        os << "f " << a << ' ' << c << ' ' << d << '\n';
      }
    }
    return;
  }

  const double R = g.ref.radius;
  double hn = 0.0, hs = 0.0;
  for (int j = 0; j < nv; ++j) {
    hn += s.h(0, j);
    hs += s.h(nu - 1, j);
  }
  hn /= nv;
  hs /= nv;
  detail::obj_vertex(os, 0.0, 0.0, R + hn);
  detail::obj_vertex(os, 0.0, 0.0, -(R + hs));
  const int north = nu * nv + 1, south = nu * nv + 2;

  for (int j = 0; j < nv; ++j) {
    const int j1 = (j + 1) % nv;
    os << "f " << north << ' ' << idx(0, j) << ' ' << idx(0, j1) << '\n';
  }
  for (int i = 0; i + 1 < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      const int j1 = (j + 1) % nv;
      const int a = idx(i, j), b = idx(i + 1, j), c = idx(i + 1, j1),
                d = idx(i, j1);
      os << "f " << a << ' ' << b << ' ' << c << '\n';
      os << "f " << a << ' ' << c << ' ' << d << '\n';
    }
  for (int j = 0; j < nv; ++j) {
    const int j1 = (j + 1) % nv;
    os << "f " << south << ' ' << idx(nu - 1, j1) << ' ' << idx(nu - 1, j)
       << '\n';
  }
}

inline void write_obj_file(const std::string& path, const GeometryState& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DomainError("cannot open mesh for writing: " + path);
  write_obj(os, s);
  os.flush();
  if (!os.good()) throw DomainError("mesh write failed: " + path);
}

// Optional legacy-ASCII VTK (PolyData) of the same triangulation, for tools
// that do not read OBJ.
inline void write_vtk(std::ostream& os, const GeometryState& s) {
  std::ostringstream obj;
  write_obj(obj, s);
  std::istringstream in(obj.str());
  std::vector<std::array<double, 3>> verts;
  std::vector<std::array<long, 3>> tris;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      std::array<double, 3> p{};
      ls >> p[0] >> p[1] >> p[2];
      verts.push_back(p);
    } else if (tag == "f") {
      std::array<long, 3> f{};
      ls >> f[0] >> f[1] >> f[2];
      tris.push_back({f[0] - 1, f[1] - 1, f[2] - 1});
    }
  }
  os << "# vtk DataFile Version 3.0\nclosed surface mesh\nASCII\n"
     << "DATASET POLYDATA\nPOINTS " << verts.size() << " double\n";
  for (const auto& p : verts)
    os << detail::g15(p[0]) << ' ' << detail::g15(p[1]) << ' '
       << detail::g15(p[2]) << '\n';
  os << "POLYGONS " << tris.size() << ' ' << 4 * tris.size() << '\n';
  for (const auto& f : tris)
    os << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

// ---- mesh statistics (for watertightness checks) ---------------------------

struct MeshStats {
  long vertices = 0, faces = 0, edges = 0;
  bool watertight = false;  // every undirected edge shared by exactly 2 faces
  bool oriented = false;    // every directed edge used exactly once
  long euler() const { return vertices - edges + faces; }
};

inline MeshStats obj_mesh_stats(std::istream& is) {
  MeshStats st;
  std::map<std::pair<long, long>, int> undirected;
  std::map<std::pair<long, long>, int> directed;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      ++st.vertices;
    } else if (tag == "f") {
      std::vector<long> vs;
      long v;
      while (ls >> v) vs.push_back(v);
      if (vs.size() < 3) throw DomainError("mesh face with fewer than 3 vertices");
      ++st.faces;
      for (size_t k = 0; k < vs.size(); ++k) {
        const long a = vs[k], b = vs[(k + 1) % vs.size()];
        ++directed[{a, b}];
        ++undirected[{std::min(a, b), std::max(a, b)}];
      }
    }
  }
  st.edges = long(undirected.size());
  st.watertight = !undirected.empty();
  for (const auto& [e, n] : undirected)
    if (n != 2) st.watertight = false;
  st.oriented = !directed.empty();
  for (const auto& [e, n] : directed)
    if (n != 1) st.oriented = false;
  return st;
}

inline MeshStats obj_mesh_stats_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DomainError("cannot read mesh file '" + path + "'");
  return obj_mesh_stats(is);
}

// ---- JSON reports -----------------------------------------------------

inline nlohmann::json decay_json(const DecayFit& f) {
  nlohmann::json j;
  j["theta"] = f.theta;
  j["type"] = f.exponential ? "exponential" : "algebraic";
  j["c0"] = f.rate;  // exponential rate constant
  j["alg_exponent"] = f.alg_exponent;
  j["f_inf"] = f.f_inf;
  j["consistent"] = f.consistent;
  j["ssr_exp"] = f.ssr_exp;
  j["ssr_alg"] = f.ssr_alg;
  j["window"] = {f.window_begin, f.window_end};
  if (std::isnan(f.beta))
    j["beta"] = nullptr;
  else
    j["beta"] = f.beta;
  return j;
}

inline nlohmann::json spectrum_json(const HessianAssembly& a,
                                    const SpectrumAnalysis& an) {
  nlohmann::json j;
  j["labels"] = a.labels;
  j["dropped"] = a.dropped;
  j["max_asymmetry"] = a.max_asymmetry;
  j["stationarity_residual"] = a.stationarity_residual;
  j["stationary_warning"] = a.stationary_warning;
  j["eigenvalues"] = an.report.eigenvalues;
  j["tol"] = an.report.tol;
  j["cutoff_abs"] = an.report.cutoff_abs;
  j["near_kernel_dim"] = an.report.near_kernel_dim;
  j["principal_angles_rad"] = an.report.principal_angles;
  if (an.report.has_transverse)
    j["smallest_transverse"] = an.report.smallest_transverse;
  else
    j["smallest_transverse"] = nullptr;
  nlohmann::json syms = nlohmann::json::array();
  for (size_t i = 0; i < an.symmetries.size(); ++i) {
    nlohmann::json s;
    s["label"] = an.symmetries[i].label;
    s["residual_rel"] = an.symmetries[i].residual_rel;
    s["rayleigh"] = i < an.report.symmetry_rayleigh.size()
                        ? nlohmann::json(an.report.symmetry_rayleigh[i])
                        : nlohmann::json(nullptr);
    syms.push_back(std::move(s));
  }
  j["symmetries"] = std::move(syms);
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DomainError("cannot open file for writing: " + path);
  os << text;
  os.flush();
  if (!os.good()) throw DomainError("write failed: " + path);
}

}  // namespace helflow
