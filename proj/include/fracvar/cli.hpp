#pragma once

#include "fracvar/admissibility.hpp"
#include "fracvar/density.hpp"
#include "fracvar/errors.hpp"
#include "fracvar/mesh.hpp"
#include "fracvar/minimizer.hpp"
#include "fracvar/noninterpenetration.hpp"
#include "fracvar/varifold.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fracvar::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using fracvar::detail::fmt_double;

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kInvalidInput = 2,
  kDensityCheckFailed = 3,
  kNoFeasibleCandidate = 4,
};

// ---------------------------------------------------------------------------
// JSON helpers

/// Non-finite doubles are written as the strings "inf", "-inf", "nan".
inline json number(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  return v;
}

inline json to_json(const Vec3 &v) { return json::array({number(v[0]), number(v[1]), number(v[2])}); }

inline json to_json(const Mat3 &m) {
  json out = json::array();
  for (int i = 0; i < 3; ++i)
    out.push_back(json::array({number(m(i, 0)), number(m(i, 1)), number(m(i, 2))}));
  return out;
}

namespace detail {

/// Reads keys out of a JSON object and rejects keys nobody asked for.
class ObjectReader {
public:
  ObjectReader(const json &j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object())
      throw ValueError(where_ + ": expected an object");
  }

  bool has(const std::string &key) const { return j_.contains(key); }

  template <class T> void get(const std::string &key, T &out) {
    seen_.insert(key);
    if (!j_.contains(key))
      return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception &e) {
      throw ValueError(where_ + "." + key + ": " + e.what());
    }
  }

  const json &sub(const std::string &key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw ValueError(where_ + ": unknown key '" + it.key() + "'");
  }

private:
  const json &j_;
  std::string where_;
  std::set<std::string> seen_;
};

inline Mat3 mat3_from_json(const json &j, const std::string &where) {
  if (!j.is_array() || j.size() != 3)
    throw ValueError(where + ": expected a 3x3 array");
  Mat3 m;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_array() || j[i].size() != 3)
      throw ValueError(where + ": expected a 3x3 array");
    for (int k = 0; k < 3; ++k)
      m(i, k) = j[i][k].get<double>();
  }
  return m;
}

inline Vec3 vec3_from_json(const json &j, const std::string &where) {
  if (!j.is_array() || j.size() != 3)
    throw ValueError(where + ": expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json parse_json_file(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw std::ios_base::failure("cannot open config file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Run configuration

struct AffineMap {
  Mat3 matrix = Mat3::Identity();
  Vec3 offset = Vec3::Zero();
};

struct RunConfig {
  fs::path mesh_path;
  fs::path surface_path; ///< used when varifold_only is set
  DensitySpec density;
  EnergyParams params;
  MinimizerConfig minimizer;
  std::optional<AffineMap> dirichlet; ///< replaces the mesh's Γ0 data with y0 = A x + b
  bool varifold_only = false;
  std::size_t density_samples = 100000;
  fs::path output_dir = "out";
  std::uint64_t seed = 0;

  /// Parse a config object; relative paths resolve against `base_dir`.
  static RunConfig from_json(const json &j, const fs::path &base_dir = ".") {
    RunConfig cfg;
    detail::ObjectReader top(j, "config");
    std::string mesh, surface, out = "out";
    top.get("mesh", mesh);
    top.get("surface", surface);
    top.get("output_dir", out);
    top.get("seed", cfg.seed);
    top.get("varifold_only", cfg.varifold_only);

    if (top.has("params")) {
      detail::ObjectReader r(top.sub("params"), "params");
      auto &p = cfg.params;
      r.get("c", p.c);
      r.get("p", p.p);
      r.get("q", p.q);
      r.get("r", p.r);
      r.get("s", p.s);
      r.get("p_bar", p.p_bar);
      r.get("a_bar", p.a_bar);
      r.get("a1", p.a1);
      r.get("a2", p.a2);
      r.get("K", p.K);
      r.get("C", p.C);
      r.finish();
    }
    // Density parameters default to the class constants.
    cfg.density = DensitySpec::reference(cfg.params.c, cfg.params.p, cfg.params.q, cfg.params.r, cfg.params.s);
    if (top.has("density")) {
      detail::ObjectReader r(top.sub("density"), "density");
      std::string family = to_string(cfg.density.family);
      r.get("family", family);
      cfg.density.family = density_family_from_string(family);
      r.get("c", cfg.density.c);
      r.get("p", cfg.density.p);
      r.get("q", cfg.density.q);
      r.get("r", cfg.density.r);
      r.get("s", cfg.density.s);
      r.get("kappa", cfg.density.kappa);
      r.finish();
    }
    if (top.has("minimizer")) {
      detail::ObjectReader r(top.sub("minimizer"), "minimizer");
      auto &m = cfg.minimizer;
      r.get("max_candidates", m.max_candidates);
      r.get("inner_max_iterations", m.inner_max_iterations);
      r.get("gradient_tolerance", m.gradient_tolerance);
      r.get("backtrack_factor", m.backtrack_factor);
      r.get("max_halvings", m.max_halvings);
      r.get("initial_step", m.initial_step);
      r.get("threads", m.threads);
      std::string strategy = to_string(m.strategy);
      r.get("strategy", strategy);
      m.strategy = candidate_strategy_from_string(strategy);
      r.finish();
    }
    if (top.has("noninterpenetration")) {
      detail::ObjectReader r(top.sub("noninterpenetration"), "noninterpenetration");
      r.get("enabled", cfg.minimizer.noninterpenetration);
      r.get("resolution", cfg.minimizer.voxel_resolution);
      r.get("samples", cfg.minimizer.noninterpenetration_samples);
      r.finish();
    }
    if (top.has("density_check")) {
      detail::ObjectReader r(top.sub("density_check"), "density_check");
      r.get("samples", cfg.density_samples);
      r.finish();
    }
    if (top.has("dirichlet_affine")) {
      detail::ObjectReader r(top.sub("dirichlet_affine"), "dirichlet_affine");
      AffineMap a;
      if (r.has("matrix"))
        a.matrix = detail::mat3_from_json(r.sub("matrix"), "dirichlet_affine.matrix");
      if (r.has("offset"))
        a.offset = detail::vec3_from_json(r.sub("offset"), "dirichlet_affine.offset");
      r.finish();
      cfg.dirichlet = a;
    }
    top.finish();

    auto resolve = [&](const std::string &p) { return p.empty() ? fs::path{} : base_dir / p; };
    cfg.mesh_path = resolve(mesh);
    cfg.surface_path = resolve(surface);
    cfg.output_dir = fs::path(out).is_absolute() ? fs::path(out) : base_dir / out;
    cfg.minimizer.seed = cfg.seed;
    cfg.minimizer.validate();
    return cfg;
  }

  static RunConfig load(const fs::path &path) {
    return from_json(detail::parse_json_file(path), path.parent_path().empty() ? fs::path(".") : path.parent_path());
  }

  /// Referenced input files must exist.
  void check_files() const {
    if (varifold_only) {
      if (surface_path.empty() || !fs::exists(surface_path))
        throw std::ios_base::failure("surface file '" + surface_path.string() + "' not found");
    } else if (mesh_path.empty() || !fs::exists(mesh_path)) {
      throw std::ios_base::failure("mesh file '" + mesh_path.string() + "' not found");
    }
  }

  /// Resolved configuration as written into reports. Paths are given by file name
  /// only and the thread count is left out, so reports do not depend on where or
  /// how the run was launched.
  json echo() const {
    json j;
    j["mesh"] = mesh_path.filename().string();
    if (!surface_path.empty())
      j["surface"] = surface_path.filename().string();
    j["varifold_only"] = varifold_only;
    j["seed"] = seed;
    j["density"] = {{"family", to_string(density.family)}, {"label", density.label()},
                    {"c", density.c}, {"p", density.p}, {"q", density.q}, {"r", density.r},
                    {"s", density.s}, {"kappa", density.kappa}};
    j["params"] = {{"c", params.c}, {"p", params.p}, {"q", params.q}, {"r", params.r}, {"s", params.s},
                   {"p_bar", params.p_bar}, {"a_bar", params.a_bar}, {"a1", params.a1}, {"a2", params.a2},
                   {"K", params.K}, {"C", params.C}};
    const auto &m = minimizer;
    j["minimizer"] = {{"max_candidates", m.max_candidates}, {"inner_max_iterations", m.inner_max_iterations},
                      {"gradient_tolerance", m.gradient_tolerance}, {"backtrack_factor", m.backtrack_factor},
                      {"max_halvings", m.max_halvings}, {"initial_step", m.initial_step},
                      {"strategy", to_string(m.strategy)}};
    j["noninterpenetration"] = {{"enabled", m.noninterpenetration}, {"resolution", m.voxel_resolution},
                                {"samples", m.noninterpenetration_samples}};
    j["density_check"] = {{"samples", density_samples}};
    if (dirichlet)
      j["dirichlet_affine"] = {{"matrix", to_json(dirichlet->matrix)}, {"offset", to_json(dirichlet->offset)}};
    return j;
  }
};

/// Load the mesh named by the config, applying the affine Dirichlet override.
inline std::shared_ptr<const BodyMesh> load_run_mesh(const RunConfig &cfg) {
  BodyMesh mesh = load_mesh(cfg.mesh_path.string());
  if (cfg.dirichlet) {
    std::map<int, Vec3> values;
    for (int v : mesh.gamma0_nodes())
      values[v] = cfg.dirichlet->matrix * mesh.nodes[v] + cfg.dirichlet->offset;
    mesh = mesh.with_dirichlet(std::move(values));
  }
  return std::make_shared<const BodyMesh>(std::move(mesh));
}

// ---------------------------------------------------------------------------
// Serialisation of results

inline json to_json(const CheckRecord &r) {
  json j{{"name", r.name}, {"pass", r.pass}, {"margin", number(r.margin)}, {"detail", r.detail}};
  if (r.sample)
    j["sample"] = *r.sample;
  if (!r.witness.empty()) {
    json w = json::array();
    for (double x : r.witness)
      w.push_back(number(x));
    j["witness"] = w;
  }
  return j;
}

inline json to_json(const AdmissibilityRecord &r) {
  json values = json::object();
  for (const auto &[k, v] : r.values)
    values[k] = number(v);
  return {{"item", r.item}, {"name", r.name}, {"pass", r.pass}, {"margin", number(r.margin)},
          {"location", r.location}, {"values", values}};
}

inline json to_json(const NoninterpenetrationRecord &r) {
  return {{"pass", r.pass},
          {"volume_pass", r.volume_pass},
          {"integral_det", number(r.integral_det)},
          {"image_volume", number(r.image_volume)},
          {"deficit", number(r.deficit)},
          {"tolerance", number(r.tolerance)},
          {"sampled_pass", r.sampled_pass},
          {"sampled_worst_margin", number(r.sampled_worst_margin)},
          {"sampled_worst", r.sampled_worst},
          {"resolution", r.resolution}};
}

inline json to_json(const CrackEnergyBreakdown &e) {
  return {{"mass", number(e.mass_term)}, {"curvature", number(e.curvature_term)},
          {"boundary", number(e.boundary_term)}, {"total", number(e.total)}};
}

inline json to_json(const CandidateRecord &c) {
  json j;
  j["id"] = c.id;
  j["faces"] = c.faces;
  j["theta"] = c.theta;
  j["energy"] = {{"bulk", number(c.bulk)}, {"crack", to_json(c.crack)}, {"total", number(c.total)}};
  j["inner"] = {{"iterations", c.inner.iterations}, {"converged", c.inner.converged},
                {"stalled", c.inner.stalled}, {"final_gradient_norm", number(c.inner.final_gradient_norm)}};
  j["admissible"] = c.admissible;
  j["rejection_reasons"] = c.rejection_reasons;
  json adm = json::array();
  for (const auto &r : c.admissibility.records)
    adm.push_back(to_json(r));
  j["admissibility"] = adm;
  j["noninterpenetration"] = c.noninterpenetration ? to_json(*c.noninterpenetration) : json(nullptr);
  return j;
}

inline json run_report(const RunConfig &cfg, const BodyMesh &mesh, const MinimizationReport &rep) {
  json j;
  j["schema"] = "fracvar-run-report/1";
  j["seed"] = cfg.seed;
  j["config"] = cfg.echo();
  j["mesh"] = {{"nodes", mesh.nodes.size()},
               {"tets", mesh.tets.size()},
               {"candidate_faces", mesh.candidate_faces.size()},
               {"volume", number(mesh.total_volume())},
               {"gamma0_area", number(mesh.gamma0_area())},
               {"gamma1_area", number(mesh.gamma1_area())}};
  json cands = json::array();
  for (const auto &c : rep.candidates)
    cands.push_back(to_json(c));
  j["candidates"] = cands;
  if (rep.selected) {
    const auto &s = rep.candidates[*rep.selected];
    j["selected"] = {{"id", s.id}, {"faces", s.faces}, {"total", number(s.total)}};
  } else {
    j["selected"] = nullptr;
  }
  return j;
}

namespace detail {

inline std::string csv_number(double v) { return number(v).is_string() ? number(v).get<std::string>() : fmt_double(v); }

inline std::string face_list(const std::vector<int> &faces) {
  std::string s;
  for (std::size_t k = 0; k < faces.size(); ++k)
    s += (k ? " " : "") + std::to_string(faces[k]);
  return s;
}

inline void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::ios_base::failure("cannot write '" + path.string() + "'");
  out << text;
  if (!out)
    throw std::ios_base::failure("write failed for '" + path.string() + "'");
}

} // namespace detail

inline std::string candidates_csv(const MinimizationReport &rep) {
  std::ostringstream o;
  o << "id,faces,n_faces,theta,bulk,crack_mass,crack_curvature,crack_boundary,crack_total,total,iterations,"
       "converged,admissible,selected\n";
  for (const auto &c : rep.candidates) {
    using detail::csv_number;
    o << c.id << ",\"" << detail::face_list(c.faces) << "\"," << c.faces.size() << "," << c.theta << ","
      << csv_number(c.bulk) << "," << csv_number(c.crack.mass_term) << "," << csv_number(c.crack.curvature_term)
      << "," << csv_number(c.crack.boundary_term) << "," << csv_number(c.crack.total) << ","
      << csv_number(c.total) << "," << c.inner.iterations << "," << c.inner.converged << "," << c.admissible
      << "," << (rep.selected && *rep.selected == c.id) << "\n";
  }
  return o.str();
}

inline std::string energy_trace_csv(const MinimizationReport &rep) {
  std::ostringstream o;
  o << "candidate,iteration,bulk_energy\n";
  for (const auto &c : rep.candidates)
    for (std::size_t k = 0; k < c.inner.energy_trace.size(); ++k)
      o << c.id << "," << k << "," << detail::csv_number(c.inner.energy_trace[k]) << "\n";
  return o.str();
}

/// Deformed mesh as a legacy ASCII VTK unstructured grid with per-element minor fields.
inline std::string deformed_vtk(const DeformationState &st) {
  std::ostringstream o;
  const auto &y = st.positions();
  const auto &f = st.fields();
  o << "# vtk DataFile Version 3.0\ndeformed body\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  o << "POINTS " << y.size() << " double\n";
  for (const auto &p : y)
    o << fmt_double(p[0]) << " " << fmt_double(p[1]) << " " << fmt_double(p[2]) << "\n";
  o << "CELLS " << st.tets.size() << " " << 5 * st.tets.size() << "\n";
  for (const auto &t : st.tets)
    o << "4 " << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
  o << "CELL_TYPES " << st.tets.size() << "\n";
  for (std::size_t e = 0; e < st.tets.size(); ++e)
    o << "10\n";
  o << "CELL_DATA " << st.tets.size() << "\n";
  auto field = [&](const char *name, auto &&value) {
    o << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (std::size_t e = 0; e < st.tets.size(); ++e)
      o << fmt_double(value(e)) << "\n";
  };
  field("det_grad", [&](std::size_t e) { return f.det[e]; });
  field("cof_norm", [&](std::size_t e) { return f.cof[e].norm(); });
  field("grad_det_norm", [&](std::size_t e) { return f.grad_det[e].norm(); });
  return o.str();
}

/// Crack surface in reference coordinates with the curvature norm per vertex.
inline std::string crack_vtk(const DiscreteVarifold &v) {
  std::ostringstream o;
  o << "# vtk DataFile Version 3.0\ncrack surface\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  o << "POINTS " << v.vertices.size() << " double\n";
  for (const auto &p : v.vertices)
    o << fmt_double(p[0]) << " " << fmt_double(p[1]) << " " << fmt_double(p[2]) << "\n";
  o << "CELLS " << v.size() << " " << 4 * v.size() << "\n";
  for (const auto &t : v.tris)
    o << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  o << "CELL_TYPES " << v.size() << "\n";
  for (std::size_t t = 0; t < v.size(); ++t)
    o << "5\n";
  if (v.empty())
    return o.str();
  o << "CELL_DATA " << v.size() << "\nSCALARS theta int 1\nLOOKUP_TABLE default\n";
  for (int th : v.theta)
    o << th << "\n";
  if (v.nonmanifold_edges.empty()) {
    const auto curv = curvature(v);
    o << "POINT_DATA " << v.vertices.size() << "\nSCALARS curvature_norm double 1\nLOOKUP_TABLE default\n";
    for (const auto &a : curv.A)
      o << fmt_double(norm(a)) << "\n";
  }
  return o.str();
}

// ---------------------------------------------------------------------------
// Commands. Each returns an exit code and writes human-readable lines to `out`.

inline int cmd_validate(const fs::path &mesh_path, std::ostream &out) {
  const BodyMesh m = load_mesh(mesh_path.string());
  double cand_area = 0.0;
  for (int f : m.candidate_faces)
    cand_area += m.face_area(m.interior_faces[f].nodes);
  out << "mesh " << mesh_path.filename().string() << ": ok\n"
      << "  nodes " << m.nodes.size() << ", tets " << m.tets.size() << ", interior faces "
      << m.interior_faces.size() << ", boundary faces " << m.boundary_faces.size() << "\n"
      << "  volume " << fmt_double(m.total_volume()) << "\n"
      << "  gamma0 area " << fmt_double(m.gamma0_area()) << " (" << m.gamma0_nodes().size()
      << " Dirichlet nodes), gamma1 area " << fmt_double(m.gamma1_area()) << "\n"
      << "  candidate crack faces " << m.candidate_faces.size() << ", area " << fmt_double(cand_area) << "\n";
  return kOk;
}

inline json density_report(const RunConfig &cfg) {
  json j;
  j["density"] = cfg.density.label();
  j["samples"] = cfg.density_samples;
  j["seed"] = cfg.seed;
  json recs = json::array();
  bool pass = true;
  auto add = [&](const CheckReport &r) {
    for (const auto &c : r.records) {
      recs.push_back(to_json(c));
      pass = pass && c.pass;
    }
  };
  add(verify_exponents(cfg.params));
  add(verify_coercivity(cfg.density, cfg.params, cfg.density_samples, cfg.seed));
  add(verify_delta_convexity(cfg.density, cfg.density_samples, cfg.seed));
  j["checks"] = recs;
  j["pass"] = pass;
  return j;
}

inline int cmd_check_density(const RunConfig &cfg, std::ostream &out) {
  const json rep = density_report(cfg);
  fs::create_directories(cfg.output_dir);
  detail::write_text(cfg.output_dir / "density_check.json", rep.dump(2) + "\n");
  for (const auto &c : rep["checks"]) {
    out << (c["pass"].get<bool>() ? "[ok]   " : "[fail] ") << c["name"].get<std::string>()
        << "  margin " << c["margin"].dump();
    if (c.contains("sample"))
      out << "  sample " << c["sample"].dump();
    out << "\n";
    if (c.contains("witness"))
      out << "       counterexample " << c["witness"].dump() << "\n";
  }
  return rep["pass"].get<bool>() ? kOk : kDensityCheckFailed;
}

inline json varifold_report(const DiscreteVarifold &v, const EnergyParams &params) {
  json j;
  j["triangles"] = v.size();
  j["vertices"] = v.vertices.size();
  j["mass"] = number(mass(v));
  j["boundary_mass"] = number(boundary_mass(v));
  j["nonmanifold_edges"] = v.nonmanifold_edges.size();
  if (!v.nonmanifold_edges.empty()) {
    j["manifold"] = false;
    return j;
  }
  j["manifold"] = true;
  const auto curv = curvature(v);
  Vec3 lo = v.vertices.front(), hi = v.vertices.front();
  for (const auto &x : v.vertices) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  const auto tests = builtin_test_functions(0.5 * (lo + hi), (hi - lo).norm() + 1.0);
  j["curvature_integral"] = number(curvature_energy(v, curv, 1.0, params.p_bar));
  j["first_variation_residual"] = number(first_variation_residual(v, curv, tests));
  j["energy"] = to_json(crack_energy(v, params));
  return j;
}

inline int cmd_varifold(const fs::path &surface_path, const EnergyParams &params, std::ostream &out) {
  const DiscreteVarifold v = load_surface(surface_path.string());
  const json rep = varifold_report(v, params);
  out << rep.dump(2) << "\n";
  return rep["manifold"].get<bool>() ? kOk : kInvalidInput;
}

struct MinimizeOutcome {
  int exit_code = kOk;
  MinimizationReport report;
};

/// Full pipeline: minimise, then write report.json, candidates.csv,
/// energy_trace.csv, deformed.vtk, crack.vtk and timing.json into the output directory.
inline MinimizeOutcome cmd_minimize(const RunConfig &cfg, std::ostream &out) {
  cfg.check_files();
  cfg.params.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto mesh = load_run_mesh(cfg);
  MinimizeOutcome res;
  res.report = minimize_total(mesh, cfg.density, cfg.params, cfg.minimizer);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto &rep = res.report;

  fs::create_directories(cfg.output_dir);
  detail::write_text(cfg.output_dir / "report.json", run_report(cfg, *mesh, rep).dump(2) + "\n");
  detail::write_text(cfg.output_dir / "candidates.csv", candidates_csv(rep));
  detail::write_text(cfg.output_dir / "energy_trace.csv", energy_trace_csv(rep));
  json timing{{"wall_clock_seconds", seconds}, {"threads", cfg.minimizer.threads}};
  detail::write_text(cfg.output_dir / "timing.json", timing.dump(2) + "\n");

  for (const auto &c : rep.candidates) {
    out << "candidate " << c.id << " faces [" << detail::face_list(c.faces) << "] total "
        << detail::csv_number(c.total) << (c.admissible ? "" : "  rejected") << "\n";
    for (const auto &why : c.rejection_reasons)
      out << "    " << why << "\n";
  }
  if (!rep.selected) {
    out << "no admissible candidate\n";
    res.exit_code = kNoFeasibleCandidate;
    return res;
  }
  const auto &s = rep.candidates[*rep.selected];
  detail::write_text(cfg.output_dir / "deformed.vtk", deformed_vtk(*s.state));
  detail::write_text(cfg.output_dir / "crack.vtk", crack_vtk(*s.varifold));
  out << "selected candidate " << s.id << " (" << s.faces.size() << " crack faces), total "
      << detail::csv_number(s.total) << "\n";
  return res;
}

/// Run `body`, mapping exceptions to exit codes and printing the message to `err`.
inline int guarded(const std::function<int()> &body, std::ostream &err) {
  try {
    return body();
  } catch (const NoFeasibleCandidate &e) {
    err << "error: " << e.what() << "\n";
    return kNoFeasibleCandidate;
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const nlohmann::json::exception &e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::ios_base::failure &e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const fs::filesystem_error &e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
}

} // namespace fracvar::cli
