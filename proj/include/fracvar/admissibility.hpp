#pragma once

#include "fracvar/deformation.hpp"
#include "fracvar/density.hpp"
#include "fracvar/varifold.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fracvar {

/// One condition of the admissible class.
struct AdmissibilityRecord {
  std::string item;  ///< "1".."8"
  std::string name;
  bool pass = true;
  double margin = 0.0; ///< >= 0 when satisfied; +inf when the condition is vacuous
  std::string location; ///< worst offender, e.g. "face 12", "element 3", "node 7"
  std::map<std::string, double> values; ///< reported norms and measures
};

struct AdmissibilityReport {
  std::vector<AdmissibilityRecord> records;

  bool pass() const {
    for (const auto &r : records)
      if (!r.pass)
        return false;
    return true;
  }

  const AdmissibilityRecord *find(const std::string &item) const {
    for (const auto &r : records)
      if (r.item == item)
        return &r;
    return nullptr;
  }
};

inline constexpr double kProjectionTolerance = 1e-12;

namespace detail {

/// Multiplicity carried by each mesh interior face, and the V triangles that do
/// not lie on the candidate surface.
struct FaceCoverage {
  std::vector<int> theta; ///< per interior face
  std::vector<int> off_surface;
};

inline FaceCoverage coverage(const BodyMesh &mesh, const DiscreteVarifold &v) {
  FaceCoverage cov;
  cov.theta.assign(mesh.interior_faces.size(), 0);
  const double tol = 1e-9 * mesh.bounding_box_diagonal();
  std::vector<int> vmap(v.vertices.size(), -1);
  for (std::size_t a = 0; a < v.vertices.size(); ++a)
    for (std::size_t n = 0; n < mesh.nodes.size(); ++n)
      if ((mesh.nodes[n] - v.vertices[a]).cwiseAbs().maxCoeff() <= tol) {
        vmap[a] = static_cast<int>(n);
        break;
      }
  for (std::size_t t = 0; t < v.size(); ++t) {
    std::optional<int> face;
    if (v.source_face[t] >= 0 && v.source_face[t] < static_cast<int>(mesh.interior_faces.size())) {
      face = v.source_face[t];
    } else {
      const auto &tr = v.tris[t];
      if (vmap[tr[0]] >= 0 && vmap[tr[1]] >= 0 && vmap[tr[2]] >= 0)
        face = mesh.find_interior_face({vmap[tr[0]], vmap[tr[1]], vmap[tr[2]]});
    }
    if (face && std::binary_search(mesh.candidate_faces.begin(), mesh.candidate_faces.end(), *face))
      cov.theta[*face] += v.theta[t];
    else
      cov.off_surface.push_back(static_cast<int>(t));
  }
  return cov;
}

inline double lp_norm(const std::vector<double> &pointwise, const std::vector<double> &vol, double p) {
  double s = 0.0;
  for (std::size_t e = 0; e < vol.size(); ++e)
    s += vol[e] * std::pow(pointwise[e], p);
  return std::pow(s, 1.0 / p);
}

} // namespace detail

/// Tolerance for minor-field jumps: relative to the largest minor magnitude.
inline double minor_jump_tolerance(const DeformationState &st) {
  double scale = 1.0;
  for (std::size_t e = 0; e < st.tets.size(); ++e)
    scale = std::max({scale, st.fields().cof[e].norm(), std::abs(st.fields().det[e])});
  return 1e-8 * scale;
}

/// Discrete membership test for the admissible class, items (1)-(8).
/// Over a jumping face both graph sheets project onto the face, so the
/// projected boundary measure is 2·area(F); item (3) then reads θ(F) >= 2/C.
inline AdmissibilityReport check_class(const DeformationState &st, const DiscreteVarifold &v,
                                       const EnergyParams &params, std::optional<double> jump_tol = {}) {
  const BodyMesh &mesh = *st.mesh;
  const auto &f = st.fields();
  const auto &y = st.positions();
  const double inf = std::numeric_limits<double>::infinity();
  const auto cov = detail::coverage(mesh, v);
  AdmissibilityReport rep;

  // (1) curvature varifold with boundary, |A| in L^p̄
  {
    AdmissibilityRecord r{"1", "curvature varifold", true, kProjectionTolerance, "", {}};
    double worst = 0.0;
    for (std::size_t t = 0; t < v.size(); ++t) {
      const Mat3 &pi = v.projection[t];
      const double defect = std::max({(pi - pi.transpose()).cwiseAbs().maxCoeff(),
                                      (pi * pi - pi).cwiseAbs().maxCoeff(), std::abs(pi.trace() - 2.0)});
      if (defect > worst) {
        worst = defect;
        r.location = "triangle " + std::to_string(t);
      }
    }
    r.margin = kProjectionTolerance - worst;
    r.pass = worst <= kProjectionTolerance;
    if (!cov.off_surface.empty()) {
      r.pass = false;
      r.location = "triangle " + std::to_string(cov.off_surface.front()) + " not on candidate surface";
    }
    if (!v.nonmanifold_edges.empty()) {
      r.pass = false;
      r.location = "non-manifold edge";
    } else if (!v.empty()) {
      const double ce = curvature_energy(v, 1.0, params.p_bar);
      r.values["curvature_integral"] = ce;
      if (!std::isfinite(ce))
        r.pass = false;
    }
    r.values["mass"] = mass(v);
    r.values["boundary_mass"] = boundary_mass(v);
    rep.records.push_back(r);
  }

  // (2) ‖y‖∞ <= K and y = y0 on Γ0
  {
    AdmissibilityRecord r{"2", "sup bound and Dirichlet data", true, 0.0, "", {}};
    double max_norm = 0.0;
    int worst_node = -1;
    for (std::size_t n = 0; n < y.size(); ++n)
      if (y[n].norm() > max_norm) {
        max_norm = y[n].norm();
        worst_node = static_cast<int>(n);
      }
    r.margin = params.K - max_norm;
    r.pass = max_norm <= params.K;
    if (!r.pass)
      r.location = "node " + std::to_string(worst_node);
    double dir_err = 0.0;
    for (std::size_t n = 0; n < y.size(); ++n)
      if (st.fixed[n] && y[n] != st.prescribed[n]) {
        dir_err = std::max(dir_err, (y[n] - st.prescribed[n]).norm());
        r.pass = false;
        r.location = "Dirichlet node " + std::to_string(n);
      }
    r.values["max_norm"] = max_norm;
    r.values["dirichlet_error"] = dir_err;
    rep.records.push_back(r);
  }

  // (3) π#|∂G_y| <= C μ_V
  {
    AdmissibilityRecord r{"3", "jump containment", true, inf, "", {}};
    const double tol = jump_tol.value_or(default_jump_tolerance(mesh));
    double jump_area = 0.0;
    for (const auto &j : deformation_jump_set(st, tol)) {
      jump_area += j.area;
      const double m = params.C * cov.theta[j.face] - 2.0;
      if (m < r.margin) {
        r.margin = m;
        r.location = "face " + std::to_string(j.face);
      }
    }
    r.pass = r.margin >= 0.0;
    if (r.pass && std::isfinite(r.margin))
      r.location.clear();
    r.values["jump_area"] = jump_area;
    rep.records.push_back(r);
  }

  std::vector<double> g_norm(st.tets.size()), c_norm(st.tets.size()), d_abs(st.tets.size());
  for (std::size_t e = 0; e < st.tets.size(); ++e) {
    g_norm[e] = f.grad[e].norm();
    c_norm[e] = f.cof[e].norm();
    d_abs[e] = std::abs(f.det[e]);
  }

  // (4) integrability of ∇y, cof ∇y, det ∇y
  {
    AdmissibilityRecord r{"4", "integrability of minors", true, inf, "", {}};
    r.values["grad_Lp"] = detail::lp_norm(g_norm, mesh.volumes, params.p);
    r.values["cof_Lq"] = detail::lp_norm(c_norm, mesh.volumes, params.q);
    r.values["det_Lr"] = detail::lp_norm(d_abs, mesh.volumes, params.r);
    for (const auto &[k, val] : r.values)
      if (!std::isfinite(val))
        r.pass = false;
    rep.records.push_back(r);
  }

  // (5) det ∇y > 0 and (det ∇y)^-1 in L^s
  {
    AdmissibilityRecord r{"5", "orientation", true, inf, "", {}};
    double inv_int = 0.0;
    for (std::size_t e = 0; e < st.tets.size(); ++e) {
      if (f.det[e] < r.margin) {
        r.margin = f.det[e];
        r.location = "element " + std::to_string(e);
      }
      if (f.det[e] > 0.0)
        inv_int += mesh.volumes[e] * std::pow(f.det[e], -params.s);
    }
    r.pass = r.margin > 0.0;
    if (r.pass)
      r.location.clear();
    r.values["inverse_det_Ls_integral"] = r.pass ? inv_int : inf;
    r.values["min_det"] = r.margin;
    rep.records.push_back(r);
  }

  // (6), (7) GSBV structure: finite reconstructed gradients, jumps only on active faces
  bool shared_off_crack = true;
  std::string split_face;
  for (std::size_t fid = 0; fid < mesh.interior_faces.size() && shared_off_crack; ++fid) {
    if (st.face_active[fid])
      continue;
    const auto &face = mesh.interior_faces[fid];
    for (int v : face.nodes)
      if (st.node_in_tet(face.tet[0], v) != st.node_in_tet(face.tet[1], v)) {
        shared_off_crack = false;
        split_face = "face " + std::to_string(fid);
      }
  }
  {
    AdmissibilityRecord r{"6", "cofactor GSBV", shared_off_crack, inf, split_face, {}};
    std::vector<double> gc(st.tets.size());
    for (std::size_t e = 0; e < st.tets.size(); ++e)
      gc[e] = norm(f.grad_cof[e]);
    r.values["grad_cof_Lq"] = detail::lp_norm(gc, mesh.volumes, params.q);
    if (!std::isfinite(r.values["grad_cof_Lq"]))
      r.pass = false;
    rep.records.push_back(r);
  }
  {
    AdmissibilityRecord r{"7", "determinant GSBV", shared_off_crack, inf, split_face, {}};
    std::vector<double> gd(st.tets.size());
    for (std::size_t e = 0; e < st.tets.size(); ++e)
      gd[e] = f.grad_det[e].norm();
    r.values["grad_det_Lr"] = detail::lp_norm(gd, mesh.volumes, params.r);
    if (!std::isfinite(r.values["grad_det_Lr"]))
      r.pass = false;
    rep.records.push_back(r);
  }

  // (8) H² ⌞ S(cof ∇y) <= μ_V and H² ⌞ S(det ∇y) <= μ_V
  {
    AdmissibilityRecord r{"8", "minor jump containment", true, inf, "", {}};
    const double tol = minor_jump_tolerance(st);
    double jump_area = 0.0;
    for (const auto &j : minor_field_jumps(st)) {
      if (j.cof_jump <= tol && j.det_jump <= tol)
        continue;
      jump_area += j.area;
      const double m = cov.theta[j.face] - 1.0;
      if (m < r.margin) {
        r.margin = m;
        r.location = "face " + std::to_string(j.face);
      }
    }
    r.pass = r.margin >= 0.0;
    if (r.pass)
      r.location.clear();
    r.values["minor_jump_area"] = jump_area;
    rep.records.push_back(r);
  }
  return rep;
}

} // namespace fracvar
