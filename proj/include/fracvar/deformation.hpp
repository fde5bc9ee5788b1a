#pragma once

#include "fracvar/density.hpp"
#include "fracvar/errors.hpp"
#include "fracvar/mesh.hpp"
#include "fracvar/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <vector>

namespace fracvar {

/// Summation in a fixed binary-tree order, so reductions are reproducible.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v)
      s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Least-squares gradient stencil entry: grad f_e = sum coeff * (f_n - f_e).
struct StencilEntry {
  int neighbor;
  Vec3 coeff;
};
using Stencil = std::vector<StencilEntry>;

/// Weighted least-squares stencils over face neighbours (weights 1/centroid distance),
/// skipping neighbours across active crack faces. Elements with fewer than three
/// usable neighbours, or a rank-deficient neighbourhood, get an empty stencil.
inline std::vector<Stencil> build_stencils(const BodyMesh &mesh, const std::vector<char> &face_active) {
  std::vector<Stencil> out(mesh.tets.size());
  for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
    std::vector<std::pair<int, Vec3>> nbrs;
    for (int lf = 0; lf < 4; ++lf) {
      const int f = mesh.tet_faces[e][lf];
      if (f < 0 || face_active[f])
        continue;
      const auto &face = mesh.interior_faces[f];
      const int n = face.tet[0] == static_cast<int>(e) ? face.tet[1] : face.tet[0];
      nbrs.emplace_back(n, mesh.centroids[n] - mesh.centroids[e]);
    }
    if (nbrs.size() < 3)
      continue;
    Mat3 m = Mat3::Zero();
    for (const auto &[n, d] : nbrs)
      m += (1.0 / d.norm()) * d * d.transpose();
    Eigen::SelfAdjointEigenSolver<Mat3> eig(m);
    const Vec3 ev = eig.eigenvalues();
    if (!(ev[0] > 1e-12 * ev[2]))
      continue;
    const Mat3 minv = m.inverse();
    for (const auto &[n, d] : nbrs)
      out[e].push_back({n, (1.0 / d.norm()) * (minv * d)});
  }
  return out;
}

template <class T>
std::vector<T> apply_stencils(const std::vector<Stencil> &stencils, const std::vector<double> &field) {
  std::vector<T> out(stencils.size(), T::Zero());
  for (std::size_t e = 0; e < stencils.size(); ++e)
    for (const auto &s : stencils[e])
      out[e] += s.coeff * (field[s.neighbor] - field[e]);
  return out;
}

/// Gradient reconstruction of an arbitrary element-wise scalar field.
inline std::vector<Vec3> reconstruct_scalar_gradient(const std::vector<Stencil> &stencils,
                                                     const std::vector<double> &field) {
  return apply_stencils<Vec3>(stencils, field);
}

/// Gradient reconstruction of an element-wise matrix field; out[e][k] = d/dx_k.
inline std::vector<Tensor3> reconstruct_matrix_gradient(const std::vector<Stencil> &stencils,
                                                        const std::vector<Mat3> &field) {
  std::vector<Tensor3> out(stencils.size(), zero_tensor3());
  for (std::size_t e = 0; e < stencils.size(); ++e)
    for (const auto &s : stencils[e]) {
      const Mat3 diff = field[s.neighbor] - field[e];
      for (int k = 0; k < 3; ++k)
        out[e][k] += s.coeff[k] * diff;
    }
  return out;
}

/// Per-element cached fields of a deformation.
struct ElementFields {
  std::vector<Mat3> grad;
  std::vector<Mat3> cof;
  std::vector<double> det;
  std::vector<Tensor3> grad_cof;
  std::vector<Vec3> grad_det;
};

/// Piecewise-affine deformation on a (possibly cut) copy of the body mesh.
///
/// Nodes along active crack faces are duplicated so that elements on opposite
/// sides carry independent values. `parent[v]` maps every node back to the mesh.
class DeformationState {
public:
  std::shared_ptr<const BodyMesh> mesh;
  std::vector<int> active_faces;   ///< sorted interior-face ids
  std::vector<char> face_active;   ///< per interior face
  std::vector<int> parent;         ///< state node -> mesh node
  std::vector<Tet> tets;           ///< connectivity in state node ids
  std::vector<char> fixed;         ///< Dirichlet node flag
  std::vector<Vec3> prescribed;    ///< y0 on fixed nodes, zero elsewhere
  std::vector<Stencil> stencils;

  std::size_t node_count() const { return parent.size(); }
  std::size_t duplicated_count() const { return parent.size() - mesh->nodes.size(); }
  const std::vector<Vec3> &positions() const { return y_; }
  const ElementFields &fields() const { return fields_; }

  Vec3 reference(int v) const { return mesh->nodes[parent[v]]; }

  /// Replace all nodal values and refresh the element caches.
  void set_positions(std::vector<Vec3> y) {
    if (y.size() != parent.size())
      throw ValueError("position vector has wrong size");
    y_ = std::move(y);
    refresh();
  }

  /// Set every node to y0 on Γ0 and to `f(reference)` elsewhere.
  template <class F> void set_map(F &&f) {
    std::vector<Vec3> y(parent.size());
    for (std::size_t v = 0; v < y.size(); ++v)
      y[v] = fixed[v] ? prescribed[v] : Vec3(f(reference(static_cast<int>(v))));
    set_positions(std::move(y));
  }

  /// State node id of mesh node `mesh_node` as seen from element `tet`.
  int node_in_tet(int tet, int mesh_node) const {
    const auto &mt = mesh->tets[tet];
    for (int k = 0; k < 4; ++k)
      if (mt[k] == mesh_node)
        return tets[tet][k];
    return -1;
  }

  void refresh() {
    const std::size_t ne = tets.size();
    fields_.grad.resize(ne);
    fields_.cof.resize(ne);
    fields_.det.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
      const auto &t = tets[e];
      Mat3 ds;
      for (int k = 0; k < 3; ++k)
        ds.col(k) = y_[t[k + 1]] - y_[t[0]];
      fields_.grad[e] = ds * mesh->inv_edge_matrices[e];
      fields_.cof[e] = cof3(fields_.grad[e]);
      fields_.det[e] = det3(fields_.grad[e]);
    }
    fields_.grad_cof = reconstruct_matrix_gradient(stencils, fields_.cof);
    fields_.grad_det = reconstruct_scalar_gradient(stencils, fields_.det);
  }

private:
  std::vector<Vec3> y_;
  ElementFields fields_;
};

/// Duplicate nodes along the active faces and initialise y to the identity
/// (Dirichlet nodes take y0).
///
/// Around each node on an active face, incident tets are grouped into classes
/// connected through non-active faces containing that node; each class gets its
/// own copy. A crack-tip node whose fan stays connected is therefore not split.
inline DeformationState cut_mesh(std::shared_ptr<const BodyMesh> mesh, std::vector<int> active) {
  std::sort(active.begin(), active.end());
  active.erase(std::unique(active.begin(), active.end()), active.end());
  for (int f : active)
    if (!std::binary_search(mesh->candidate_faces.begin(), mesh->candidate_faces.end(), f))
      throw TopologyError("face " + std::to_string(f) + " is not a candidate crack face");

  DeformationState st;
  st.mesh = mesh;
  st.active_faces = active;
  st.face_active.assign(mesh->interior_faces.size(), 0);
  for (int f : active)
    st.face_active[f] = 1;
  st.tets = mesh->tets;
  st.parent.resize(mesh->nodes.size());
  std::iota(st.parent.begin(), st.parent.end(), 0);

  std::vector<char> touched(mesh->nodes.size(), 0);
  for (int f : active)
    for (int v : mesh->interior_faces[f].nodes)
      touched[v] = 1;

  std::vector<std::vector<int>> node_tets(mesh->nodes.size());
  for (std::size_t e = 0; e < mesh->tets.size(); ++e)
    for (int v : mesh->tets[e])
      if (touched[v])
        node_tets[v].push_back(static_cast<int>(e));

  for (std::size_t v = 0; v < mesh->nodes.size(); ++v) {
    if (!touched[v])
      continue;
    const auto &inc = node_tets[v];
    std::vector<int> label(inc.size(), -1);
    int n_classes = 0;
    for (std::size_t s = 0; s < inc.size(); ++s) {
      if (label[s] >= 0)
        continue;
      std::vector<std::size_t> stack{s};
      label[s] = n_classes;
      while (!stack.empty()) {
        const std::size_t cur = stack.back();
        stack.pop_back();
        const int e = inc[cur];
        for (int lf = 0; lf < 4; ++lf) {
          const int f = mesh->tet_faces[e][lf];
          if (f < 0 || st.face_active[f])
            continue;
          const auto &face = mesh->interior_faces[f];
          if (std::find(face.nodes.begin(), face.nodes.end(), static_cast<int>(v)) == face.nodes.end())
            continue;
          const int other = face.tet[0] == e ? face.tet[1] : face.tet[0];
          const auto it = std::find(inc.begin(), inc.end(), other);
          const std::size_t idx = static_cast<std::size_t>(it - inc.begin());
          if (label[idx] < 0) {
            label[idx] = n_classes;
            stack.push_back(idx);
          }
        }
      }
      ++n_classes;
    }
    for (int cls = 1; cls < n_classes; ++cls) {
      const int copy = static_cast<int>(st.parent.size());
      st.parent.push_back(static_cast<int>(v));
      for (std::size_t s = 0; s < inc.size(); ++s)
        if (label[s] == cls)
          for (int &w : st.tets[inc[s]])
            if (w == static_cast<int>(v))
              w = copy;
    }
  }

  st.fixed.assign(st.parent.size(), 0);
  st.prescribed.assign(st.parent.size(), Vec3::Zero());
  for (std::size_t v = 0; v < st.parent.size(); ++v) {
    const auto it = mesh->dirichlet.find(st.parent[v]);
    if (it != mesh->dirichlet.end()) {
      st.fixed[v] = 1;
      st.prescribed[v] = it->second;
    }
  }
  st.stencils = build_stencils(*mesh, st.face_active);
  st.set_map([](const Vec3 &x) { return x; });
  return st;
}

inline DeformationState cut_mesh(const BodyMesh &mesh, std::vector<int> active) {
  return cut_mesh(std::make_shared<const BodyMesh>(mesh), std::move(active));
}

/// Carry nodal values from a state on another cut of the same mesh: each node
/// takes the value of the node seen by the same element.
inline std::vector<Vec3> transfer_positions(const DeformationState &from, const DeformationState &to) {
  std::vector<Vec3> y(to.node_count(), Vec3::Zero());
  for (std::size_t e = 0; e < to.tets.size(); ++e)
    for (int k = 0; k < 4; ++k)
      y[to.tets[e][k]] = from.positions()[from.tets[e][k]];
  for (std::size_t v = 0; v < y.size(); ++v)
    if (to.fixed[v])
      y[v] = to.prescribed[v];
  return y;
}

inline const std::vector<Mat3> &element_gradients(const DeformationState &st) { return st.fields().grad; }

struct MinorFields {
  std::vector<Mat3> cof;
  std::vector<double> det;
};

inline MinorFields minor_fields(const DeformationState &st) { return {st.fields().cof, st.fields().det}; }

struct MinorGradients {
  std::vector<Tensor3> grad_cof;
  std::vector<Vec3> grad_det;
};

inline MinorGradients reconstruct_minor_gradients(const DeformationState &st) {
  return {st.fields().grad_cof, st.fields().grad_det};
}

/// Volume-weighted density per element (one-point quadrature); +inf where det <= 0.
inline std::vector<double> element_energies(const DeformationState &st, const DensitySpec &spec) {
  const auto &f = st.fields();
  std::vector<double> out(st.tets.size());
  for (std::size_t e = 0; e < out.size(); ++e)
    out[e] = st.mesh->volumes[e] * eval_density(spec, f.grad[e], f.grad_cof[e], f.grad_det[e]);
  return out;
}

/// Discrete J(∇y; B).
inline double bulk_energy(const DeformationState &st, const DensitySpec &spec) {
  const auto parts = element_energies(st, spec);
  for (double v : parts)
    if (!std::isfinite(v))
      return std::numeric_limits<double>::infinity();
  return pairwise_sum(parts);
}

/// Exact gradient of the discrete bulk energy w.r.t. nodal values, including the
/// dependence through the reconstructed minor gradients. Zero on Dirichlet nodes.
inline std::vector<Vec3> bulk_gradient(const DeformationState &st, const DensitySpec &spec) {
  const auto &f = st.fields();
  const auto &mesh = *st.mesh;
  const std::size_t ne = st.tets.size();

  std::vector<Mat3> dG(ne);
  std::vector<Mat3> adj_cof(ne, Mat3::Zero());
  std::vector<double> adj_det(ne, 0.0);
  for (std::size_t e = 0; e < ne; ++e) {
    if (!(f.det[e] > 0.0))
      throw DomainError("bulk gradient requested with det <= 0 on element " + std::to_string(e));
    const double vol = mesh.volumes[e];
    const DensityGradient g = grad_density(spec, f.grad[e], f.grad_cof[e], f.grad_det[e]);
    dG[e] = vol * g.dG;
    for (const auto &s : st.stencils[e]) {
      const double wd = vol * g.dD2.dot(s.coeff);
      adj_det[s.neighbor] += wd;
      adj_det[e] -= wd;
      Mat3 wc = Mat3::Zero();
      for (int k = 0; k < 3; ++k)
        wc += s.coeff[k] * g.dD1[k];
      wc *= vol;
      adj_cof[s.neighbor] += wc;
      adj_cof[e] -= wc;
    }
  }

  std::vector<Vec3> out(st.node_count(), Vec3::Zero());
  for (std::size_t e = 0; e < ne; ++e) {
    const Mat3 total = dG[e] + adj_det[e] * f.cof[e] + cof_adjoint(f.grad[e], adj_cof[e]);
    // G = Ds Dm^-1  =>  dE/dDs = dE/dG Dm^-T
    const Mat3 dds = total * mesh.inv_edge_matrices[e].transpose();
    const auto &t = st.tets[e];
    for (int k = 0; k < 3; ++k) {
      out[t[k + 1]] += dds.col(k);
      out[t[0]] -= dds.col(k);
    }
  }
  for (std::size_t v = 0; v < out.size(); ++v)
    if (st.fixed[v])
      out[v].setZero();
  return out;
}

/// Default jump tolerance: 1e-8 times the bounding-box diagonal.
inline double default_jump_tolerance(const BodyMesh &mesh) { return 1e-8 * mesh.bounding_box_diagonal(); }

struct JumpFace {
  int face;          ///< interior-face id
  double area;
  double mean_jump;  ///< mean over face vertices of |y+ - y-|
  double max_jump;   ///< max-norm trace difference
};

/// Active faces whose one-sided nodal traces differ by more than `tol` (max norm).
inline std::vector<JumpFace> deformation_jump_set(const DeformationState &st, double tol) {
  std::vector<JumpFace> out;
  const auto &y = st.positions();
  for (int fid : st.active_faces) {
    const auto &face = st.mesh->interior_faces[fid];
    double mean = 0.0, mx = 0.0;
    for (int v : face.nodes) {
      const Vec3 d = y[st.node_in_tet(face.tet[0], v)] - y[st.node_in_tet(face.tet[1], v)];
      mean += d.norm() / 3.0;
      mx = std::max(mx, d.cwiseAbs().maxCoeff());
    }
    if (mx > tol)
      out.push_back({fid, st.mesh->face_area(face.nodes), mean, mx});
  }
  return out;
}

struct MinorJump {
  int face;
  double area;
  double cof_jump; ///< Frobenius norm of the cofactor difference
  double det_jump; ///< absolute determinant difference
};

/// Minor-field jumps across active faces for given element fields.
inline std::vector<MinorJump> minor_field_jumps(const DeformationState &st, const std::vector<Mat3> &cof,
                                                const std::vector<double> &det) {
  std::vector<MinorJump> out;
  for (int fid : st.active_faces) {
    const auto &face = st.mesh->interior_faces[fid];
    const int a = face.tet[0], b = face.tet[1];
    out.push_back({fid, st.mesh->face_area(face.nodes), (cof[a] - cof[b]).norm(), std::abs(det[a] - det[b])});
  }
  return out;
}

inline std::vector<MinorJump> minor_field_jumps(const DeformationState &st) {
  return minor_field_jumps(st, st.fields().cof, st.fields().det);
}

} // namespace fracvar
