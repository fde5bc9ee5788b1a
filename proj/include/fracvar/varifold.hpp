#pragma once

#include "fracvar/density.hpp"
#include "fracvar/errors.hpp"
#include "fracvar/mesh.hpp"
#include "fracvar/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fracvar {

/// Edge of a varifold with exactly one incident triangle.
struct BoundaryEdge {
  int a, b;
  int tri;
  double length;
  Vec3 weight; ///< θ · length · inward conormal
};

/// Integer-rectifiable 2-varifold carried by a triangle list with per-triangle
/// integer multiplicity. Geometry caches are built once at construction.
class DiscreteVarifold {
public:
  std::vector<Vec3> vertices;
  std::vector<Tri> tris;
  std::vector<int> theta;
  std::vector<int> source_face; ///< originating mesh face per triangle, or -1

  std::vector<double> area;
  std::vector<Vec3> normal;
  std::vector<Mat3> projection; ///< Π = I - n nᵀ
  std::vector<Vec3> centroid;
  std::map<std::pair<int, int>, std::vector<int>> edges;
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<std::pair<int, int>> nonmanifold_edges;
  std::vector<double> vertex_area;   ///< one third of incident triangle areas
  std::vector<double> vertex_weight; ///< same, θ-weighted

  std::size_t size() const { return tris.size(); }
  bool empty() const { return tris.empty(); }

  static DiscreteVarifold from_triangles(std::vector<Vec3> vertices, std::vector<Tri> tris,
                                         std::vector<int> theta, std::vector<int> source = {}) {
    if (theta.size() != tris.size())
      throw ValueError("one multiplicity per triangle required");
    if (source.empty())
      source.assign(tris.size(), -1);
    DiscreteVarifold v;
    v.vertices = std::move(vertices);
    v.tris = std::move(tris);
    v.theta = std::move(theta);
    v.source_face = std::move(source);
    v.build();
    return v;
  }

  /// Outward in-plane unit conormal of triangle t at its edge (a, b).
  Vec3 outward_conormal(int t, int a, int b) const {
    const auto &tri = tris[t];
    int c = tri[0];
    for (int w : tri)
      if (w != a && w != b)
        c = w;
    const Vec3 e = vertices[b] - vertices[a];
    Vec3 m = e.cross(normal[t]).normalized();
    if (m.dot(vertices[c] - vertices[a]) > 0.0)
      m = -m;
    return m;
  }

private:
  void build() {
    const int nv = static_cast<int>(vertices.size());
    vertex_area.assign(vertices.size(), 0.0);
    vertex_weight.assign(vertices.size(), 0.0);
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (theta[t] < 1)
        throw ValueError("triangle " + std::to_string(t) + " has multiplicity " + std::to_string(theta[t]) +
                         " < 1");
      for (int w : tris[t])
        if (w < 0 || w >= nv)
          throw ValueError("triangle " + std::to_string(t) + " references missing vertex");
      const Vec3 &p0 = vertices[tris[t][0]], &p1 = vertices[tris[t][1]], &p2 = vertices[tris[t][2]];
      const Vec3 cr = (p1 - p0).cross(p2 - p0);
      const double a = 0.5 * cr.norm();
      const double scale = std::max({(p1 - p0).squaredNorm(), (p2 - p0).squaredNorm(), (p2 - p1).squaredNorm()});
      if (!(a > 1e-14 * scale) || !(a > 0.0))
        throw GeometryError("triangle " + std::to_string(t) + " has zero area");
      area.push_back(a);
      const Vec3 n = cr / cr.norm();
      normal.push_back(n);
      projection.push_back(Mat3::Identity() - n * n.transpose());
      centroid.push_back((p0 + p1 + p2) / 3.0);
      for (int w : tris[t]) {
        vertex_area[w] += a / 3.0;
        vertex_weight[w] += theta[t] * a / 3.0;
      }
      for (int k = 0; k < 3; ++k) {
        int a0 = tris[t][k], b0 = tris[t][(k + 1) % 3];
        if (a0 > b0)
          std::swap(a0, b0);
        edges[{a0, b0}].push_back(static_cast<int>(t));
      }
    }
    for (const auto &[e, inc] : edges) {
      if (inc.size() == 1) {
        const int t = inc[0];
        const double len = (vertices[e.second] - vertices[e.first]).norm();
        boundary_edges.push_back(
            {e.first, e.second, t, len, -(theta[t] * len) * outward_conormal(t, e.first, e.second)});
      } else if (inc.size() > 2) {
        nonmanifold_edges.push_back(e);
      }
    }
  }
};

/// μ_V(B) = Σ θ_T area_T.
inline double mass(const DiscreteVarifold &v) {
  double m = 0.0;
  for (std::size_t t = 0; t < v.size(); ++t)
    m += v.theta[t] * v.area[t];
  return m;
}

struct HalfSpace {
  Vec3 normal;
  double offset; ///< region is { x : normal · x <= offset }
};

namespace detail {

/// Area of the part of triangle (p0, p1, p2) inside a half-space (Sutherland–Hodgman).
inline double clipped_area(const std::array<Vec3, 3> &tri, const HalfSpace &h) {
  std::vector<Vec3> poly;
  for (int k = 0; k < 3; ++k) {
    const Vec3 &p = tri[k], &q = tri[(k + 1) % 3];
    const double sp = h.normal.dot(p) - h.offset, sq = h.normal.dot(q) - h.offset;
    if (sp <= 0.0)
      poly.push_back(p);
    if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0))
      poly.push_back(p + (sp / (sp - sq)) * (q - p));
  }
  double a = 0.0;
  for (std::size_t k = 1; k + 1 < poly.size(); ++k)
    a += triangle_area(poly[0], poly[k], poly[k + 1]);
  return a;
}

} // namespace detail

/// μ_V restricted to a half-space (exact clipping).
inline double weight_measure(const DiscreteVarifold &v, const HalfSpace &region) {
  double m = 0.0;
  for (std::size_t t = 0; t < v.size(); ++t) {
    const auto &tr = v.tris[t];
    m += v.theta[t] * detail::clipped_area({v.vertices[tr[0]], v.vertices[tr[1]], v.vertices[tr[2]]}, region);
  }
  return m;
}

/// μ_V restricted to triangles whose centroid satisfies `inside`.
inline double weight_measure(const DiscreteVarifold &v, const std::function<bool(const Vec3 &)> &inside) {
  double m = 0.0;
  for (std::size_t t = 0; t < v.size(); ++t)
    if (inside(v.centroid[t]))
      m += v.theta[t] * v.area[t];
  return m;
}

/// Per-vertex curvature tensor A[i](j, k) ≈ tangential derivative along i of Π_jk.
struct CurvatureField {
  std::vector<Tensor3> A;
};

/// Tangential gradient of the piecewise-constant projection field, averaged over
/// each vertex's barycentric cell. The distributional derivative of Π lives on
/// edges: jump (Π_T' − Π_T) times the conormal ν pointing from T to T', with
/// half of each edge assigned to each endpoint.
inline CurvatureField curvature(const DiscreteVarifold &v) {
  if (!v.nonmanifold_edges.empty()) {
    const auto &e = v.nonmanifold_edges.front();
    throw NonManifoldError("edge (" + std::to_string(e.first) + ", " + std::to_string(e.second) + ") has " +
                           std::to_string(v.edges.at(e).size()) + " incident triangles");
  }
  CurvatureField out;
  out.A.assign(v.vertices.size(), zero_tensor3());
  for (const auto &[e, inc] : v.edges) {
    if (inc.size() != 2)
      continue;
    const int t0 = inc[0], t1 = inc[1];
    const Vec3 m0 = v.outward_conormal(t0, e.first, e.second);
    const Vec3 m1 = v.outward_conormal(t1, e.first, e.second);
    const Vec3 dir = m0 - m1;
    if (dir.norm() < 1e-14)
      continue;
    const Vec3 nu = dir.normalized();
    const Mat3 jump = v.projection[t1] - v.projection[t0];
    const double half_len = 0.5 * (v.vertices[e.second] - v.vertices[e.first]).norm();
    for (int w : {e.first, e.second})
      for (int i = 0; i < 3; ++i)
        out.A[w][i] += (half_len * nu[i]) * jump;
  }
  for (std::size_t w = 0; w < v.vertices.size(); ++w)
    if (v.vertex_area[w] > 0.0)
      out.A[w] = (1.0 / v.vertex_area[w]) * out.A[w];
  return out;
}

/// ∫ a1 ‖A‖^p̄ dV with vertex-lumped θ-weighted areas.
inline double curvature_energy(const DiscreteVarifold &v, const CurvatureField &curv, double a1, double p_bar) {
  double s = 0.0;
  for (std::size_t w = 0; w < v.vertices.size(); ++w)
    if (v.vertex_weight[w] > 0.0)
      s += v.vertex_weight[w] * detail::pow_norm(norm(curv.A[w]), p_bar);
  return a1 * s;
}

inline double curvature_energy(const DiscreteVarifold &v, double a1, double p_bar) {
  return curvature_energy(v, curvature(v), a1, p_bar);
}

inline const std::vector<BoundaryEdge> &boundary_measure(const DiscreteVarifold &v) { return v.boundary_edges; }

/// ‖∂V‖ = Σ θ · length over boundary edges.
inline double boundary_mass(const DiscreteVarifold &v) {
  double s = 0.0;
  for (const auto &e : v.boundary_edges)
    s += v.theta[e.tri] * e.length;
  return s;
}

// ---------------------------------------------------------------------------
// First variation

/// φ(x, Π) = (c0 + a·x) · bump(x) · (1 + <Q, Π>), with the compactly supported
/// bump exp(1 - 1/(1 - |x-center|²/ρ²)) (ρ = inf disables the bump).
struct PolyBumpTestFunction {
  double c0 = 1.0;
  Vec3 a = Vec3::Zero();
  Vec3 center = Vec3::Zero();
  double radius = std::numeric_limits<double>::infinity();
  Mat3 Q = Mat3::Zero();

  struct Eval {
    double value;
    Vec3 grad_x;
    Mat3 grad_pi;
  };

  Eval operator()(const Vec3 &x, const Mat3 &pi) const {
    const double poly = c0 + a.dot(x);
    double bump = 1.0;
    Vec3 grad_bump = Vec3::Zero();
    if (std::isfinite(radius)) {
      const Vec3 d = x - center;
      const double u = d.squaredNorm() / (radius * radius);
      if (u >= 1.0) {
        bump = 0.0;
      } else {
        bump = std::exp(1.0 - 1.0 / (1.0 - u));
        grad_bump = bump * (-1.0 / ((1.0 - u) * (1.0 - u))) * (2.0 / (radius * radius)) * d;
      }
    }
    const double pifac = 1.0 + Q.cwiseProduct(pi).sum();
    return {poly * bump * pifac, (a * bump + poly * grad_bump) * pifac, (poly * bump) * Q};
  }
};

/// Vector residual ∫(Π D_xφ + A D_Πφ + φ tr(A)) dV + ∫ φ d∂V, vertex/edge lumped.
/// Here (A D_Πφ)_i = Σ_jk A[i](j,k) ∂φ/∂Π_jk and tr(A)_i = Σ_j A[j](i,j).
inline Vec3 first_variation_vector(const DiscreteVarifold &v, const CurvatureField &curv,
                                   const PolyBumpTestFunction &phi) {
  Vec3 r = Vec3::Zero();
  for (std::size_t t = 0; t < v.size(); ++t) {
    const double w = v.theta[t] * v.area[t] / 3.0;
    const Mat3 &pi = v.projection[t];
    for (int node : v.tris[t]) {
      const auto ev = phi(v.vertices[node], pi);
      const Tensor3 &A = curv.A[node];
      Vec3 term = pi * ev.grad_x;
      for (int i = 0; i < 3; ++i) {
        term[i] += A[i].cwiseProduct(ev.grad_pi).sum();
        double tr = 0.0;
        for (int j = 0; j < 3; ++j)
          tr += A[j](i, j);
        term[i] += ev.value * tr;
      }
      r += w * term;
    }
  }
  for (const auto &e : v.boundary_edges) {
    const Mat3 &pi = v.projection[e.tri];
    const double phi_mid = 0.5 * (phi(v.vertices[e.a], pi).value + phi(v.vertices[e.b], pi).value);
    r += phi_mid * e.weight;
  }
  return r;
}

/// Max over the test set of the Euclidean norm of the first-variation residual.
inline double first_variation_residual(const DiscreteVarifold &v, const CurvatureField &curv,
                                       const std::vector<PolyBumpTestFunction> &tests) {
  double worst = 0.0;
  for (const auto &phi : tests)
    worst = std::max(worst, first_variation_vector(v, curv, phi).norm());
  return worst;
}

inline double first_variation_residual(const DiscreteVarifold &v, const std::vector<PolyBumpTestFunction> &tests) {
  if (v.empty())
    return 0.0;
  return first_variation_residual(v, curvature(v), tests);
}

/// Built-in smooth test functions centred at `center` with support radius `radius`.
inline std::vector<PolyBumpTestFunction> builtin_test_functions(const Vec3 &center, double radius) {
  std::vector<PolyBumpTestFunction> out;
  out.push_back({1.0, Vec3::Zero(), center, radius, Mat3::Zero()});
  out.push_back({0.5, Vec3(1.0, -0.5, 0.25), center, radius, Mat3::Zero()});
  Mat3 q;
  q << 0.3, 0.1, 0.0, 0.1, -0.2, 0.05, 0.0, 0.05, 0.4;
  out.push_back({1.0, Vec3(0.0, 0.7, 0.0), center, radius, q});
  return out;
}

// ---------------------------------------------------------------------------
// Crack energy

struct CrackEnergyBreakdown {
  double mass_term = 0.0;
  double curvature_term = 0.0;
  double boundary_term = 0.0;
  double total = 0.0;
};

inline CrackEnergyBreakdown crack_energy(const DiscreteVarifold &v, double a_bar, double a1, double a2,
                                         double p_bar) {
  CrackEnergyBreakdown b;
  if (v.empty())
    return b;
  b.mass_term = a_bar * mass(v);
  b.curvature_term = curvature_energy(v, a1, p_bar);
  b.boundary_term = a2 * boundary_mass(v);
  b.total = b.mass_term + b.curvature_term + b.boundary_term;
  return b;
}

/// E(V; B) = ā μ_V(B) + ∫ a1 ‖A‖^p̄ dV + a2 ‖∂V‖.
inline CrackEnergyBreakdown crack_energy(const DiscreteVarifold &v, const EnergyParams &params) {
  return crack_energy(v, params.a_bar, params.a1, params.a2, params.p_bar);
}

/// Disjoint union; vertex ids of `b` are shifted.
inline DiscreteVarifold disjoint_union(const DiscreteVarifold &a, const DiscreteVarifold &b) {
  auto verts = a.vertices;
  verts.insert(verts.end(), b.vertices.begin(), b.vertices.end());
  auto tris = a.tris;
  const int shift = static_cast<int>(a.vertices.size());
  for (auto t : b.tris) {
    for (int &w : t)
      w += shift;
    tris.push_back(t);
  }
  auto theta = a.theta;
  theta.insert(theta.end(), b.theta.begin(), b.theta.end());
  auto src = a.source_face;
  src.insert(src.end(), b.source_face.begin(), b.source_face.end());
  return DiscreteVarifold::from_triangles(std::move(verts), std::move(tris), std::move(theta), std::move(src));
}

/// Crack varifold carried by a set of mesh faces, in reference coordinates.
inline DiscreteVarifold varifold_from_faces(const BodyMesh &mesh, const std::vector<int> &faces, int theta) {
  std::map<int, int> local;
  std::vector<Vec3> verts;
  std::vector<Tri> tris;
  for (int f : faces) {
    Tri t;
    for (int k = 0; k < 3; ++k) {
      const int v = mesh.interior_faces[f].nodes[k];
      auto [it, inserted] = local.emplace(v, static_cast<int>(verts.size()));
      if (inserted)
        verts.push_back(mesh.nodes[v]);
      t[k] = it->second;
    }
    tris.push_back(t);
  }
  return DiscreteVarifold::from_triangles(std::move(verts), std::move(tris), std::vector<int>(faces.size(), theta),
                                          faces);
}

// ---------------------------------------------------------------------------
// ASCII surface format
//
//   trisurf 1
//   nodes N       then N lines: x y z
//   triangles M   then M lines: a b c theta

inline DiscreteVarifold parse_surface(std::istream &in, const std::string &source = "<surface>") {
  detail::LineReader lr(in, source);
  {
    auto ls = lr.next();
    std::string magic;
    int version = 0;
    lr.read(ls, magic, version);
    if (magic != "trisurf" || version != 1)
      lr.fail("expected header 'trisurf 1'");
  }
  std::vector<Vec3> nodes(lr.section("nodes"));
  for (auto &x : nodes) {
    auto ls = lr.next();
    lr.read(ls, x[0], x[1], x[2]);
  }
  const std::size_t m = lr.section("triangles");
  std::vector<Tri> tris(m);
  std::vector<int> theta(m);
  for (std::size_t k = 0; k < m; ++k) {
    auto ls = lr.next();
    lr.read(ls, tris[k][0], tris[k][1], tris[k][2], theta[k]);
  }
  return DiscreteVarifold::from_triangles(std::move(nodes), std::move(tris), std::move(theta));
}

inline DiscreteVarifold load_surface(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::ios_base::failure("cannot open surface file '" + path + "'");
  return parse_surface(in, path);
}

inline void write_surface(std::ostream &out, const DiscreteVarifold &v) {
  using detail::fmt_double;
  out << "trisurf 1\nnodes " << v.vertices.size() << "\n";
  for (const auto &x : v.vertices)
    out << fmt_double(x[0]) << " " << fmt_double(x[1]) << " " << fmt_double(x[2]) << "\n";
  out << "triangles " << v.tris.size() << "\n";
  for (std::size_t t = 0; t < v.size(); ++t)
    out << v.tris[t][0] << " " << v.tris[t][1] << " " << v.tris[t][2] << " " << v.theta[t] << "\n";
}

} // namespace fracvar
