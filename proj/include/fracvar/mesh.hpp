#pragma once

#include "fracvar/errors.hpp"
#include "fracvar/tensor.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fracvar {

using Tet = std::array<int, 4>;
using Tri = std::array<int, 3>;

enum class BoundaryTag { Gamma0, Gamma1 };

/// Local face k of a tet is the face opposite local vertex k.
inline constexpr std::array<std::array<int, 3>, 4> kTetFaces{{{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};

inline Tri sorted_tri(Tri t) {
  std::sort(t.begin(), t.end());
  return t;
}

inline double signed_tet_volume(const Vec3 &a, const Vec3 &b, const Vec3 &c, const Vec3 &d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

inline double triangle_area(const Vec3 &a, const Vec3 &b, const Vec3 &c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

/// Face shared by two tets.
struct InteriorFace {
  Tri nodes;                 ///< sorted node ids
  std::array<int, 2> tet{};  ///< adjacent tets, tet[0] < tet[1]
  std::array<int, 2> local{}; ///< local face index in each tet
};

struct BoundaryFace {
  Tri nodes; ///< sorted node ids
  int tet = -1;
  BoundaryTag tag = BoundaryTag::Gamma1;
};

/// Tetrahedral reference body with boundary tags, candidate crack surface and
/// Dirichlet data. Immutable once built; construct through `BodyMesh::build`.
class BodyMesh {
public:
  std::vector<Vec3> nodes;
  std::vector<Tet> tets;
  std::vector<InteriorFace> interior_faces;
  std::vector<BoundaryFace> boundary_faces;
  std::vector<int> candidate_faces;  ///< interior-face ids, ascending
  std::map<int, Vec3> dirichlet;     ///< Γ0 node -> prescribed value y0

  // Derived reference geometry.
  std::vector<double> volumes;
  std::vector<Mat3> inv_edge_matrices; ///< inverse of [x1-x0, x2-x0, x3-x0]
  std::vector<Vec3> centroids;
  std::vector<std::array<int, 4>> tet_faces; ///< per local face: interior id, or -1 - boundary id

  /// Assemble and validate a mesh. `g0_faces` lists the Γ0 boundary faces,
  /// `candidates` the crack candidate faces, both as node triples.
  static BodyMesh build(std::vector<Vec3> nodes, std::vector<Tet> tets,
                        const std::vector<Tri> &g0_faces, const std::vector<Tri> &g1_faces,
                        const std::vector<Tri> &candidates, std::map<int, Vec3> dirichlet) {
    BodyMesh m;
    m.nodes = std::move(nodes);
    m.tets = std::move(tets);
    m.dirichlet = std::move(dirichlet);
    const int n_nodes = static_cast<int>(m.nodes.size());

    for (std::size_t t = 0; t < m.tets.size(); ++t) {
      for (int v : m.tets[t])
        if (v < 0 || v >= n_nodes)
          throw ValidationError("tet " + std::to_string(t) + " references missing node " +
                                std::to_string(v));
      const auto &tt = m.tets[t];
      const double vol = signed_tet_volume(m.nodes[tt[0]], m.nodes[tt[1]], m.nodes[tt[2]], m.nodes[tt[3]]);
      if (!(vol > 0.0))
        throw ValidationError("tet " + std::to_string(t) + " is not positively oriented (volume " +
                              std::to_string(vol) + ")");
      m.volumes.push_back(vol);
      Mat3 dm;
      for (int k = 0; k < 3; ++k)
        dm.col(k) = m.nodes[tt[k + 1]] - m.nodes[tt[0]];
      m.inv_edge_matrices.push_back(dm.inverse());
      m.centroids.push_back(0.25 * (m.nodes[tt[0]] + m.nodes[tt[1]] + m.nodes[tt[2]] + m.nodes[tt[3]]));
    }

    std::map<Tri, std::vector<std::pair<int, int>>> incidence;
    for (std::size_t t = 0; t < m.tets.size(); ++t)
      for (int f = 0; f < 4; ++f) {
        Tri tri{m.tets[t][kTetFaces[f][0]], m.tets[t][kTetFaces[f][1]], m.tets[t][kTetFaces[f][2]]};
        incidence[sorted_tri(tri)].emplace_back(static_cast<int>(t), f);
      }

    m.tet_faces.assign(m.tets.size(), {0, 0, 0, 0});
    for (const auto &[tri, inc] : incidence) {
      if (inc.size() == 1) {
        BoundaryFace bf{tri, inc[0].first, BoundaryTag::Gamma1};
        m.tet_faces[inc[0].first][inc[0].second] = -1 - static_cast<int>(m.boundary_faces.size());
        m.boundary_faces.push_back(bf);
      } else if (inc.size() == 2) {
        InteriorFace f{tri, {inc[0].first, inc[1].first}, {inc[0].second, inc[1].second}};
        const int id = static_cast<int>(m.interior_faces.size());
        m.tet_faces[inc[0].first][inc[0].second] = id;
        m.tet_faces[inc[1].first][inc[1].second] = id;
        m.interior_faces.push_back(f);
      } else {
        throw ValidationError("face shared by " + std::to_string(inc.size()) + " tets");
      }
    }

    auto tag_faces = [&](const std::vector<Tri> &faces, BoundaryTag tag) {
      for (const auto &f : faces) {
        const auto id = m.find_boundary_face(f);
        if (!id)
          throw ValidationError("tagged face (" + std::to_string(f[0]) + " " + std::to_string(f[1]) +
                                " " + std::to_string(f[2]) + ") is not a boundary face");
        m.boundary_faces[*id].tag = tag;
      }
    };
    tag_faces(g1_faces, BoundaryTag::Gamma1);
    tag_faces(g0_faces, BoundaryTag::Gamma0);

    for (std::size_t k = 0; k < candidates.size(); ++k) {
      const auto id = m.find_interior_face(candidates[k]);
      if (!id)
        throw ValidationError("candidate crack face " + std::to_string(k) + " is not an interior face");
      m.candidate_faces.push_back(*id);
    }
    std::sort(m.candidate_faces.begin(), m.candidate_faces.end());
    m.candidate_faces.erase(std::unique(m.candidate_faces.begin(), m.candidate_faces.end()),
                            m.candidate_faces.end());

    if (!(m.gamma0_area() > 0.0))
      throw ValidationError("Γ0 has zero area");
    for (int v : m.gamma0_nodes())
      if (!m.dirichlet.count(v))
        throw ValidationError("Γ0 node " + std::to_string(v) + " has no Dirichlet value");
    const auto g0 = m.gamma0_nodes();
    for (const auto &[v, val] : m.dirichlet)
      if (!std::binary_search(g0.begin(), g0.end(), v))
        throw ValidationError("Dirichlet value given for node " + std::to_string(v) + " not on Γ0");
    return m;
  }

  std::optional<int> find_interior_face(const Tri &t) const {
    const Tri s = sorted_tri(t);
    auto it = std::lower_bound(interior_faces.begin(), interior_faces.end(), s,
                               [](const InteriorFace &f, const Tri &k) { return f.nodes < k; });
    if (it != interior_faces.end() && it->nodes == s)
      return static_cast<int>(it - interior_faces.begin());
    return std::nullopt;
  }

  std::optional<int> find_boundary_face(const Tri &t) const {
    const Tri s = sorted_tri(t);
    auto it = std::lower_bound(boundary_faces.begin(), boundary_faces.end(), s,
                               [](const BoundaryFace &f, const Tri &k) { return f.nodes < k; });
    if (it != boundary_faces.end() && it->nodes == s)
      return static_cast<int>(it - boundary_faces.begin());
    return std::nullopt;
  }

  double face_area(const Tri &t) const { return triangle_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]); }

  double gamma0_area() const {
    double a = 0.0;
    for (const auto &f : boundary_faces)
      if (f.tag == BoundaryTag::Gamma0)
        a += face_area(f.nodes);
    return a;
  }

  double gamma1_area() const {
    double a = 0.0;
    for (const auto &f : boundary_faces)
      if (f.tag == BoundaryTag::Gamma1)
        a += face_area(f.nodes);
    return a;
  }

  /// Sorted ids of nodes on Γ0 faces.
  std::vector<int> gamma0_nodes() const {
    std::set<int> s;
    for (const auto &f : boundary_faces)
      if (f.tag == BoundaryTag::Gamma0)
        s.insert(f.nodes.begin(), f.nodes.end());
    return {s.begin(), s.end()};
  }

  double total_volume() const {
    double v = 0.0;
    for (double x : volumes)
      v += x;
    return v;
  }

  double bounding_box_diagonal() const {
    Vec3 lo = nodes.front(), hi = nodes.front();
    for (const auto &x : nodes) {
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
    return (hi - lo).norm();
  }

  std::vector<Tri> gamma0_faces() const { return faces_with(BoundaryTag::Gamma0); }
  std::vector<Tri> gamma1_faces() const { return faces_with(BoundaryTag::Gamma1); }

  std::vector<Tri> candidate_triangles() const {
    std::vector<Tri> out;
    for (int f : candidate_faces)
      out.push_back(interior_faces[f].nodes);
    return out;
  }

  /// Rebuild with new Dirichlet data on the same Γ0.
  BodyMesh with_dirichlet(std::map<int, Vec3> values) const {
    return build(nodes, tets, gamma0_faces(), {}, candidate_triangles(), std::move(values));
  }

private:
  std::vector<Tri> faces_with(BoundaryTag tag) const {
    std::vector<Tri> out;
    for (const auto &f : boundary_faces)
      if (f.tag == tag)
        out.push_back(f.nodes);
    return out;
  }
};

// ---------------------------------------------------------------------------
// ASCII mesh format
//
//   tetmesh 1
//   nodes N        then N lines: x y z
//   tets M         then M lines: four zero-based node ids
//   bfaces K       then K lines: n1 n2 n3 tag   (tag is g0 or g1)
//   cfaces L       then L lines: n1 n2 n3       (candidate crack faces)
//   dirichlet P    then P lines: node yx yy yz
//
// Boundary faces not listed are Γ1. Blank lines and lines starting with '#'
// are ignored.

namespace detail {

class LineReader {
public:
  explicit LineReader(std::istream &in, std::string source) : in_(in), source_(std::move(source)) {}

  std::istringstream next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#')
        continue;
      return std::istringstream(line);
    }
    fail("unexpected end of file");
  }

  [[noreturn]] void fail(const std::string &what) const {
    throw ParseError(source_ + ":" + std::to_string(line_no_) + ": " + what);
  }

  std::size_t section(const std::string &keyword) {
    auto ls = next();
    std::string kw;
    long long count = -1;
    if (!(ls >> kw >> count) || kw != keyword || count < 0)
      fail("expected '" + keyword + " <count>'");
    return static_cast<std::size_t>(count);
  }

  template <class... T> void read(std::istringstream &ls, T &...vals) {
    if (!((ls >> vals) && ...))
      fail("malformed record");
    std::string extra;
    if (ls >> extra)
      fail("trailing token '" + extra + "'");
  }

private:
  std::istream &in_;
  std::string source_;
  std::size_t line_no_ = 0;
};

} // namespace detail

inline BodyMesh parse_mesh(std::istream &in, const std::string &source = "<mesh>") {
  detail::LineReader lr(in, source);
  {
    auto ls = lr.next();
    std::string magic;
    int version = 0;
    lr.read(ls, magic, version);
    if (magic != "tetmesh" || version != 1)
      lr.fail("expected header 'tetmesh 1'");
  }
  std::vector<Vec3> nodes(lr.section("nodes"));
  for (auto &x : nodes) {
    auto ls = lr.next();
    lr.read(ls, x[0], x[1], x[2]);
  }
  std::vector<Tet> tets(lr.section("tets"));
  for (auto &t : tets) {
    auto ls = lr.next();
    lr.read(ls, t[0], t[1], t[2], t[3]);
  }
  std::vector<Tri> g0, g1;
  for (std::size_t k = lr.section("bfaces"); k > 0; --k) {
    auto ls = lr.next();
    Tri t;
    std::string tag;
    lr.read(ls, t[0], t[1], t[2], tag);
    if (tag == "g0")
      g0.push_back(t);
    else if (tag == "g1")
      g1.push_back(t);
    else
      lr.fail("unknown boundary tag '" + tag + "'");
  }
  std::vector<Tri> cand(lr.section("cfaces"));
  for (auto &t : cand) {
    auto ls = lr.next();
    lr.read(ls, t[0], t[1], t[2]);
  }
  std::map<int, Vec3> dir;
  for (std::size_t k = lr.section("dirichlet"); k > 0; --k) {
    auto ls = lr.next();
    int v;
    Vec3 y;
    lr.read(ls, v, y[0], y[1], y[2]);
    dir[v] = y;
  }
  return BodyMesh::build(std::move(nodes), std::move(tets), g0, g1, cand, std::move(dir));
}

inline BodyMesh load_mesh(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::ios_base::failure("cannot open mesh file '" + path + "'");
  return parse_mesh(in, path);
}

namespace detail {
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
} // namespace detail

inline void write_mesh(std::ostream &out, const BodyMesh &m) {
  using detail::fmt_double;
  out << "tetmesh 1\n";
  out << "nodes " << m.nodes.size() << "\n";
  for (const auto &x : m.nodes)
    out << fmt_double(x[0]) << " " << fmt_double(x[1]) << " " << fmt_double(x[2]) << "\n";
  out << "tets " << m.tets.size() << "\n";
  for (const auto &t : m.tets)
    out << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
  out << "bfaces " << m.boundary_faces.size() << "\n";
  for (const auto &f : m.boundary_faces)
    out << f.nodes[0] << " " << f.nodes[1] << " " << f.nodes[2] << " "
        << (f.tag == BoundaryTag::Gamma0 ? "g0" : "g1") << "\n";
  out << "cfaces " << m.candidate_faces.size() << "\n";
  for (int f : m.candidate_faces) {
    const auto &n = m.interior_faces[f].nodes;
    out << n[0] << " " << n[1] << " " << n[2] << "\n";
  }
  out << "dirichlet " << m.dirichlet.size() << "\n";
  for (const auto &[v, y] : m.dirichlet)
    out << v << " " << fmt_double(y[0]) << " " << fmt_double(y[1]) << " " << fmt_double(y[2]) << "\n";
}

inline void save_mesh(const std::string &path, const BodyMesh &m) {
  std::ofstream out(path);
  if (!out)
    throw std::ios_base::failure("cannot write mesh file '" + path + "'");
  write_mesh(out, m);
}

// ---------------------------------------------------------------------------
// Structured box generator (fixtures)

struct BoxSpec {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();
  std::array<int, 3> cells{1, 1, 1};
  /// Candidate crack plane x = lo.x + crack_layer * hx; -1 for none.
  int crack_layer = -1;
  bool gamma0_low_x = true;
  bool gamma0_high_x = false;
  /// Prescribed y0 = A x + b on Γ0.
  Mat3 dirichlet_matrix = Mat3::Identity();
  Vec3 dirichlet_offset = Vec3::Zero();
};

/// Box split into cells, each cell into six tets sharing its main diagonal
/// (conforming across cells).
inline BodyMesh structured_box(const BoxSpec &spec) {
  const auto [nx, ny, nz] = spec.cells;
  auto id = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };
  std::vector<Vec3> nodes;
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        const Vec3 t(double(i) / nx, double(j) / ny, double(k) / nz);
        nodes.push_back(spec.lo + (spec.hi - spec.lo).cwiseProduct(t));
      }

  // Corner c of a cell has bits (x, y, z). Each tet walks 0 -> 7 along one axis permutation.
  static constexpr std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  std::vector<Tet> tets;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        for (const auto &p : perms) {
          std::array<int, 3> c{0, 0, 0};
          Tet t;
          t[0] = id(i, j, k);
          for (int s = 0; s < 3; ++s) {
            c[p[s]] = 1;
            t[s + 1] = id(i + c[0], j + c[1], k + c[2]);
          }
          if (signed_tet_volume(nodes[t[0]], nodes[t[1]], nodes[t[2]], nodes[t[3]]) < 0)
            std::swap(t[2], t[3]);
          tets.push_back(t);
        }

  const double x_lo = spec.lo[0], x_hi = spec.hi[0];
  std::vector<Tri> g0, cand;
  std::map<int, Vec3> dir;
  std::set<Tri> seen;
  const double hx = (spec.hi[0] - spec.lo[0]) / nx;
  const double crack_x = spec.crack_layer >= 0 ? spec.lo[0] + spec.crack_layer * hx : 0.0;
  const double eps = 1e-9 * hx;
  for (const auto &t : tets)
    for (const auto &lf : kTetFaces) {
      const Tri tri = sorted_tri({t[lf[0]], t[lf[1]], t[lf[2]]});
      if (!seen.insert(tri).second)
        continue;
      auto all_at = [&](double x) {
        return std::all_of(tri.begin(), tri.end(), [&](int v) { return std::abs(nodes[v][0] - x) < eps; });
      };
      if ((spec.gamma0_low_x && all_at(x_lo)) || (spec.gamma0_high_x && all_at(x_hi)))
        g0.push_back(tri);
      if (spec.crack_layer > 0 && spec.crack_layer < nx && all_at(crack_x))
        cand.push_back(tri);
    }
  for (const auto &f : g0)
    for (int v : f)
      dir[v] = spec.dirichlet_matrix * nodes[v] + spec.dirichlet_offset;
  return BodyMesh::build(std::move(nodes), std::move(tets), g0, {}, cand, std::move(dir));
}

} // namespace fracvar
