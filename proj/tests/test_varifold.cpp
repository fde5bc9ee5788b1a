#include "test_support.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace fracvar;
using testing_support::data_path;

namespace {

double max_curvature_norm(const DiscreteVarifold &v) {
  double m = 0.0;
  for (const auto &a : curvature(v).A)
    m = std::max(m, norm(a));
  return m;
}

Mat3 rotation() {
  return (Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()) * Eigen::AngleAxisd(-0.3, Vec3::UnitX()))
      .toRotationMatrix();
}

} // namespace

TEST(Varifold, SquareWithMultiplicity) {
  const auto v = load_surface(data_path("square_theta2.surf"));
  EXPECT_DOUBLE_EQ(mass(v), 2.0);
  EXPECT_DOUBLE_EQ(boundary_mass(v), 8.0);
  EXPECT_EQ(boundary_measure(v).size(), 4u);
  EXPECT_EQ(max_curvature_norm(v), 0.0);
  // Boundary measure points inward: it sums to zero on a closed polygon, and each
  // weight is θ · length times the inward conormal.
  Vec3 total = Vec3::Zero();
  for (const auto &e : boundary_measure(v)) {
    total += e.weight;
    const Vec3 mid = 0.5 * (v.vertices[e.a] + v.vertices[e.b]);
    EXPECT_GT(e.weight.dot(Vec3(0.5, 0.5, 0) - mid), 0.0);
    EXPECT_NEAR(e.weight.norm(), 2.0 * e.length, 1e-15);
  }
  EXPECT_LE(total.norm(), 1e-15);
}

TEST(Varifold, CrackEnergyIsLinearInMultiplicity) {
  const EnergyParams p{1, 3, 2, 2, 1, 2, 2.0, 1.0, 0.5, 10, 2};
  const auto one = crack_energy(surfaces::unit_square(1), p);
  const auto two = crack_energy(surfaces::unit_square(2), p);
  EXPECT_DOUBLE_EQ(one.mass_term, 2.0);
  EXPECT_DOUBLE_EQ(one.boundary_term, 2.0);
  EXPECT_DOUBLE_EQ(one.curvature_term, 0.0);
  EXPECT_DOUBLE_EQ(two.total, 2.0 * one.total);
  EXPECT_EQ(crack_energy(DiscreteVarifold{}, p).total, 0.0);
}

TEST(Varifold, FlatSurfacesHaveZeroCurvature) {
  EXPECT_LE(max_curvature_norm(surfaces::square_grid(2.0, 8)), 1e-10);
  EXPECT_LE(max_curvature_norm(surfaces::disc(1.0, 6)), 1e-10);
  const auto tilted = surfaces::rigid_transform(surfaces::disc(1.0, 6), rotation(), Vec3(0.3, -1, 2));
  EXPECT_LE(max_curvature_norm(tilted), 1e-10);
}

TEST(Varifold, SphereCurvature) {
  const auto s = surfaces::icosphere(1.0, 4);
  EXPECT_EQ(s.size(), 20u * 256u);
  EXPECT_TRUE(s.boundary_edges.empty());
  EXPECT_NEAR(mass(s), 4.0 * std::numbers::pi, 0.01 * 4.0 * std::numbers::pi);
  // |A|² = Σ κ_i² · 2 for Π = I - n nᵀ on a round sphere: |A| = 2/R.
  double mean = 0.0;
  const auto curv = curvature(s);
  for (const auto &a : curv.A)
    mean += norm(a) / curv.A.size();
  EXPECT_NEAR(mean, 2.0, 0.01);
  const auto big = surfaces::icosphere(2.0, 4);
  EXPECT_NEAR(curvature_energy(big, 1.0, 2.0), curvature_energy(s, 1.0, 2.0), 1e-9);
}

TEST(Varifold, CylinderCurvature) {
  const double r = 0.5;
  const auto c = surfaces::cylinder(r, 2.0, 96, 20);
  const auto curv = curvature(c);
  for (std::size_t w = 0; w < c.vertices.size(); ++w) {
    const double z = c.vertices[w][2];
    if (z < 0.2 || z > 1.8)
      continue;
    EXPECT_LE(curv.A[w][2].cwiseAbs().maxCoeff(), 1e-8); // no variation along the axis
    EXPECT_NEAR(norm(curv.A[w]), std::sqrt(2.0) / r, 2e-3 / r);
  }
}

TEST(Varifold, RigidMotionInvariance) {
  const auto s = surfaces::icosphere(1.0, 2);
  const auto m = surfaces::rigid_transform(s, rotation(), Vec3(1, 2, 3));
  EXPECT_NEAR(mass(m), mass(s), 1e-12);
  EXPECT_NEAR(curvature_energy(m, 1, 2), curvature_energy(s, 1, 2), 1e-9);
  const auto d = surfaces::disc(1.0, 5);
  const auto dm = surfaces::rigid_transform(d, rotation(), Vec3(-1, 0, 4));
  EXPECT_NEAR(boundary_mass(dm), boundary_mass(d), 1e-12);
}

TEST(Varifold, WeightMeasureOfHalfSpace) {
  const auto sq = surfaces::unit_square(3);
  EXPECT_NEAR(weight_measure(sq, HalfSpace{Vec3::UnitX(), 0.25}), 0.75, 1e-15);
  EXPECT_NEAR(weight_measure(sq, HalfSpace{Vec3(1, 1, 0).normalized(), 0.0}), 0.0, 1e-15);
  EXPECT_NEAR(weight_measure(sq, HalfSpace{Vec3::UnitZ(), 0.0}), 3.0, 1e-15);
  EXPECT_NEAR(weight_measure(sq, [](const Vec3 &x) { return x[0] > x[1]; }), 1.5, 1e-15);
}

TEST(Varifold, FirstVariationVanishesForAffineTests) {
  const auto sq = surfaces::square_grid(1.0, 4);
  const auto curv = curvature(sq);
  Mat3 q;
  q << 0.2, 0.1, 0, 0.1, -0.3, 0.2, 0, 0.2, 0.5;
  const std::vector<PolyBumpTestFunction> tests{{1.0, Vec3::Zero()}, {0.3, Vec3(1, -2, 0.5)}, {1.0, Vec3(0, 1, 0), Vec3::Zero(), std::numeric_limits<double>::infinity(), q}};
  EXPECT_LE(first_variation_residual(sq, curv, tests), 1e-13);
  EXPECT_EQ(first_variation_residual(DiscreteVarifold{}, tests), 0.0);
}

TEST(Varifold, InvalidInputs) {
  std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {2, 0, 0}};
  EXPECT_THROW(DiscreteVarifold::from_triangles(v, {{0, 1, 2}}, {0}), ValueError);
  EXPECT_THROW(DiscreteVarifold::from_triangles(v, {{0, 1, 3}}, {1}), GeometryError);
  EXPECT_THROW(DiscreteVarifold::from_triangles(v, {{0, 1, 9}}, {1}), ValueError);
  // Three sheets sharing one edge.
  std::vector<Vec3> w{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}};
  const auto book = DiscreteVarifold::from_triangles(w, {{0, 1, 2}, {0, 1, 3}, {0, 1, 4}}, {1, 1, 1});
  ASSERT_EQ(book.nonmanifold_edges.size(), 1u);
  EXPECT_THROW(curvature(book), NonManifoldError);
}

TEST(Varifold, SurfaceRoundTripAndUnion) {
  const auto d = surfaces::disc(1.0, 3);
  std::ostringstream out;
  write_surface(out, d);
  std::istringstream in(out.str());
  const auto back = parse_surface(in);
  ASSERT_EQ(back.vertices.size(), d.vertices.size());
  for (std::size_t k = 0; k < d.vertices.size(); ++k)
    EXPECT_TRUE(back.vertices[k] == d.vertices[k]);
  EXPECT_EQ(back.tris, d.tris);
  const auto u = disjoint_union(d, surfaces::unit_square(2));
  EXPECT_NEAR(mass(u), mass(d) + 2.0, 1e-14);
  EXPECT_NEAR(boundary_mass(u), boundary_mass(d) + 8.0, 1e-14);
  std::istringstream bad("trisurf 1\nnodes 1\n0 0\n");
  EXPECT_THROW(parse_surface(bad), ParseError);
}

TEST(Varifold, FromMeshFaces) {
  BoxSpec b;
  b.hi = Vec3(2, 1, 1);
  b.cells = {2, 2, 2};
  b.crack_layer = 1;
  const BodyMesh m = structured_box(b);
  const auto v = varifold_from_faces(m, m.candidate_faces, 2);
  EXPECT_NEAR(mass(v), 2.0, 1e-14);
  EXPECT_NEAR(boundary_mass(v), 8.0, 1e-14);
  EXPECT_EQ(v.source_face, m.candidate_faces);
  EXPECT_LE(max_curvature_norm(v), 1e-12);
}
