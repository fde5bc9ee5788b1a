#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace fracvar;
using testing_support::data_path;

namespace {

/// Bar [0,2]x[0,1]x[0,1] clamped at x = 0, cut at x = 1; the right half is
/// stretched by 1.2 and lifted, so both y and its minors jump on every mid-plane face.
struct SplitBar {
  std::shared_ptr<const BodyMesh> mesh;
  DeformationState state;
};

SplitBar split_bar() {
  BoxSpec b;
  b.hi = Vec3(2, 1, 1);
  b.cells = {2, 2, 2};
  b.crack_layer = 1;
  auto m = std::make_shared<const BodyMesh>(structured_box(b));
  DeformationState st = cut_mesh(m, m->candidate_faces);
  std::vector<Vec3> y(st.node_count());
  for (std::size_t e = 0; e < st.tets.size(); ++e)
    for (int v : st.tets[e]) {
      const Vec3 x = st.reference(v);
      y[v] = m->centroids[e][0] > 1.0 ? Vec3(1.0 + 1.2 * (x[0] - 1.0), x[1], x[2] + 0.1) : x;
    }
  st.set_positions(y);
  return {m, std::move(st)};
}

std::vector<bool> pass_vector(const AdmissibilityReport &r) {
  std::vector<bool> out;
  for (const auto &rec : r.records)
    out.push_back(rec.pass);
  return out;
}

} // namespace

TEST(Admissibility, CrackFreePairPassesEverything) {
  auto m = std::make_shared<const BodyMesh>(load_mesh(data_path("cube6.mesh")));
  DeformationState st = cut_mesh(m, {});
  const auto rep = check_class(st, DiscreteVarifold{}, EnergyParams{});
  ASSERT_EQ(rep.records.size(), 8u);
  for (const auto &r : rep.records)
    EXPECT_TRUE(r.pass) << "item " << r.item << " " << r.location;
  EXPECT_TRUE(rep.pass());
  EXPECT_TRUE(std::isinf(rep.find("3")->margin));
}

TEST(Admissibility, SupBoundOnly) {
  auto m = std::make_shared<const BodyMesh>(load_mesh(data_path("cube6.mesh")));
  DeformationState st = cut_mesh(m, {});
  EnergyParams p;
  p.K = 1.5; // |y| reaches sqrt 3 at node 7
  const auto rep = check_class(st, DiscreteVarifold{}, p);
  for (const auto &r : rep.records)
    EXPECT_EQ(r.pass, r.item != "2") << "item " << r.item;
  EXPECT_EQ(rep.find("2")->location, "node 7");
  EXPECT_NEAR(rep.find("2")->margin, 1.5 - std::sqrt(3.0), 1e-15);
}

TEST(Admissibility, CoveredCrackPassesAndUncoveredFaceFlipsJumpItems) {
  auto sb = split_bar();
  const auto v = varifold_from_faces(*sb.mesh, sb.mesh->candidate_faces, 1);
  const auto full = check_class(sb.state, v, EnergyParams{});
  for (const auto &r : full.records)
    EXPECT_TRUE(r.pass) << "item " << r.item << " " << r.location;
  EXPECT_NEAR(full.find("3")->values.at("jump_area"), 1.0, 1e-14);

  std::vector<int> fewer(sb.mesh->candidate_faces.begin() + 1, sb.mesh->candidate_faces.end());
  const auto partial = check_class(sb.state, varifold_from_faces(*sb.mesh, fewer, 1), EnergyParams{});
  for (const auto &r : partial.records)
    EXPECT_EQ(r.pass, r.item != "3" && r.item != "8") << "item " << r.item;
  const std::string where = "face " + std::to_string(sb.mesh->candidate_faces.front());
  EXPECT_EQ(partial.find("3")->location, where);
  EXPECT_EQ(partial.find("8")->location, where);
}

TEST(Admissibility, MonotoneInJumpConstant) {
  auto sb = split_bar();
  const auto v = varifold_from_faces(*sb.mesh, sb.mesh->candidate_faces, 1);
  bool previous = false;
  for (double c : {0.5, 1.0, 1.5, 1.99, 2.0, 2.5, 4.0}) {
    EnergyParams p;
    p.C = c;
    const bool pass = check_class(sb.state, v, p).find("3")->pass;
    EXPECT_TRUE(pass || !previous) << "C = " << c;
    EXPECT_EQ(pass, c >= 2.0);
    previous = pass;
  }
  // Doubling the multiplicity halves the constant needed.
  EnergyParams p;
  p.C = 1.0;
  EXPECT_TRUE(check_class(sb.state, varifold_from_faces(*sb.mesh, sb.mesh->candidate_faces, 2), p).pass());
}

TEST(Admissibility, TriangleOrderDoesNotMatter) {
  auto sb = split_bar();
  auto faces = sb.mesh->candidate_faces;
  const auto base = check_class(sb.state, varifold_from_faces(*sb.mesh, faces, 1), EnergyParams{});
  std::mt19937_64 rng(5);
  for (int k = 0; k < 5; ++k) {
    std::shuffle(faces.begin(), faces.end(), rng);
    faces.pop_back();
    const auto a = check_class(sb.state, varifold_from_faces(*sb.mesh, faces, 1), EnergyParams{});
    std::shuffle(faces.begin(), faces.end(), rng);
    const auto b = check_class(sb.state, varifold_from_faces(*sb.mesh, faces, 1), EnergyParams{});
    EXPECT_EQ(pass_vector(a), pass_vector(b));
    for (std::size_t i = 0; i < a.records.size(); ++i)
      EXPECT_EQ(a.records[i].margin, b.records[i].margin);
    faces = sb.mesh->candidate_faces;
  }
  EXPECT_TRUE(base.pass());
}

TEST(Admissibility, CoverageByCoordinates) {
  // A surface built without face ids is matched to the mesh by vertex positions.
  auto sb = split_bar();
  const auto v = varifold_from_faces(*sb.mesh, sb.mesh->candidate_faces, 1);
  const auto anon = DiscreteVarifold::from_triangles(v.vertices, v.tris, v.theta);
  EXPECT_TRUE(check_class(sb.state, anon, EnergyParams{}).pass());
  // A surface away from the candidate plane is not a crack of this body.
  const auto off = surfaces::rigid_transform(anon, Mat3::Identity(), Vec3(0.25, 0, 0));
  const auto rep = check_class(sb.state, off, EnergyParams{});
  EXPECT_FALSE(rep.find("1")->pass);
}

TEST(Admissibility, DirichletAndOrientation) {
  auto m = std::make_shared<const BodyMesh>(load_mesh(data_path("cube6.mesh")));
  DeformationState st = cut_mesh(m, {});
  auto y = st.positions();
  y[0] += Vec3(1e-9, 0, 0);
  st.set_positions(y);
  EXPECT_FALSE(check_class(st, DiscreteVarifold{}, EnergyParams{}).find("2")->pass);

  DeformationState inv = cut_mesh(m, {});
  auto z = inv.positions();
  z[7] = Vec3(-0.5, -0.5, -0.5);
  inv.set_positions(z);
  const auto rep = check_class(inv, DiscreteVarifold{}, EnergyParams{});
  EXPECT_FALSE(rep.find("5")->pass);
  EXPECT_LT(rep.find("5")->margin, 0.0);
  EXPECT_EQ(rep.find("5")->location.rfind("element ", 0), 0u);
}
