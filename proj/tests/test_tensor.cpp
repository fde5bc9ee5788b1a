#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace fracvar;
using testing_support::random_matrix;

namespace {

double submatrix_det2(const Mat3 &g, int r0, int r1, int c0, int c1) {
  return g(r0, c0) * g(r1, c1) - g(r0, c1) * g(r1, c0);
}

} // namespace

TEST(Tensor, DeterminantMatchesLu) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 1000; ++k) {
    const Mat3 g = random_matrix(rng, 2.0);
    EXPECT_NEAR(det3(g), g.determinant(), 1e-12 * (1.0 + std::abs(g.determinant())));
  }
}

TEST(Tensor, CofactorTimesTransposeIsDeterminant) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 1000; ++k) {
    const Mat3 g = random_matrix(rng, 2.0);
    const Mat3 residual = g * cof3(g).transpose() - det3(g) * Mat3::Identity();
    EXPECT_LE(residual.cwiseAbs().maxCoeff(), 1e-12 * (1.0 + std::abs(det3(g))));
  }
}

TEST(Tensor, CofactorMatchesInverseFormula) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    const Mat3 g = Mat3::Identity() + random_matrix(rng, 0.3);
    const Mat3 oracle = g.determinant() * g.inverse().transpose();
    EXPECT_LE((cof3(g) - oracle).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Tensor, MinorTableEntries) {
  std::mt19937_64 rng(4);
  const Mat3 g = random_matrix(rng);
  const MinorTable t = minors(g);
  EXPECT_EQ(t.order0(), 1.0);
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i)
      EXPECT_EQ(t.order1(j, i), g(j, i));
  // Unsigned 2x2 minors, with the checkerboard sign applied.
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      int rows[2], cols[2], nr = 0, nc = 0;
      for (int k = 0; k < 3; ++k) {
        if (k != a)
          rows[nr++] = k;
        if (k != b)
          cols[nc++] = k;
      }
      const double sign = (a + b) % 2 ? -1.0 : 1.0;
      EXPECT_NEAR(t.order2(a, b), sign * submatrix_det2(g, rows[0], rows[1], cols[0], cols[1]), 1e-15);
    }
  EXPECT_NEAR(t.order3(), g.determinant(), 1e-14);
  EXPECT_EQ(MinorTable::label(0), "M0");
  EXPECT_EQ(MinorTable::label(19), "det");
}

TEST(Tensor, GraphJacobianCauchyBinet) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 1000; ++k) {
    const Mat3 g = random_matrix(rng, 2.0);
    const double oracle = (Mat3::Identity() + g.transpose() * g).determinant();
    const double j = graph_jacobian(g);
    EXPECT_NEAR(j * j, oracle, 1e-10 * oracle);
  }
}

TEST(Tensor, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(6);
  const double h = 1e-6;
  for (int k = 0; k < 50; ++k) {
    const Mat3 g = random_matrix(rng), dir = random_matrix(rng), l = random_matrix(rng);
    const Mat3 fd_cof = (cof3(g + h * dir) - cof3(g - h * dir)) / (2 * h);
    EXPECT_LE((fd_cof - d_cof(g, dir)).cwiseAbs().maxCoeff(), 1e-8);
    // cof(G + tH) = cof G + t d_cof(G, H) + t² cof H holds exactly.
    EXPECT_LE((cof3(g + dir) - cof3(g) - d_cof(g, dir) - cof3(dir)).cwiseAbs().maxCoeff(), 1e-13);
    const double fd_det = (det3(g + h * dir) - det3(g - h * dir)) / (2 * h);
    EXPECT_NEAR(fd_det, d_det(g).cwiseProduct(dir).sum(), 1e-8);
    const double fd_adj = (l.cwiseProduct(cof3(g + h * dir)).sum() - l.cwiseProduct(cof3(g - h * dir)).sum()) / (2 * h);
    EXPECT_NEAR(fd_adj, cof_adjoint(g, l).cwiseProduct(dir).sum(), 1e-8);
  }
}

TEST(Tensor, ThirdOrderTensorAlgebra) {
  Tensor3 a = zero_tensor3(), b = zero_tensor3();
  a[0](0, 0) = 3.0;
  a[2](1, 2) = 4.0;
  b[2](1, 2) = 2.0;
  EXPECT_DOUBLE_EQ(norm(a), 5.0);
  EXPECT_DOUBLE_EQ(inner(a, b), 8.0);
  EXPECT_DOUBLE_EQ(squared_norm(a + b), 9.0 + 36.0);
  EXPECT_DOUBLE_EQ(norm(2.0 * a), 10.0);
}
