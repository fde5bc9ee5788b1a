#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

namespace fracvar {

/// 3x3 matrix G(j, i): row j is the ambient index, column i the reference index.
using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

/// Third-order tensor stored as three matrices; T[k](a, b).
/// For minor-field gradients T[k] is the derivative along reference axis k.
using Tensor3 = std::array<Mat3, 3>;

inline Tensor3 zero_tensor3() {
  return {Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
}

inline double squared_norm(const Tensor3 &t) {
  return t[0].squaredNorm() + t[1].squaredNorm() + t[2].squaredNorm();
}

/// Frobenius norm over all 27 components.
inline double norm(const Tensor3 &t) { return std::sqrt(squared_norm(t)); }

inline Tensor3 operator+(const Tensor3 &a, const Tensor3 &b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

inline Tensor3 operator*(double s, const Tensor3 &a) {
  return {s * a[0], s * a[1], s * a[2]};
}

inline double inner(const Tensor3 &a, const Tensor3 &b) {
  return a[0].cwiseProduct(b[0]).sum() + a[1].cwiseProduct(b[1]).sum() +
         a[2].cwiseProduct(b[2]).sum();
}

/// Determinant by cofactor expansion along the first row.
inline double det3(const Mat3 &g) {
  return g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1)) -
         g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0)) +
         g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0));
}

/// Signed 2x2 minors. Cyclic index shifts carry the (-1)^(a+b) sign, so
/// G * cof(G)^T = det(G) I.
inline Mat3 cof3(const Mat3 &g) {
  Mat3 c;
  for (int a = 0; a < 3; ++a) {
    const int a1 = (a + 1) % 3, a2 = (a + 2) % 3;
    for (int b = 0; b < 3; ++b) {
      const int b1 = (b + 1) % 3, b2 = (b + 2) % 3;
      c(a, b) = g(a1, b1) * g(a2, b2) - g(a1, b2) * g(a2, b1);
    }
  }
  return c;
}

/// All 20 minors of a 3x3 matrix in a fixed order:
///   [0]       order 0, always 1
///   [1..9]    order 1, G(j, i) with j major
///   [10..18]  order 2, cof(G)(a, b) with a major
///   [19]      order 3, det(G)
struct MinorTable {
  static constexpr std::size_t size = 20;
  std::array<double, size> values{};

  double order0() const { return values[0]; }
  double order1(int j, int i) const { return values[1 + 3 * j + i]; }
  double order2(int a, int b) const { return values[10 + 3 * a + b]; }
  double order3() const { return values[19]; }

  /// Stable label used when the table is serialized.
  static std::string label(std::size_t k) {
    if (k == 0)
      return "M0";
    if (k < 10)
      return "G" + std::to_string((k - 1) / 3) + std::to_string((k - 1) % 3);
    if (k < 19)
      return "cof" + std::to_string((k - 10) / 3) + std::to_string((k - 10) % 3);
    return "det";
  }
};

inline MinorTable minors(const Mat3 &g) {
  MinorTable t;
  t.values[0] = 1.0;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i)
      t.values[1 + 3 * j + i] = g(j, i);
  const Mat3 c = cof3(g);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      t.values[10 + 3 * a + b] = c(a, b);
  t.values[19] = det3(g);
  return t;
}

/// |M(G)|: Euclidean norm of the full minor vector.
inline double graph_jacobian(const Mat3 &g) {
  const MinorTable t = minors(g);
  double s = 0.0;
  for (double v : t.values)
    s += v * v;
  return std::sqrt(s);
}

/// d det / dG = cof(G).
inline Mat3 d_det(const Mat3 &g) { return cof3(g); }

/// Directional derivative of cof at G along H. cof is quadratic, so this is
/// the symmetric bilinear part: cof(G + tH) = cof(G) + t d_cof(G, H) + t^2 cof(H).
inline Mat3 d_cof(const Mat3 &g, const Mat3 &h) {
  Mat3 c;
  for (int a = 0; a < 3; ++a) {
    const int a1 = (a + 1) % 3, a2 = (a + 2) % 3;
    for (int b = 0; b < 3; ++b) {
      const int b1 = (b + 1) % 3, b2 = (b + 2) % 3;
      c(a, b) = g(a1, b1) * h(a2, b2) + h(a1, b1) * g(a2, b2) -
                g(a1, b2) * h(a2, b1) - h(a1, b2) * g(a2, b1);
    }
  }
  return c;
}

/// Gradient w.r.t. G of <L, cof(G)>, i.e. the adjoint of d_cof(G, .).
inline Mat3 cof_adjoint(const Mat3 &g, const Mat3 &l) {
  Mat3 out;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) {
      Mat3 e = Mat3::Zero();
      e(j, i) = 1.0;
      out(j, i) = l.cwiseProduct(d_cof(g, e)).sum();
    }
  return out;
}

} // namespace fracvar
