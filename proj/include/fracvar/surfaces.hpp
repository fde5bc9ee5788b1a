#pragma once

#include "fracvar/varifold.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <vector>

namespace fracvar::surfaces {

/// Unit square [0,1]² at z = 0 split into two triangles.
inline DiscreteVarifold unit_square(int theta = 1) {
  std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  return DiscreteVarifold::from_triangles(std::move(v), {{0, 1, 2}, {0, 2, 3}}, {theta, theta});
}

/// Square [0,s]² at z = 0 on an n×n grid.
inline DiscreteVarifold square_grid(double side, int n, int theta = 1) {
  std::vector<Vec3> v;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      v.emplace_back(side * i / n, side * j / n, 0.0);
  std::vector<Tri> t;
  auto id = [&](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  std::vector<int> th(t.size(), theta);
  return DiscreteVarifold::from_triangles(std::move(v), std::move(t), std::move(th));
}

/// Icosahedron refined `level` times with vertices projected to the sphere:
/// 20 · 4^level triangles.
inline DiscreteVarifold icosphere(double radius, int level, const Vec3 &center = Vec3::Zero()) {
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v{{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
                      {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
  for (auto &x : v)
    x.normalize();
  std::vector<Tri> t{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                     {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                     {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end())
        return it->second;
      v.push_back((v[a] + v[b]).normalized());
      return mid[key] = static_cast<int>(v.size()) - 1;
    };
    std::vector<Tri> next;
    for (const auto &f : t) {
      const int ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    t = std::move(next);
  }
  for (auto &x : v)
    x = center + radius * x;
  std::vector<int> th(t.size(), 1);
  return DiscreteVarifold::from_triangles(std::move(v), std::move(t), std::move(th));
}

/// Flat disc of given radius at z = 0 with `rings` concentric rings
/// (ring k has 6k vertices): 6 · rings² triangles.
inline DiscreteVarifold disc(double radius, int rings) {
  std::vector<Vec3> v{{0, 0, 0}};
  std::vector<int> ring_start{0};
  for (int k = 1; k <= rings; ++k) {
    ring_start.push_back(static_cast<int>(v.size()));
    const int n = 6 * k;
    for (int s = 0; s < n; ++s) {
      const double a = 2.0 * std::numbers::pi * s / n;
      v.emplace_back(radius * k / rings * std::cos(a), radius * k / rings * std::sin(a), 0.0);
    }
  }
  std::vector<Tri> t;
  for (int k = 1; k <= rings; ++k) {
    const int n_out = 6 * k, n_in = 6 * (k - 1);
    auto outer = [&](int s) { return ring_start[k] + (s % n_out); };
    auto inner = [&](int s) { return k == 1 ? 0 : ring_start[k - 1] + (s % n_in); };
    // Walk both rings by angle, always advancing the one that lags.
    int i = 0, o = 0;
    while (i < n_in || o < n_out) {
      const double ao = double(o + 1) / n_out;
      const double ai = n_in > 0 ? double(i + 1) / n_in : 2.0;
      if (i >= n_in || (o < n_out && ao <= ai)) {
        t.push_back({inner(i), outer(o), outer(o + 1)});
        ++o;
      } else {
        t.push_back({inner(i), outer(o), inner(i + 1)});
        ++i;
      }
    }
  }
  std::vector<int> th(t.size(), 1);
  return DiscreteVarifold::from_triangles(std::move(v), std::move(t), std::move(th));
}

/// Open cylinder around the z axis, n_theta sectors, n_z layers.
inline DiscreteVarifold cylinder(double radius, double height, int n_theta, int n_z) {
  std::vector<Vec3> v;
  for (int k = 0; k <= n_z; ++k)
    for (int s = 0; s < n_theta; ++s) {
      const double a = 2.0 * std::numbers::pi * s / n_theta;
      v.emplace_back(radius * std::cos(a), radius * std::sin(a), height * k / n_z);
    }
  auto id = [&](int s, int k) { return k * n_theta + (s % n_theta); };
  std::vector<Tri> t;
  for (int k = 0; k < n_z; ++k)
    for (int s = 0; s < n_theta; ++s) {
      t.push_back({id(s, k), id(s + 1, k), id(s + 1, k + 1)});
      t.push_back({id(s, k), id(s + 1, k + 1), id(s, k + 1)});
    }
  std::vector<int> th(t.size(), 1);
  return DiscreteVarifold::from_triangles(std::move(v), std::move(t), std::move(th));
}

/// Apply x -> R x + b to every vertex.
inline DiscreteVarifold rigid_transform(const DiscreteVarifold &s, const Mat3 &rot, const Vec3 &shift) {
  auto v = s.vertices;
  for (auto &x : v)
    x = rot * x + shift;
  return DiscreteVarifold::from_triangles(std::move(v), s.tris, s.theta, s.source_face);
}

} // namespace fracvar::surfaces
