#pragma once

#include "fracvar/deformation.hpp"
#include "fracvar/errors.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace fracvar {

struct NoninterpenetrationOptions {
  int resolution = 128;          ///< voxels per axis over the deformed bounding box
  std::size_t samples = 8;       ///< random bump functions for the sampled test
  std::uint64_t seed = 0;
  std::size_t max_voxels = std::size_t(1) << 25;
};

struct NoninterpenetrationRecord {
  bool pass = true;
  // Volume test: ∫ det ∇y <= |y(B)|
  bool volume_pass = true;
  double integral_det = 0.0;
  double image_volume = 0.0;
  double deficit = 0.0; ///< integral_det - image_volume
  double tolerance = 0.0;
  // Sampled test: ∫ f(y) det ∇y <= ∫ sup_x f
  bool sampled_pass = true;
  double sampled_worst_margin = 0.0;
  std::size_t sampled_worst = 0;
  int resolution = 0;
};

/// Occupancy counts of the deformed body on a voxel grid over its bounding box.
class VoxelImage {
public:
  VoxelImage(const DeformationState &st, int resolution, std::size_t max_voxels) : res_(resolution) {
    const std::size_t n = std::size_t(resolution) * resolution * resolution;
    if (resolution <= 0 || n > max_voxels)
      throw ResolutionError("voxel grid of " + std::to_string(resolution) + "^3 exceeds the cap of " +
                            std::to_string(max_voxels) + " voxels");
    const auto &y = st.positions();
    lo_ = hi_ = y.front();
    for (const auto &p : y) {
      lo_ = lo_.cwiseMin(p);
      hi_ = hi_.cwiseMax(p);
    }
    h_ = (hi_ - lo_) / resolution;
    count_.assign(n, 0);
    // Sample points are shifted off the voxel centres by an irrational fraction so
    // they do not land on the faces of structured meshes.
    jitter_ = 1e-6 * Vec3(std::numbers::sqrt2 - 1.0, std::numbers::sqrt3 - 1.0, std::numbers::pi - 3.0);

    for (const auto &t : st.tets) {
      const Vec3 &a = y[t[0]];
      Mat3 m;
      for (int k = 0; k < 3; ++k)
        m.col(k) = y[t[k + 1]] - a;
      const Mat3 minv = m.inverse();
      Vec3 blo = a, bhi = a;
      for (int k = 1; k < 4; ++k) {
        blo = blo.cwiseMin(y[t[k]]);
        bhi = bhi.cwiseMax(y[t[k]]);
      }
      std::array<int, 3> i0{}, i1{};
      for (int d = 0; d < 3; ++d) {
        i0[d] = std::max(0, static_cast<int>(std::floor((blo[d] - lo_[d]) / h_[d])) - 1);
        i1[d] = std::min(res_ - 1, static_cast<int>(std::ceil((bhi[d] - lo_[d]) / h_[d])) + 1);
      }
      for (int k = i0[2]; k <= i1[2]; ++k)
        for (int j = i0[1]; j <= i1[1]; ++j)
          for (int i = i0[0]; i <= i1[0]; ++i) {
            const Vec3 b = minv * (point(i, j, k) - a);
            if (b[0] >= 0.0 && b[1] >= 0.0 && b[2] >= 0.0 && b.sum() <= 1.0)
              ++count_[index(i, j, k)];
          }
    }
  }

  Vec3 point(int i, int j, int k) const {
    return lo_ + Vec3((i + 0.5 + jitter_[0]) * h_[0], (j + 0.5 + jitter_[1]) * h_[1], (k + 0.5 + jitter_[2]) * h_[2]);
  }
  std::size_t index(int i, int j, int k) const { return (std::size_t(k) * res_ + j) * res_ + i; }
  int resolution() const { return res_; }
  double voxel_volume() const { return h_.prod(); }
  double voxel_diagonal() const { return h_.norm(); }
  std::uint16_t count(int i, int j, int k) const { return count_[index(i, j, k)]; }

  double covered_volume() const {
    std::size_t c = 0;
    for (auto n : count_)
      c += n > 0;
    return double(c) * voxel_volume();
  }

  /// Σ f(z) N(z) |voxel| = ∫ f(y(x)) det ∇y dx by the area formula.
  template <class F> double pushforward_integral(F &&f) const {
    double s = 0.0;
    for (int k = 0; k < res_; ++k)
      for (int j = 0; j < res_; ++j)
        for (int i = 0; i < res_; ++i) {
          const auto n = count(i, j, k);
          if (n)
            s += n * f(point(i, j, k));
        }
    return s * voxel_volume();
  }

private:
  int res_;
  Vec3 lo_, hi_, h_, jitter_;
  std::vector<std::uint16_t> count_;
};

/// Area of the deformed boundary (faces used by exactly one element, in state ids).
inline double deformed_surface_area(const DeformationState &st) {
  std::map<Tri, int> faces;
  for (const auto &t : st.tets)
    for (const auto &lf : kTetFaces)
      ++faces[sorted_tri({t[lf[0]], t[lf[1]], t[lf[2]]})];
  const auto &y = st.positions();
  double a = 0.0;
  for (const auto &[tri, n] : faces)
    if (n == 1)
      a += triangle_area(y[tri[0]], y[tri[1]], y[tri[2]]);
  return a;
}

namespace detail {

/// Smooth bump exp(1 - 1/(1 - r²/ρ²)), maximum 1 at the centre.
inline double unit_bump(double r, double radius) {
  const double u = (r * r) / (radius * radius);
  return u >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - u));
}

/// ∫_{R³} bump = 4π ρ³ ∫_0^1 exp(1 - 1/(1-t²)) t² dt (composite Simpson).
inline double bump_integral(double radius) {
  constexpr int n = 4000;
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double t = double(k) / n;
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    s += w * unit_bump(t, 1.0) * t * t;
  }
  s *= 1.0 / (3.0 * n);
  return 4.0 * std::numbers::pi * radius * radius * radius * s;
}

} // namespace detail

/// Volume test and sampled test of the non-interpenetration inequality.
/// Rasterization tolerance: 2 · voxel diagonal · deformed surface area.
inline NoninterpenetrationRecord check_noninterpenetration(const DeformationState &st,
                                                           const NoninterpenetrationOptions &opt = {}) {
  for (double d : st.fields().det)
    if (!(d > 0.0))
      throw DomainError("non-interpenetration check requires det > 0 on every element");
  const VoxelImage img(st, opt.resolution, opt.max_voxels);
  NoninterpenetrationRecord rec;
  rec.resolution = opt.resolution;
  std::vector<double> parts(st.tets.size());
  for (std::size_t e = 0; e < parts.size(); ++e)
    parts[e] = st.mesh->volumes[e] * st.fields().det[e];
  rec.integral_det = pairwise_sum(parts);
  rec.image_volume = img.covered_volume();
  rec.deficit = rec.integral_det - rec.image_volume;
  rec.tolerance = 2.0 * img.voxel_diagonal() * deformed_surface_area(st);
  rec.volume_pass = rec.deficit <= rec.tolerance;

  // f(x, z) = bump(z), so sup_x f = bump and the right-hand side is analytic.
  const auto &y = st.positions();
  Vec3 lo = y.front(), hi = y.front();
  for (const auto &p : y) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diag = (hi - lo).norm();
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  rec.sampled_worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < opt.samples; ++s) {
    const Vec3 c = lo + Vec3(unit(rng), unit(rng), unit(rng)).cwiseProduct(hi - lo);
    const double radius = (0.1 + 0.4 * unit(rng)) * diag;
    const double lhs = img.pushforward_integral([&](const Vec3 &z) { return detail::unit_bump((z - c).norm(), radius); });
    const double rhs = detail::bump_integral(radius);
    const double margin = rhs + rec.tolerance - lhs;
    if (margin < rec.sampled_worst_margin) {
      rec.sampled_worst_margin = margin;
      rec.sampled_worst = s;
    }
  }
  rec.sampled_pass = rec.sampled_worst_margin >= 0.0;
  rec.pass = rec.volume_pass && rec.sampled_pass;
  return rec;
}

} // namespace fracvar
