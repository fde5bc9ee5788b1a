#pragma once

#include "fracvar/errors.hpp"
#include "fracvar/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fracvar {

/// Constants of the admissible class and of the crack energy.
struct EnergyParams {
  double c = 1.0;  ///< coercivity constant
  double p = 3.0;
  double q = 2.0;
  double r = 2.0;
  double s = 1.0;
  double p_bar = 2.0; ///< curvature exponent
  double a_bar = 1.0; ///< area coefficient
  double a1 = 1.0;    ///< curvature coefficient
  double a2 = 1.0;    ///< boundary coefficient
  double K = 10.0;    ///< sup-norm bound on the deformation
  double C = 2.0;     ///< jump-containment constant

  /// Human-readable list of violated invariants; empty when valid.
  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    auto need = [&](bool ok, const char *what) {
      if (!ok)
        out.emplace_back(what);
    };
    need(p > 2.0, "p > 2");
    need(p > 1.0 && q >= p / (p - 1.0), "q >= p/(p-1)");
    need(r > 1.0, "r > 1");
    need(s > 0.0, "s > 0");
    need(p_bar > 1.0, "p_bar > 1");
    need(c > 0.0, "c > 0");
    need(a_bar > 0.0, "a_bar > 0");
    need(a1 > 0.0, "a1 > 0");
    need(a2 > 0.0, "a2 > 0");
    need(K > 0.0, "K > 0");
    need(C > 0.0, "C > 0");
    return out;
  }

  void validate() const {
    const auto v = violations();
    if (!v.empty()) {
      std::string msg = "invalid energy parameters:";
      for (const auto &s : v)
        msg += " [" + s + "]";
      throw ValueError(msg);
    }
  }
};

enum class DensityFamily {
  Reference,          ///< c(|G|^p + |cof G|^q + det^r + det^-s + |D1|^q + |D2|^r)
  ReferenceQuadratic, ///< Reference + kappa (|D1|^2 + |D2|^2), kappa >= 0
  ConcaveTest,        ///< Reference - kappa |D1|^2; deliberately not convex in D1 for kappa > c
};

inline std::string to_string(DensityFamily f) {
  switch (f) {
  case DensityFamily::Reference:
    return "reference";
  case DensityFamily::ReferenceQuadratic:
    return "reference_quadratic";
  case DensityFamily::ConcaveTest:
    return "concave_test";
  }
  return "unknown";
}

inline DensityFamily density_family_from_string(const std::string &s) {
  if (s == "reference")
    return DensityFamily::Reference;
  if (s == "reference_quadratic")
    return DensityFamily::ReferenceQuadratic;
  if (s == "concave_test")
    return DensityFamily::ConcaveTest;
  throw ValueError("unknown density family '" + s + "'");
}

/// Built-in stored-energy density W(G, D1, D2) with its own parameters.
struct DensitySpec {
  DensityFamily family = DensityFamily::Reference;
  double c = 1.0;
  double p = 3.0;
  double q = 2.0;
  double r = 2.0;
  double s = 1.0;
  double kappa = 0.0;

  static DensitySpec reference(double c, double p, double q, double r, double s) {
    return DensitySpec{DensityFamily::Reference, c, p, q, r, s, 0.0};
  }

  /// Report label. The reference family is the minimal representative of the
  /// coercivity class, and reports say so.
  std::string label() const {
    std::ostringstream os;
    os << to_string(family);
    if (family == DensityFamily::Reference)
      os << " (minimal coercive representative)";
    return os.str();
  }
};

namespace detail {

inline double pow_norm(double norm_value, double exponent) {
  return norm_value == 0.0 ? 0.0 : std::pow(norm_value, exponent);
}

/// d/dX |X|^e = e |X|^(e-2) X, returned as the scalar factor e |X|^(e-2).
/// Exponents here are > 1, so the gradient is zero at X = 0.
inline double pow_norm_factor(double norm_value, double exponent) {
  return norm_value == 0.0 ? 0.0 : exponent * std::pow(norm_value, exponent - 2.0);
}

} // namespace detail

/// c (|G|^p + |cof G|^q + (det G)^r + (det G)^-s + |D1|^q + |D2|^r) for det G > 0.
/// Shared by the reference density and the coercivity verifier, so the two agree bit for bit.
inline double coercivity_bound(double c, double p, double q, double r, double s, const Mat3 &g,
                               const Tensor3 &d1, const Vec3 &d2) {
  const double det = det3(g);
  const double sum = detail::pow_norm(g.norm(), p) + detail::pow_norm(cof3(g).norm(), q) +
                     std::pow(det, r) + std::pow(det, -s) + detail::pow_norm(norm(d1), q) +
                     detail::pow_norm(d2.norm(), r);
  return c * sum;
}

/// Ŵ(G, D1, D2). Returns +inf exactly when det G <= 0.
inline double eval_density(const DensitySpec &spec, const Mat3 &g, const Tensor3 &d1,
                           const Vec3 &d2) {
  if (!(det3(g) > 0.0))
    return std::numeric_limits<double>::infinity();
  const double base = coercivity_bound(spec.c, spec.p, spec.q, spec.r, spec.s, g, d1, d2);
  switch (spec.family) {
  case DensityFamily::Reference:
    return base;
  case DensityFamily::ReferenceQuadratic:
    return base + spec.kappa * (squared_norm(d1) + d2.squaredNorm());
  case DensityFamily::ConcaveTest:
    return base - spec.kappa * squared_norm(d1);
  }
  return base;
}

struct DensityGradient {
  Mat3 dG;
  Tensor3 dD1;
  Vec3 dD2;
};

/// Partial derivatives of Ŵ. Throws DomainError on det G <= 0.
inline DensityGradient grad_density(const DensitySpec &spec, const Mat3 &g, const Tensor3 &d1,
                                    const Vec3 &d2) {
  const double det = det3(g);
  if (!(det > 0.0))
    throw DomainError("density gradient requested at det G <= 0");
  const Mat3 cof = cof3(g);
  using detail::pow_norm_factor;

  DensityGradient out;
  out.dG = pow_norm_factor(g.norm(), spec.p) * g +
           pow_norm_factor(cof.norm(), spec.q) * cof_adjoint(g, cof) +
           (spec.r * std::pow(det, spec.r - 1.0) - spec.s * std::pow(det, -spec.s - 1.0)) * cof;
  out.dG *= spec.c;
  out.dD1 = (spec.c * pow_norm_factor(norm(d1), spec.q)) * d1;
  out.dD2 = (spec.c * pow_norm_factor(d2.norm(), spec.r)) * d2;

  switch (spec.family) {
  case DensityFamily::Reference:
    break;
  case DensityFamily::ReferenceQuadratic:
    out.dD1 = out.dD1 + (2.0 * spec.kappa) * d1;
    out.dD2 += 2.0 * spec.kappa * d2;
    break;
  case DensityFamily::ConcaveTest:
    out.dD1 = out.dD1 + (-2.0 * spec.kappa) * d1;
    break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structural verifiers

/// One pass/fail record with a numeric margin (positive = satisfied with room).
struct CheckRecord {
  std::string name;
  bool pass = true;
  double margin = 0.0;
  std::string detail;
  std::optional<std::size_t> sample; ///< offending sample index, if any
  std::vector<double> witness;       ///< flattened counterexample point, if any
};

struct CheckReport {
  std::vector<CheckRecord> records;

  bool pass() const {
    for (const auto &r : records)
      if (!r.pass)
        return false;
    return true;
  }
};

inline CheckReport verify_exponents(const EnergyParams &params) {
  CheckReport rep;
  const double p = params.p, q = params.q, r = params.r, s = params.s;
  rep.records.push_back({"p > 2", p > 2.0, p - 2.0, "", {}, {}});
  const double q_min = p > 1.0 ? p / (p - 1.0) : std::numeric_limits<double>::infinity();
  rep.records.push_back({"q >= p/(p-1)", q >= q_min, q - q_min,
                         "p/(p-1) = " + std::to_string(q_min), {}, {}});
  rep.records.push_back({"r > 1", r > 1.0, r - 1.0, "", {}, {}});
  rep.records.push_back({"s > 0", s > 0.0, s, "", {}, {}});
  return rep;
}

/// Sampling used by the verifiers: G = I + U with U_ij ~ U[-0.4, 0.4], resampled
/// until det G > 0.05; D1, D2 entries ~ U[-1, 1].
class DensitySampler {
public:
  explicit DensitySampler(std::uint64_t seed) : rng_(seed) {}

  Mat3 sample_g() {
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    for (;;) {
      Mat3 g = Mat3::Identity();
      for (int k = 0; k < 9; ++k)
        g(k / 3, k % 3) += u(rng_);
      if (det3(g) > 0.05)
        return g;
    }
  }

  Tensor3 sample_d1() {
    Tensor3 t;
    for (auto &m : t)
      for (int k = 0; k < 9; ++k)
        m(k / 3, k % 3) = unit_(rng_);
    return t;
  }

  Vec3 sample_d2() { return Vec3(unit_(rng_), unit_(rng_), unit_(rng_)); }

private:
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unit_{-1.0, 1.0};
};

namespace detail {

inline void append(std::vector<double> &w, const Mat3 &m) {
  for (int k = 0; k < 9; ++k)
    w.push_back(m(k / 3, k % 3));
}
inline void append(std::vector<double> &w, const Tensor3 &t) {
  for (const auto &m : t)
    append(w, m);
}
inline void append(std::vector<double> &w, const Vec3 &v) {
  w.insert(w.end(), {v[0], v[1], v[2]});
}

} // namespace detail

inline constexpr double kCoercivityTolerance = 1e-12;
inline constexpr double kConvexityTolerance = 1e-10;

/// Minimum over samples of Ŵ minus the coercivity lower bound built from `params`.
inline CheckReport verify_coercivity(const DensitySpec &spec, const EnergyParams &params,
                                     std::size_t n_samples, std::uint64_t seed) {
  DensitySampler sampler(seed);
  double worst = std::numeric_limits<double>::infinity();
  std::size_t worst_i = 0;
  std::vector<double> witness;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Mat3 g = sampler.sample_g();
    const Tensor3 d1 = sampler.sample_d1();
    const Vec3 d2 = sampler.sample_d2();
    const double w = eval_density(spec, g, d1, d2);
    const double bound = coercivity_bound(params.c, params.p, params.q, params.r, params.s, g, d1, d2);
    const double residual = w - bound;
    if (residual < worst) {
      worst = residual;
      worst_i = i;
      witness.clear();
      detail::append(witness, g);
      detail::append(witness, d1);
      detail::append(witness, d2);
    }
  }
  CheckRecord rec{"coercivity", true, 0.0, "", {}, {}};
  if (n_samples == 0) {
    rec.detail = "no samples";
  } else {
    rec.margin = worst;
    rec.pass = worst >= -kCoercivityTolerance;
    rec.detail = "min residual over " + std::to_string(n_samples) + " samples";
    if (!rec.pass) {
      rec.sample = worst_i;
      rec.witness = std::move(witness);
    }
  }
  return {{rec}};
}

/// ½Ŵ(G,a) + ½Ŵ(G,b) − Ŵ(G,(a+b)/2); negative means a convexity violation.
inline double midpoint_defect(const DensitySpec &spec, const Mat3 &g, const Tensor3 &d1a,
                              const Vec3 &d2a, const Tensor3 &d1b, const Vec3 &d2b) {
  const Tensor3 d1m = 0.5 * (d1a + d1b);
  const Vec3 d2m = 0.5 * (d2a + d2b);
  return 0.5 * eval_density(spec, g, d1a, d2a) + 0.5 * eval_density(spec, g, d1b, d2b) -
         eval_density(spec, g, d1m, d2m);
}

/// Midpoint convexity of Ŵ(G, ., .) on sampled pairs.
inline CheckReport verify_delta_convexity(const DensitySpec &spec, std::size_t n_samples,
                                          std::uint64_t seed) {
  DensitySampler sampler(seed);
  double worst = std::numeric_limits<double>::infinity();
  std::size_t worst_i = 0;
  std::vector<double> witness;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Mat3 g = sampler.sample_g();
    const Tensor3 d1a = sampler.sample_d1();
    const Vec3 d2a = sampler.sample_d2();
    const Tensor3 d1b = sampler.sample_d1();
    const Vec3 d2b = sampler.sample_d2();
    const double defect = midpoint_defect(spec, g, d1a, d2a, d1b, d2b);
    if (defect < worst) {
      worst = defect;
      worst_i = i;
      witness.clear();
      detail::append(witness, g);
      detail::append(witness, d1a);
      detail::append(witness, d2a);
      detail::append(witness, d1b);
      detail::append(witness, d2b);
    }
  }
  CheckRecord rec{"delta-convexity", true, 0.0, "", {}, {}};
  if (n_samples == 0) {
    rec.detail = "no samples";
  } else {
    rec.margin = worst;
    rec.pass = worst >= -kConvexityTolerance;
    rec.detail = "min midpoint defect over " + std::to_string(n_samples) + " samples";
    if (!rec.pass) {
      rec.sample = worst_i;
      rec.witness = std::move(witness);
    }
  }
  return {{rec}};
}

} // namespace fracvar
