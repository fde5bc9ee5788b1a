#pragma once

#include "fracvar/admissibility.hpp"
#include "fracvar/deformation.hpp"
#include "fracvar/density.hpp"
#include "fracvar/errors.hpp"
#include "fracvar/noninterpenetration.hpp"
#include "fracvar/varifold.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fracvar {

enum class CandidateStrategy { EnumerateConnected, GreedyGrowth };

inline std::string to_string(CandidateStrategy s) {
  return s == CandidateStrategy::EnumerateConnected ? "enumerate-connected-subsurfaces" : "greedy-growth";
}

inline CandidateStrategy candidate_strategy_from_string(const std::string &s) {
  if (s == "enumerate-connected-subsurfaces" || s == "enumerate")
    return CandidateStrategy::EnumerateConnected;
  if (s == "greedy-growth" || s == "greedy")
    return CandidateStrategy::GreedyGrowth;
  throw ValueError("unknown candidate strategy '" + s + "'");
}

struct MinimizerConfig {
  std::size_t max_candidates = 64;
  std::size_t inner_max_iterations = 2000;
  double gradient_tolerance = 1e-8; ///< relative: stop when |Pg| <= tol (1 + |E|)
  double backtrack_factor = 0.5;
  std::size_t max_halvings = 60;
  double initial_step = 1e-3;
  CandidateStrategy strategy = CandidateStrategy::EnumerateConnected;
  std::uint64_t seed = 0;
  bool noninterpenetration = true;
  int voxel_resolution = 128;
  std::size_t noninterpenetration_samples = 8;
  unsigned threads = 1;

  void validate() const {
    if (!(gradient_tolerance > 0.0))
      throw ValueError("gradient_tolerance must be > 0");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
      throw ValueError("backtrack_factor must lie in (0, 1)");
    if (!(initial_step > 0.0))
      throw ValueError("initial_step must be > 0");
    if (max_candidates == 0)
      throw ValueError("max_candidates must be >= 1");
  }
};

struct InnerDiagnostics {
  std::size_t iterations = 0;
  bool converged = false;
  bool stalled = false; ///< no admissible step after max halvings; best-so-far kept
  double final_gradient_norm = 0.0;
  std::vector<double> energy_trace; ///< energy after each accepted step (entry 0 = start)
};

namespace detail {

/// Move `next` radially toward `prev` until |y| <= K.
inline Vec3 project_ball(const Vec3 &prev, const Vec3 &next, double K) {
  if (next.norm() <= K)
    return next;
  if (prev.norm() > K)
    return next * (K / next.norm());
  // |prev + t d| = K, largest root in [0, 1]
  const Vec3 d = next - prev;
  const double a = d.squaredNorm(), b = 2.0 * prev.dot(d), c = prev.squaredNorm() - K * K;
  const double t = (-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a);
  Vec3 out = prev + std::clamp(t, 0.0, 1.0) * d;
  if (out.norm() > K)
    out *= K / out.norm();
  return out;
}

inline double dot(const std::vector<Vec3> &a, const std::vector<Vec3> &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i].dot(b[i]);
  return s;
}

} // namespace detail

/// Projected gradient descent with backtracking on the free nodes of `st`.
/// Accepted steps strictly decrease the energy, keep det ∇y > 0 everywhere, and keep
/// every node inside the ball |y| <= K. Trial step lengths come from the
/// Barzilai–Borwein quotient of the previous step, starting from `initial_step`.
inline InnerDiagnostics minimize_deformation(DeformationState &st, const DensitySpec &spec,
                                             const EnergyParams &params, const MinimizerConfig &cfg,
                                             const std::function<void(const DeformationState &)> &on_step = {}) {
  InnerDiagnostics diag;
  double energy = bulk_energy(st, spec);
  diag.energy_trace.push_back(energy);
  if (!std::isfinite(energy)) {
    diag.stalled = true;
    diag.final_gradient_norm = std::numeric_limits<double>::infinity();
    return diag;
  }
  const double K = params.K;
  const double armijo = 1e-4;
  std::vector<Vec3> y = st.positions();
  std::vector<Vec3> g = bulk_gradient(st, spec);
  double step = cfg.initial_step;

  auto projected = [&](const std::vector<Vec3> &grad) {
    std::vector<Vec3> pg(grad.size(), Vec3::Zero());
    for (std::size_t v = 0; v < grad.size(); ++v) {
      if (st.fixed[v])
        continue;
      pg[v] = grad[v];
      const double n = y[v].norm();
      if (n >= K * (1.0 - 1e-12) && n > 0.0) {
        const Vec3 u = y[v] / n;
        const double outward = -pg[v].dot(u); // descent direction component along u
        if (outward > 0.0)
          pg[v] += outward * u;
      }
    }
    return pg;
  };

  for (;;) {
    const std::vector<Vec3> pg = projected(g);
    diag.final_gradient_norm = std::sqrt(detail::dot(pg, pg));
    if (diag.final_gradient_norm <= cfg.gradient_tolerance * (1.0 + std::abs(energy))) {
      diag.converged = true;
      break;
    }
    if (diag.iterations >= cfg.inner_max_iterations)
      break;

    bool accepted = false;
    double alpha = step;
    std::vector<Vec3> trial(y.size());
    double trial_energy = energy;
    for (std::size_t h = 0; h <= cfg.max_halvings; ++h, alpha *= cfg.backtrack_factor) {
      for (std::size_t v = 0; v < y.size(); ++v)
        trial[v] = st.fixed[v] ? y[v] : detail::project_ball(y[v], y[v] - alpha * pg[v], K);
      st.set_positions(trial);
      trial_energy = bulk_energy(st, spec);
      if (!std::isfinite(trial_energy))
        continue;
      double decrease = 0.0;
      for (std::size_t v = 0; v < y.size(); ++v)
        decrease += g[v].dot(trial[v] - y[v]);
      if (trial_energy < energy && trial_energy <= energy + armijo * decrease) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      st.set_positions(y);
      diag.stalled = true;
      break;
    }

    const std::vector<Vec3> g_new = bulk_gradient(st, spec);
    std::vector<Vec3> s(y.size()), dg(y.size());
    for (std::size_t v = 0; v < y.size(); ++v) {
      s[v] = trial[v] - y[v];
      dg[v] = g_new[v] - g[v];
    }
    const double sy = detail::dot(s, dg);
    step = sy > 0.0 ? detail::dot(s, s) / sy : 2.0 * alpha;
    step = std::clamp(step, 1e-14, 1e6);

    y = trial;
    g = g_new;
    energy = trial_energy;
    ++diag.iterations;
    diag.energy_trace.push_back(energy);
    if (on_step)
      on_step(st);
  }
  return diag;
}

struct InnerResult {
  DeformationState state;
  double bulk_energy;
  InnerDiagnostics diagnostics;
};

inline InnerResult minimize_deformation(std::shared_ptr<const BodyMesh> mesh, const std::vector<int> &active,
                                        const DensitySpec &spec, const EnergyParams &params,
                                        const MinimizerConfig &cfg) {
  DeformationState st = cut_mesh(std::move(mesh), active);
  auto d = minimize_deformation(st, spec, params, cfg);
  const double e = bulk_energy(st, spec);
  return {std::move(st), e, std::move(d)};
}

// ---------------------------------------------------------------------------
// Candidate crack sets

/// Candidate faces sharing an edge, as adjacency lists indexed like `mesh.candidate_faces`.
inline std::vector<std::vector<int>> candidate_adjacency(const BodyMesh &mesh) {
  const auto &c = mesh.candidate_faces;
  std::vector<std::vector<int>> adj(c.size());
  for (std::size_t a = 0; a < c.size(); ++a)
    for (std::size_t b = a + 1; b < c.size(); ++b) {
      const auto &fa = mesh.interior_faces[c[a]].nodes, &fb = mesh.interior_faces[c[b]].nodes;
      int shared = 0;
      for (int v : fa)
        shared += std::count(fb.begin(), fb.end(), v);
      if (shared == 2) {
        adj[a].push_back(static_cast<int>(b));
        adj[b].push_back(static_cast<int>(a));
      }
    }
  return adj;
}

/// ∅ followed by all edge-connected subsets of the candidate surface, by size and
/// then lexicographically, truncated to `limit` sets.
inline std::vector<std::vector<int>> enumerate_connected_subsets(const BodyMesh &mesh, std::size_t limit) {
  std::vector<std::vector<int>> out{{}};
  if (limit <= 1)
    return out;
  const auto adj = candidate_adjacency(mesh);
  const auto &c = mesh.candidate_faces;
  std::set<std::vector<int>> level;
  for (std::size_t a = 0; a < c.size(); ++a)
    level.insert({static_cast<int>(a)});
  while (!level.empty() && out.size() < limit) {
    for (const auto &s : level) {
      if (out.size() >= limit)
        break;
      std::vector<int> faces;
      for (int k : s)
        faces.push_back(c[k]);
      out.push_back(faces);
    }
    std::set<std::vector<int>> next;
    for (const auto &s : level)
      for (int k : s)
        for (int n : adj[k])
          if (!std::binary_search(s.begin(), s.end(), n)) {
            auto t = s;
            t.insert(std::upper_bound(t.begin(), t.end(), n), n);
            next.insert(std::move(t));
          }
    level = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Outer selection

struct CandidateRecord {
  std::size_t id = 0;
  std::vector<int> faces;
  int theta = 1;
  double bulk = 0.0;
  CrackEnergyBreakdown crack;
  double total = 0.0;
  InnerDiagnostics inner;
  AdmissibilityReport admissibility;
  std::optional<NoninterpenetrationRecord> noninterpenetration;
  bool admissible = false;
  std::vector<std::string> rejection_reasons;
  std::shared_ptr<const DeformationState> state;
  std::shared_ptr<const DiscreteVarifold> varifold;
};

struct MinimizationReport {
  std::vector<CandidateRecord> candidates;
  std::optional<std::size_t> selected; ///< index into candidates
  std::vector<std::vector<int>> generated; ///< output of the candidate generator

  const CandidateRecord &require_selection() const {
    if (!selected)
      throw NoFeasibleCandidate("no admissible crack candidate");
    return candidates[*selected];
  }
};

/// Minimal multiplicity satisfying θ >= 2/C.
inline int crack_multiplicity(const EnergyParams &params) {
  return std::max(1, static_cast<int>(std::ceil(2.0 / params.C - 1e-12)));
}

/// Evaluate one crack candidate: cut, warm start, inner solve, crack energy, admissibility.
inline CandidateRecord evaluate_candidate(std::shared_ptr<const BodyMesh> mesh, const std::vector<int> &faces,
                                          const DeformationState *warm, const DensitySpec &spec,
                                          const EnergyParams &params, const MinimizerConfig &cfg) {
  CandidateRecord rec;
  rec.faces = faces;
  rec.theta = crack_multiplicity(params);
  DeformationState st = cut_mesh(mesh, faces);
  if (warm)
    st.set_positions(transfer_positions(*warm, st));
  rec.inner = minimize_deformation(st, spec, params, cfg);
  rec.bulk = bulk_energy(st, spec);
  auto v = std::make_shared<DiscreteVarifold>(varifold_from_faces(*mesh, faces, rec.theta));
  rec.crack = crack_energy(*v, params);
  rec.total = rec.bulk + rec.crack.total;
  rec.admissibility = check_class(st, *v, params);
  for (const auto &r : rec.admissibility.records)
    if (!r.pass)
      rec.rejection_reasons.push_back("item (" + r.item + ") " + r.name + (r.location.empty() ? "" : " at " + r.location));
  if (!std::isfinite(rec.bulk))
    rec.rejection_reasons.push_back("infinite bulk energy");
  if (cfg.noninterpenetration && std::isfinite(rec.bulk)) {
    NoninterpenetrationOptions opt;
    opt.resolution = cfg.voxel_resolution;
    opt.samples = cfg.noninterpenetration_samples;
    opt.seed = cfg.seed;
    rec.noninterpenetration = check_noninterpenetration(st, opt);
    if (!rec.noninterpenetration->volume_pass)
      rec.rejection_reasons.push_back("non-interpenetration: volume test");
    if (!rec.noninterpenetration->sampled_pass)
      rec.rejection_reasons.push_back("non-interpenetration: sampled test");
  }
  rec.admissible = rec.rejection_reasons.empty();
  rec.state = std::make_shared<const DeformationState>(std::move(st));
  rec.varifold = std::move(v);
  return rec;
}

/// Admissible minimum of the total energy; ties go to the smaller crack mass, then
/// to the lexicographically smaller face set.
inline std::optional<std::size_t> select_candidate(const std::vector<CandidateRecord> &c) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!c[i].admissible)
      continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto &a = c[i], &b = c[*best];
    const double ma = a.varifold ? mass(*a.varifold) : 0.0, mb = b.varifold ? mass(*b.varifold) : 0.0;
    if (a.total < b.total || (a.total == b.total && (ma < mb || (ma == mb && a.faces < b.faces))))
      best = i;
  }
  return best;
}

namespace detail {

/// Evaluate candidates in parallel batches; results keep input order.
inline std::vector<CandidateRecord> evaluate_all(std::shared_ptr<const BodyMesh> mesh,
                                                 const std::vector<std::vector<int>> &sets,
                                                 const DeformationState *warm, const DensitySpec &spec,
                                                 const EnergyParams &params, const MinimizerConfig &cfg) {
  std::vector<CandidateRecord> out(sets.size());
  const std::size_t batch = std::max(1u, cfg.threads);
  for (std::size_t i0 = 0; i0 < sets.size(); i0 += batch) {
    const std::size_t i1 = std::min(sets.size(), i0 + batch);
    if (batch == 1) {
      out[i0] = evaluate_candidate(mesh, sets[i0], warm, spec, params, cfg);
      continue;
    }
    std::vector<std::future<CandidateRecord>> jobs;
    for (std::size_t i = i0; i < i1; ++i)
      jobs.push_back(std::async(std::launch::async, [&, i] {
        return evaluate_candidate(mesh, sets[i], warm, spec, params, cfg);
      }));
    for (std::size_t i = i0; i < i1; ++i)
      out[i] = jobs[i - i0].get();
  }
  return out;
}

} // namespace detail

/// Outer search over crack configurations. The crack-free candidate is always
/// evaluated first and warm-starts every other candidate.
inline MinimizationReport minimize_total(std::shared_ptr<const BodyMesh> mesh, const DensitySpec &spec,
                                         const EnergyParams &params, const MinimizerConfig &cfg) {
  params.validate();
  cfg.validate();
  MinimizationReport rep;
  rep.candidates.push_back(evaluate_candidate(mesh, {}, nullptr, spec, params, cfg));
  const DeformationState &base = *rep.candidates.front().state;

  if (cfg.strategy == CandidateStrategy::EnumerateConnected) {
    rep.generated = enumerate_connected_subsets(*mesh, cfg.max_candidates);
    const std::vector<std::vector<int>> rest(rep.generated.begin() + 1, rep.generated.end());
    for (auto &r : detail::evaluate_all(mesh, rest, &base, spec, params, cfg))
      rep.candidates.push_back(std::move(r));
  } else {
    rep.generated.push_back({});
    const auto &c = mesh->candidate_faces;
    if (!c.empty() && cfg.max_candidates > 1) {
      // Seed: face with the largest bulk energy density in its two adjacent elements.
      const auto parts = element_energies(base, spec);
      std::size_t seed = 0;
      double best_density = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < c.size(); ++k) {
        const auto &f = mesh->interior_faces[c[k]];
        const double d = (parts[f.tet[0]] + parts[f.tet[1]]) / (mesh->volumes[f.tet[0]] + mesh->volumes[f.tet[1]]);
        if (d > best_density) {
          best_density = d;
          seed = k;
        }
      }
      const auto adj = candidate_adjacency(*mesh);
      // The seed is always accepted: a single nucleating face usually costs more than
      // no crack, and growth is then measured against the seed.
      double current = std::numeric_limits<double>::infinity();
      std::vector<std::vector<int>> frontier{{static_cast<int>(seed)}};
      while (!frontier.empty() && rep.candidates.size() < cfg.max_candidates) {
        std::vector<std::vector<int>> sets;
        for (const auto &s : frontier) {
          std::vector<int> faces;
          for (int k : s)
            faces.push_back(c[k]);
          std::sort(faces.begin(), faces.end());
          sets.push_back(faces);
        }
        if (rep.candidates.size() + sets.size() > cfg.max_candidates)
          sets.resize(cfg.max_candidates - rep.candidates.size());
        auto results = detail::evaluate_all(mesh, sets, &base, spec, params, cfg);
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < results.size(); ++i)
          if (results[i].admissible && results[i].total < current && (!best || results[i].total < results[*best].total))
            best = i;
        std::vector<int> grown = best ? frontier[*best] : std::vector<int>{};
        for (auto &r : results)
          rep.candidates.push_back(std::move(r));
        if (!best)
          break;
        current = rep.candidates[rep.candidates.size() - results.size() + *best].total;
        rep.generated.push_back(sets[*best]);
        std::set<std::vector<int>> next;
        for (int k : grown)
          for (int n : adj[k])
            if (!std::binary_search(grown.begin(), grown.end(), n)) {
              auto t = grown;
              t.insert(std::upper_bound(t.begin(), t.end(), n), n);
              next.insert(std::move(t));
            }
        frontier.assign(next.begin(), next.end());
      }
    }
  }
  for (std::size_t i = 0; i < rep.candidates.size(); ++i)
    rep.candidates[i].id = i;
  rep.selected = select_candidate(rep.candidates);
  return rep;
}

/// Candidate list for a strategy. Greedy growth needs energy evaluations and
/// returns the accepted growth path starting at ∅.
inline std::vector<std::vector<int>> generate_candidates(std::shared_ptr<const BodyMesh> mesh,
                                                         CandidateStrategy strategy, std::size_t limit,
                                                         const DensitySpec &spec = {},
                                                         const EnergyParams &params = {},
                                                         MinimizerConfig cfg = {}) {
  if (strategy == CandidateStrategy::EnumerateConnected)
    return enumerate_connected_subsets(*mesh, limit);
  cfg.strategy = strategy;
  cfg.max_candidates = limit;
  return minimize_total(std::move(mesh), spec, params, cfg).generated;
}

} // namespace fracvar
