#pragma once

// Empirical stability functionals, the colinear-limit oracle and the
// adversarial worst-pair search that estimates their infimum over a set.

#include <clipstab/core.hpp>
#include <clipstab/ensembles.hpp>
#include <clipstab/nonlinear_ops.hpp>
#include <clipstab/parallel.hpp>
#include <clipstab/rng.hpp>
#include <clipstab/signal_sets.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

namespace clipstab {

enum class Normalization { SquaredDistance, Distance };

inline std::string_view to_string(Normalization k) {
  return k == Normalization::SquaredDistance ? "squared_distance" : "distance";
}

inline Normalization parse_normalization(std::string_view s) {
  if (s == "squared_distance") return Normalization::SquaredDistance;
  if (s == "distance") return Normalization::Distance;
  throw ConfigError("unknown normalization '" + std::string(s) + "'");
}

struct StabilityFunctional {
  Nonlinearity nonlinearity = Nonlinearity::Clip;
  ClipLevel level = ClipLevel::unbounded();  // ignored for sign
  Normalization normalization = Normalization::SquaredDistance;
};

/// (1/m) Σ |N⟨X_i,u⟩ − N⟨X_i,v⟩|² divided by ‖u−v‖² or ‖u−v‖.
inline double functional_value(const MeasurementMatrix& x, std::span<const double> u, std::span<const double> v,
                               const StabilityFunctional& f) {
  require_dimension(u.size(), x.n(), "functional_value(u)");
  require_dimension(v.size(), x.n(), "functional_value(v)");
  if (x.m() == 0) throw DegenerateError("functional_value: matrix has no rows");
  const double d = distance(u, v);
  if (!(d >= kMinPairDistance)) throw DegenerateError("functional_value: ||u - v|| below 1e-8");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.m(); ++i) {
    const auto row = x.rows.row(i);
    const double diff = apply(f.nonlinearity, dot(row, u), f.level) - apply(f.nonlinearity, dot(row, v), f.level);
    acc += diff * diff;
  }
  acc /= static_cast<double>(x.m());
  return f.normalization == Normalization::SquaredDistance ? acc / (d * d) : acc / d;
}

/// (1/m) Σ_{|⟨X_i,u⟩| ≤ λ} ⟨X_i,u⟩² / ‖u‖², the ε → 0 limit of the clip
/// functional at the pair (u, (1−ε)u).
inline double colinear_limit_value(const MeasurementMatrix& x, std::span<const double> u, ClipLevel level) {
  require_dimension(u.size(), x.n(), "colinear_limit_value");
  if (x.m() == 0) throw DegenerateError("colinear_limit_value: matrix has no rows");
  const double r = norm2(u);
  if (r == 0.0) throw DegenerateError("colinear_limit_value: u must be nonzero");
  if (r > 1.0 + 1e-9) throw ConfigError("colinear_limit_value: requires ||u|| <= 1");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.m(); ++i) {
    const double p = dot(x.rows.row(i), u);
    if (std::abs(p) <= level.lambda()) acc += p * p;
  }
  return acc / static_cast<double>(x.m()) / (r * r);
}

struct SearchOptions {
  double min_distance = kMinPairDistance;
  double max_distance = std::numeric_limits<double>::infinity();
  std::size_t block = 256;              // random pairs per seeded cell
  std::size_t refine_candidates = 10;
  std::size_t shrink_stages = 20;
  std::size_t steps_per_stage = 12;
  double initial_radius = 0.5;
  double shrink = 0.55;
  std::vector<double> colinear_eps{1e-3, 1e-5};
  std::size_t colinear_starts = 20;     // random directions added to the candidate directions
  std::size_t colinear_keep = 3;
};

struct StrategyBest {
  std::string name;
  double value = std::numeric_limits<double>::infinity();
};

struct StabilityEstimate {
  double value = std::numeric_limits<double>::infinity();  // an upper bound on the infimum
  Vector u;
  Vector v;
  std::int64_t evaluations = 0;
  std::vector<StrategyBest> strategy_breakdown;
  std::uint64_t seed = 0;
  std::string source;  // phase that produced the minimizer
};

namespace detail {

struct Candidate {
  double value = std::numeric_limits<double>::infinity();
  std::size_t rank = 0;  // global order index used as tie-break
  Vector u;
  Vector v;
};

inline bool candidate_less(const Candidate& a, const Candidate& b) {
  return std::tie(a.value, a.rank) < std::tie(b.value, b.rank);
}

inline void keep_best(std::vector<Candidate>& pool, Candidate c, std::size_t k) {
  pool.push_back(std::move(c));
  std::sort(pool.begin(), pool.end(), candidate_less);
  if (pool.size() > k) pool.resize(k);
}

// Brings the pair inside the allowed distance window; false when impossible.
inline bool constrain_pair(const SignalSet& set, const Vector& u, Vector& v, const SearchOptions& opt) {
  double d = distance(u, v);
  for (int it = 0; it < 60 && d > opt.max_distance; ++it) {
    const double t = 0.999 * opt.max_distance / d;
    Vector w(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) w[j] = u[j] + t * (v[j] - u[j]);
    v = set.kind() == SetKind::Ball ? std::move(w) : project(set, w);
    d = distance(u, v);
  }
  return d >= opt.min_distance && d <= opt.max_distance;
}

inline double safe_value(const MeasurementMatrix& x, const Vector& u, const Vector& v, const StabilityFunctional& f,
                         const SignalSet& set, const SearchOptions& opt) {
  const double d = distance(u, v);
  if (!(d >= opt.min_distance && d <= opt.max_distance && d >= kMinPairDistance))
    return std::numeric_limits<double>::infinity();
  if (!membership(set, u, 1e-9) || !membership(set, v, 1e-9)) return std::numeric_limits<double>::infinity();
  return functional_value(x, u, v, f);
}

struct StrategyCell {
  std::string name;
  PairKind kind;
};

inline std::vector<StrategyCell> strategies_for(const SignalSet& set) {
  std::vector<StrategyCell> out{{"independent", PairKind::Independent}, {"nearby", PairKind::Nearby}};
  // v = (1−ε)u leaves sphere-type sets; a very small Nearby step plays its role there.
  if (set.on_sphere())
    out.push_back({"colinear_as_nearby", PairKind::Nearby});
  else
    out.push_back({"colinear", PairKind::Colinear});
  out.push_back({"antipodal", PairKind::Antipodal});
  return out;
}

inline PairStrategy draw_strategy(const StrategyCell& cell, Rng& rng) {
  switch (cell.kind) {
    case PairKind::Independent: return PairStrategy::independent();
    case PairKind::Antipodal: return PairStrategy::antipodal();
    case PairKind::Colinear: return PairStrategy::colinear(std::exp(rng.uniform(std::log(1e-4), std::log(0.5))));
    case PairKind::Nearby: {
      const bool tiny = cell.name == "colinear_as_nearby";
      const double lo = tiny ? std::log(1e-5) : std::log(1e-3);
      const double hi = tiny ? std::log(1e-2) : std::log(1.0);
      return PairStrategy::nearby(std::exp(rng.uniform(lo, hi)));
    }
  }
  return PairStrategy::independent();
}

inline void perturb(std::span<double> x, double step, Rng& rng) {
  const double scale = step / std::sqrt(static_cast<double>(x.size()));
  for (double& e : x) e += scale * rng.normal();
}

// Projection onto the unit directions admissible for colinear pairs in the set.
inline Vector project_direction(const SignalSet& set, std::span<const double> x) {
  Vector y(x.begin(), x.end());
  if (set.sparse()) hard_threshold(y, set.s());
  if (normalize(y) == 0.0) y[0] = 1.0;
  return y;
}

}  // namespace detail

/// Upper bound on inf_{u,v ∈ set} functional_value(X, u, v, f). `budget` random
/// pairs are drawn per pair strategy, the best are refined by perturbation
/// descent, and for ball-type sets under clipping colinear pairs along
/// minimizing directions of colinear_limit_value are added.
inline StabilityEstimate worst_pair_search(const MeasurementMatrix& x, const SignalSet& set,
                                           const StabilityFunctional& f, std::size_t budget, std::uint64_t seed,
                                           const SearchOptions& opt = {}) {
  if (budget < 1) throw ConfigError("worst_pair_search: budget must be >= 1");
  require_dimension(set.n(), x.n(), "worst_pair_search");
  if (x.m() == 0) throw DegenerateError("worst_pair_search: matrix has no rows");
  const auto cells = detail::strategies_for(set);
  const std::size_t blocks = (budget + opt.block - 1) / opt.block;
  const std::size_t keep = std::max<std::size_t>(opt.refine_candidates, 1);

  StabilityEstimate result;
  result.seed = seed;

  // (a) random pairs, one seeded cell per (strategy, block)
  struct CellResult {
    std::vector<detail::Candidate> best;
    std::int64_t evaluations = 0;
  };
  const std::size_t n_cells = cells.size() * blocks;
  auto cell_results = parallel_map<CellResult>(n_cells, [&](std::size_t c) {
    const std::size_t s = c / blocks;
    const std::size_t b = c % blocks;
    Rng rng(derive_seed(seed, c));
    CellResult out;
    const std::size_t count = std::min(opt.block, budget - b * opt.block);
    for (std::size_t k = 0; k < count; ++k) {
      auto [u, v] = sample_pair(set, detail::draw_strategy(cells[s], rng), rng);
      if (!detail::constrain_pair(set, u, v, opt)) continue;
      const double val = detail::safe_value(x, u, v, f, set, opt);
      ++out.evaluations;
      if (out.best.size() < keep || val < out.best.back().value)
        detail::keep_best(out.best, {val, c * opt.block + k, std::move(u), std::move(v)}, keep);
    }
    return out;
  });

  std::vector<detail::Candidate> pool;
  for (std::size_t s = 0; s < cells.size(); ++s) {
    StrategyBest sb{cells[s].name};
    for (std::size_t b = 0; b < blocks; ++b) {
      auto& cr = cell_results[s * blocks + b];
      result.evaluations += cr.evaluations;
      for (auto& cand : cr.best) {
        sb.value = std::min(sb.value, cand.value);
        if (std::isfinite(cand.value)) detail::keep_best(pool, std::move(cand), keep);
      }
    }
    result.strategy_breakdown.push_back(sb);
  }

  // (b) perturbation descent from the best candidates
  struct Refined {
    detail::Candidate best;
    std::int64_t evaluations = 0;
  };
  const std::uint64_t refine_seed = derive_seed(seed, 0x5EF1E0000ULL);
  auto refined = parallel_map<Refined>(pool.size(), [&](std::size_t k) {
    Rng rng(derive_seed(refine_seed, k));
    Refined out;
    detail::Candidate cur = pool[k];
    double radius = opt.initial_radius;
    for (std::size_t stage = 0; stage < opt.shrink_stages; ++stage, radius *= opt.shrink) {
      for (std::size_t step = 0; step < opt.steps_per_stage; ++step) {
        Vector u = cur.u;
        Vector v = cur.v;
        const double d = distance(u, v);
        const double r = (step % 2 == 0) ? radius : radius * d;
        switch (step % 5) {
          case 0: detail::perturb(u, r, rng); break;
          case 1: detail::perturb(v, r, rng); break;
          case 2: {
            Vector g(u.size());
            detail::perturb(g, r, rng);
            for (std::size_t j = 0; j < u.size(); ++j) {
              u[j] += g[j];
              v[j] += g[j];
            }
            break;
          }
          case 3:
            detail::perturb(u, r, rng);
            detail::perturb(v, r, rng);
            break;
          case 4: {
            const double t = std::exp(radius * rng.normal());
            for (std::size_t j = 0; j < u.size(); ++j) v[j] = u[j] + t * (v[j] - u[j]);
            break;
          }
        }
        u = project(set, u);
        v = project(set, v);
        if (!detail::constrain_pair(set, u, v, opt)) continue;
        const double val = detail::safe_value(x, u, v, f, set, opt);
        ++out.evaluations;
        if (val < cur.value) {
          cur.value = val;
          cur.u = std::move(u);
          cur.v = std::move(v);
        }
      }
    }
    out.best = std::move(cur);
    return out;
  });
  StrategyBest refine_best{"refine"};
  for (auto& r : refined) {
    result.evaluations += r.evaluations;
    refine_best.value = std::min(refine_best.value, r.best.value);
  }
  result.strategy_breakdown.push_back(refine_best);

  // (c) colinear witnesses along directions minimizing the colinear limit
  std::vector<detail::Candidate> colinear;
  const bool ball_like = set.kind() == SetKind::Ball || set.kind() == SetKind::SparseBall;
  if (ball_like && f.nonlinearity == Nonlinearity::Clip && !opt.colinear_eps.empty()) {
    std::vector<Vector> starts;
    for (const auto& c : pool) {
      Vector diff = subtract(c.u, c.v);
      starts.push_back(detail::project_direction(set, c.u));
      starts.push_back(detail::project_direction(set, diff));
    }
    Rng start_rng(derive_seed(seed, 0xC011AE0000ULL));
    const SignalSet dir_set(set.sparse() ? SetKind::SparseSphere : SetKind::Sphere, set.n(), set.s());
    for (std::size_t k = 0; k < opt.colinear_starts; ++k) starts.push_back(sample_point(dir_set, start_rng));

    struct Direction {
      double value;
      std::size_t index;
      Vector d;
      std::int64_t evaluations;
    };
    auto dirs = parallel_map<Direction>(starts.size(), [&](std::size_t k) {
      Rng rng(derive_seed(seed, 0xD1EC000000ULL + k));
      Vector d = starts[k];
      double best = colinear_limit_value(x, d, f.level);
      std::int64_t evals = 1;
      double radius = opt.initial_radius;
      for (std::size_t stage = 0; stage < opt.shrink_stages; ++stage, radius *= opt.shrink) {
        for (std::size_t step = 0; step < opt.steps_per_stage; ++step) {
          Vector trial = d;
          detail::perturb(trial, radius, rng);
          trial = detail::project_direction(set, trial);
          const double val = colinear_limit_value(x, trial, f.level);
          ++evals;
          if (val < best) {
            best = val;
            d = std::move(trial);
          }
        }
      }
      return Direction{best, k, std::move(d), evals};
    });
    std::sort(dirs.begin(), dirs.end(),
              [](const Direction& a, const Direction& b) { return std::tie(a.value, a.index) < std::tie(b.value, b.index); });
    StrategyBest colinear_best{"colinear_limit"};
    for (auto& d : dirs) result.evaluations += d.evaluations;
    std::size_t rank = 0;
    for (std::size_t k = 0; k < std::min(opt.colinear_keep, dirs.size()); ++k) {
      for (double eps : opt.colinear_eps) {
        Vector u = dirs[k].d;
        Vector v = scaled(u, 1.0 - eps);
        if (!detail::constrain_pair(set, u, v, opt)) continue;
        const double val = detail::safe_value(x, u, v, f, set, opt);
        ++result.evaluations;
        colinear_best.value = std::min(colinear_best.value, val);
        colinear.push_back({val, rank++, std::move(u), std::move(v)});
      }
    }
    result.strategy_breakdown.push_back(colinear_best);
  }

  // Final reduction: fixed order (refined candidates, then colinear witnesses), lowest index wins ties.
  const detail::Candidate* best = nullptr;
  std::string source;
  for (const auto& r : refined)
    if (!best || r.best.value < best->value) {
      best = &r.best;
      source = "refine";
    }
  for (const auto& c : colinear)
    if (!best || c.value < best->value) {
      best = &c;
      source = "colinear_limit";
    }
  if (!best || !std::isfinite(best->value)) throw DegenerateError("worst_pair_search: no admissible pair found");
  result.u = best->u;
  result.v = best->v;
  result.value = functional_value(x, result.u, result.v, f);
  result.source = source;
  return result;
}

/// Mean over n_mc trials (fresh X and u uniform on S^{n−1}) of colinear_limit_value at each λ.
inline std::vector<McEstimate> expected_sharpness_scan(std::size_t n, const std::vector<double>& lambdas, std::size_t m,
                                                       std::int64_t n_mc, std::uint64_t seed,
                                                       EnsembleKind kind = EnsembleKind::UniformSphere) {
  if (n == 0 || m == 0) throw ConfigError("expected_sharpness_scan: n and m must be positive");
  if (n_mc <= 0) throw ConfigError("expected_sharpness_scan: n_mc must be positive");
  for (double l : lambdas)
    if (!(l >= 0.0)) throw ConfigError("expected_sharpness_scan: lambda must be nonnegative");
  const MeasurementEnsemble ensemble(kind, n);
  const SignalSet sphere(SetKind::Sphere, n);
  auto per_trial = parallel_map<Vector>(static_cast<std::size_t>(n_mc), [&](std::size_t t) {
    const std::uint64_t trial_seed = derive_seed(seed, t);
    Vector u = sample_point(sphere, derive_seed(trial_seed, 0));
    const MeasurementMatrix x = sample_matrix(ensemble, m, derive_seed(trial_seed, 1));
    const Vector p = multiply(x.rows, u);
    Vector vals(lambdas.size(), 0.0);
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
      double acc = 0.0;
      for (double q : p)
        if (std::abs(q) <= lambdas[k]) acc += q * q;
      vals[k] = acc / static_cast<double>(m);
    }
    return vals;
  });
  std::vector<McEstimate> out(lambdas.size());
  const double trials = static_cast<double>(n_mc);
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto& v : per_trial) {
      sum += v[k];
      sum_sq += v[k] * v[k];
    }
    out[k].estimate = sum / trials;
    const double var = n_mc > 1 ? std::max(0.0, (sum_sq - trials * out[k].estimate * out[k].estimate) / (trials - 1)) : 0.0;
    out[k].std_error = std::sqrt(var / trials);
    out[k].n_mc = n_mc;
    out[k].seed = seed;
  }
  return out;
}

}  // namespace clipstab
