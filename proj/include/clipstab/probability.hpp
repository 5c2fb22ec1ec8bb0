#pragma once

// Probability oracles: event probabilities under an ensemble, the Gaussian
// wedge integral, uniform deviations over strip classes, frame bounds and
// small-ball certification.

#include <clipstab/core.hpp>
#include <clipstab/ensembles.hpp>
#include <clipstab/montecarlo.hpp>
#include <clipstab/nonlinear_ops.hpp>
#include <clipstab/parallel.hpp>
#include <clipstab/quadrature.hpp>
#include <clipstab/signal_sets.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace clipstab {

enum class EventKind {
  ClipPair,          // |⟨X,u⟩| ≤ λ/2 and |⟨X,(u−v)/‖u−v‖⟩| ≥ L
  Strip,             // |⟨X,u⟩| ≤ λ, |⟨X,v⟩| ≤ λ and |⟨X,w⟩| ≥ θ
  Wedge,             // ⟨X,u⟩ ≤ −λ and ⟨X,v⟩ ≥ λ
  Omega,             // ⟨X,u−v⟩ ∈ Ω_a(λ)
  SaturatedStrip,    // |⟨X,u⟩| ≤ δ and |⟨X,v⟩| > λ
  UnsaturatedStrip,  // |⟨X,u⟩| ≤ δ and |⟨X,v⟩| ≤ λ
  SmallBall          // |⟨X,u⟩| ≤ δ
};

inline constexpr double kDefaultTheta = 0.1;

struct EventSpec {
  EventKind kind = EventKind::SmallBall;
  Vector u;
  Vector v;
  double lambda = 0.0;
  double L = 0.0;
  double theta = kDefaultTheta;
  double a = 0.25;
  double delta = 0.0;
  std::optional<Vector> w;  // Strip direction; defaults to (u−v)/‖u−v‖
};

namespace detail {

struct PreparedEvent {
  EventSpec spec;
  Vector w;      // normalized difference (or explicit Strip direction)
  Vector diff;   // u − v

  bool holds(std::span<const double> x) const {
    const auto& s = spec;
    switch (s.kind) {
      case EventKind::ClipPair: return std::abs(dot(x, s.u)) <= s.lambda / 2 && std::abs(dot(x, w)) >= s.L;
      case EventKind::Strip:
        return std::abs(dot(x, s.u)) <= s.lambda && std::abs(dot(x, s.v)) <= s.lambda && std::abs(dot(x, w)) >= s.theta;
      case EventKind::Wedge: return dot(x, s.u) <= -s.lambda && dot(x, s.v) >= s.lambda;
      case EventKind::Omega: return in_omega(dot(x, diff), FoldBand(s.a, s.lambda));
      case EventKind::SaturatedStrip: return std::abs(dot(x, s.u)) <= s.delta && std::abs(dot(x, s.v)) > s.lambda;
      case EventKind::UnsaturatedStrip: return std::abs(dot(x, s.u)) <= s.delta && std::abs(dot(x, s.v)) <= s.lambda;
      case EventKind::SmallBall: return std::abs(dot(x, s.u)) <= s.delta;
    }
    return false;
  }
};

inline PreparedEvent prepare_event(const EventSpec& spec, std::size_t n) {
  PreparedEvent p{spec, {}, {}};
  require_dimension(spec.u.size(), n, "event u");
  const bool needs_v = spec.kind != EventKind::SmallBall;
  if (needs_v) require_dimension(spec.v.size(), n, "event v");
  if (spec.kind == EventKind::Omega) FoldBand(spec.a, spec.lambda);  // validates a and λ
  if (needs_v) p.diff = subtract(spec.u, spec.v);
  if (spec.kind == EventKind::Strip && spec.w) {
    require_dimension(spec.w->size(), n, "event w");
    p.w = *spec.w;
    if (normalize(p.w) == 0.0) throw ConfigError("event: w must be nonzero");
  } else if (spec.kind == EventKind::ClipPair || spec.kind == EventKind::Strip) {
    p.w = p.diff;
    if (normalize(p.w) < kMinPairDistance) throw DegenerateError("event: u and v coincide");
  }
  return p;
}

}  // namespace detail

/// Monte Carlo indicator mean with its binomial standard error.
inline McEstimate event_prob(const MeasurementEnsemble& ensemble, const EventSpec& spec, std::int64_t n_mc,
                             std::uint64_t seed) {
  const auto event = detail::prepare_event(spec, ensemble.n());
  return mc_mean(n_mc, seed, [&, buf = Vector(ensemble.n())](Rng& rng) mutable {
    ensemble.sample(rng, buf);
    return event.holds(buf) ? 1.0 : 0.0;
  });
}

inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

namespace detail {

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// Width past `from` beyond which the standard normal density has dropped by e^{−40}.
inline double tail_width(double from) {
  const double f = std::max(from, 0.0);
  return std::min(10.0, std::sqrt(f * f + 80.0) - f);
}

// With D = Y₂ − Y₁ = d·A and S = Y₁ + Y₂ = √(4 − d²)·B (A, B independent
// standard normals) the wedge is {A ≥ 2λ/d + k|B|}, k = √(4 − d²)/d. Both
// variables are integrated by Gauss-Legendre over their effective ranges.
inline double wedge_quadrature(double dist, double lambda, std::size_t nodes) {
  const double base = 2.0 * lambda / dist;
  const double k = std::sqrt(std::max(0.0, 4.0 - dist * dist)) / dist;
  const double b_max = k > 0.0 ? std::min(10.0, (std::sqrt(base * base + 80.0) - base) / k) : 10.0;
  auto inner = [&](double b) {
    const double lo = base + k * b;
    return integrate(normal_pdf, lo, lo + tail_width(lo), nodes);
  };
  return 2.0 * integrate([&](double b) { return normal_pdf(b) * inner(b); }, 0.0, b_max, nodes);
}

}  // namespace detail

/// P(Y₁ ≤ −λ, Y₂ ≥ λ) for standard normals with correlation 1 − dist²/2.
inline double gaussian_wedge_prob(double dist, double lambda, std::size_t quad_nodes = 128) {
  if (!(dist > 0.0 && dist <= 2.0)) throw DomainError("gaussian_wedge_prob: dist must lie in (0, 2]");
  if (!(lambda >= 0.0)) throw DomainError("gaussian_wedge_prob: lambda must be nonnegative");
  if (quad_nodes < 64) throw ConfigError("gaussian_wedge_prob: quad_nodes must be >= 64");
  const double coarse = detail::wedge_quadrature(dist, lambda, quad_nodes);
  const double fine = detail::wedge_quadrature(dist, lambda, 2 * quad_nodes);
  if (std::abs(coarse - fine) > 1e-8) throw NumericError("gaussian_wedge_prob: quadrature did not converge");
  return fine;
}

/// E|M_λ(⟨x,U⟩)|² / λ² for U uniform on S^{n−1} and any x ∈ √n·S^{n−1}.
inline double fold_energy_ratio(double lambda, std::size_t n, std::size_t nodes_per_period = 32) {
  if (n < 2) throw DomainError("fold_energy_ratio: n >= 2 required");
  if (!(lambda > 0.0)) throw DomainError("fold_energy_ratio: lambda must be positive");
  const double rn = std::sqrt(static_cast<double>(n));
  const double p = static_cast<double>(n) - 2.0;
  const double norm = sphere_marginal_normalization(n);
  // Panels are fold periods [(2j−1)λ, (2j+1)λ] in s = √n sin φ, mapped to φ.
  const auto periods = static_cast<long>(std::ceil((rn / lambda - 1.0) / 2.0)) + 1;
  double acc = 0.0;
  for (long j = -periods; j <= periods; ++j) {
    const double s0 = std::max(-rn, (2.0 * static_cast<double>(j) - 1.0) * lambda);
    const double s1 = std::min(rn, (2.0 * static_cast<double>(j) + 1.0) * lambda);
    if (s1 <= s0) continue;
    const double phi0 = std::asin(std::clamp(s0 / rn, -1.0, 1.0));
    const double phi1 = std::asin(std::clamp(s1 / rn, -1.0, 1.0));
    const double shift = 2.0 * static_cast<double>(j) * lambda;
    acc += integrate(
        [&](double phi) {
          const double s = rn * std::sin(phi) - shift;
          return s * s * std::pow(std::cos(phi), p);
        },
        phi0, phi1, nodes_per_period);
  }
  return norm * acc / (lambda * lambda);
}

struct DeviationPoint {
  std::size_t m = 0;
  double mean_sup_deviation = 0.0;
  double std_error = 0.0;
  double reference_error = 0.0;  // standard error of the reference probabilities (0 for quadrature)
};

/// Mean over trials of sup_{class} |empirical − true| for strip classes
/// 1(|⟨x,w⟩| ≤ α), w uniform on S^{n−1}, α uniform in [0.05, 2].
inline std::vector<DeviationPoint> uniform_deviation_halfspaces(const MeasurementEnsemble& ensemble,
                                                                const std::vector<std::size_t>& m_grid,
                                                                std::size_t n_class, std::size_t trials,
                                                                std::uint64_t seed) {
  const std::size_t n = ensemble.n();
  if (n > 10) throw ConfigError("uniform_deviation_halfspaces: n must be <= 10");
  if (n_class == 0 || trials == 0 || m_grid.empty()) throw ConfigError("uniform_deviation_halfspaces: empty grid");
  for (auto m : m_grid)
    if (m == 0) throw ConfigError("uniform_deviation_halfspaces: m must be positive");
  Rng class_rng(derive_seed(seed, 0));
  const SignalSet sphere(SetKind::Sphere, n);
  std::vector<Vector> dirs;
  Vector alpha;
  for (std::size_t c = 0; c < n_class; ++c) {
    dirs.push_back(sample_point(sphere, class_rng));
    alpha.push_back(class_rng.uniform(0.05, 2.0));
  }
  Vector reference(n_class);
  double reference_error = 0.0;
  if (ensemble.kind() == EnsembleKind::UniformSphere && n >= 2) {
    for (std::size_t c = 0; c < n_class; ++c)
      reference[c] = sphere_marginal_cdf(alpha[c], n) - sphere_marginal_cdf(-alpha[c], n);
  } else {
    const std::size_t m_max = *std::max_element(m_grid.begin(), m_grid.end());
    const auto big = static_cast<std::int64_t>(10 * m_max * trials);
    for (std::size_t c = 0; c < n_class; ++c) {
      const auto est = small_ball_prob(ensemble, dirs[c], alpha[c], big, derive_seed(seed, 1 + c));
      reference[c] = est.estimate;
      reference_error = std::max(reference_error, est.std_error);
    }
  }
  std::vector<DeviationPoint> out;
  for (std::size_t g = 0; g < m_grid.size(); ++g) {
    const std::size_t m = m_grid[g];
    const std::uint64_t grid_seed = derive_seed(seed, 1000000 + g);
    const Vector sups = parallel_map<double>(trials, [&](std::size_t t) {
      const auto x = sample_matrix(ensemble, m, derive_seed(grid_seed, t));
      std::vector<std::size_t> hits(n_class, 0);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t c = 0; c < n_class; ++c)
          if (std::abs(dot(x.rows.row(i), dirs[c])) <= alpha[c]) ++hits[c];
      double sup = 0.0;
      for (std::size_t c = 0; c < n_class; ++c)
        sup = std::max(sup, std::abs(static_cast<double>(hits[c]) / static_cast<double>(m) - reference[c]));
      return sup;
    });
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double s : sups) {
      sum += s;
      sum_sq += s * s;
    }
    const double k = static_cast<double>(trials);
    DeviationPoint pt;
    pt.m = m;
    pt.mean_sup_deviation = sum / k;
    pt.std_error = trials > 1 ? std::sqrt(std::max(0.0, (sum_sq - k * pt.mean_sup_deviation * pt.mean_sup_deviation) / (k - 1)) / k) : 0.0;
    pt.reference_error = reference_error;
    out.push_back(pt);
  }
  return out;
}

struct FrameBound {
  double sampled_max = 0.0;   // max over random directions of (1/m)‖Xw‖²/‖w‖²
  double top_quotient = 0.0;  // largest eigenvalue of XᵀX/m
  Vector top_direction;
  std::size_t iterations = 0;
};

inline FrameBound frame_bound_check(const MeasurementMatrix& x, std::size_t n_dirs, std::uint64_t seed,
                                    double tol = 1e-10, std::size_t max_iter = 10000) {
  if (x.m() == 0) throw ConfigError("frame_bound_check: m must be >= 1");
  const std::size_t n = x.n();
  const double m = static_cast<double>(x.m());
  Matrix gram(n, n);
  for (std::size_t i = 0; i < x.m(); ++i) {
    const auto r = x.rows.row(i);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a; b < n; ++b) gram(a, b) += r[a] * r[b];
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      gram(a, b) /= m;
      gram(b, a) = gram(a, b);
    }
  auto quotient = [&](std::span<const double> w) {
    const Vector gw = multiply(gram, w);
    return dot(w, gw) / dot(w, w);
  };
  FrameBound out;
  Rng rng(seed);
  const SignalSet sphere(SetKind::Sphere, n);
  for (std::size_t k = 0; k < n_dirs; ++k) out.sampled_max = std::max(out.sampled_max, quotient(sample_point(sphere, rng)));

  Vector w = sample_point(sphere, rng);
  double prev = quotient(w);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    Vector next = multiply(gram, w);
    if (normalize(next) == 0.0) {
      out.top_quotient = 0.0;
      out.top_direction = w;
      out.iterations = it;
      return out;
    }
    w = std::move(next);
    const double q = quotient(w);
    if (std::abs(q - prev) <= tol * std::max(1.0, std::abs(q))) {
      out.top_quotient = q;
      out.top_direction = w;
      out.iterations = it;
      return out;
    }
    prev = q;
  }
  throw NumericError("frame_bound_check: power iteration did not converge");
}

struct SmallBallCertificate {
  McEstimate sup_estimate;
  McEstimate inf_estimate;
  Vector sup_direction;
  Vector inf_direction;
};

struct CertifyOptions {
  std::size_t pilot_samples = 20000;
  std::size_t restarts = 50;
  std::size_t stages = 10;
  std::size_t steps_per_stage = 6;
  double initial_radius = 0.5;
  double shrink = 0.5;
};

/// Heuristic sup and inf over unit directions of P(|⟨X,u⟩| ≤ δ).
inline SmallBallCertificate certify_small_ball(const MeasurementEnsemble& ensemble, double delta, std::int64_t n_mc,
                                               std::size_t n_dirs, std::uint64_t seed, const CertifyOptions& opt = {}) {
  if (n_dirs < 1) throw ConfigError("certify_small_ball: n_dirs must be >= 1");
  if (n_mc <= 0) throw ConfigError("certify_small_ball: n_mc must be positive");
  const std::size_t n = ensemble.n();
  const SignalSet sphere(SetKind::Sphere, n);
  const auto pilot = sample_matrix(ensemble, std::min<std::size_t>(opt.pilot_samples, static_cast<std::size_t>(n_mc)),
                                   derive_seed(seed, 0));
  auto pilot_prob = [&](std::span<const double> u) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pilot.m(); ++i)
      if (std::abs(dot(pilot.rows.row(i), u)) <= delta) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pilot.m());
  };

  std::vector<Vector> cands;
  Rng rng(derive_seed(seed, 1));
  for (std::size_t k = 0; k < n_dirs; ++k) cands.push_back(sample_point(sphere, rng));
  for (std::size_t j = 0; j < n; ++j) {
    Vector e(n, 0.0);
    e[j] = 1.0;
    cands.push_back(e);
  }
  // Normals of hyperplanes through n−1 pilot samples expose mass concentrated on subspaces.
  if (n >= 2 && pilot.m() >= n - 1) {
    for (std::size_t rep = 0; rep < std::min<std::size_t>(n_dirs, 20); ++rep) {
      Vector w = sample_point(sphere, rng);
      for (int sweep = 0; sweep < 3; ++sweep)
        for (std::size_t k = 0; k + 1 < n; ++k) {
          const auto r = pilot.rows.row((rep * (n - 1) + k) % pilot.m());
          const double rr = dot(r, r);
          if (rr == 0.0) continue;
          const double c = dot(w, r) / rr;
          for (std::size_t j = 0; j < n; ++j) w[j] -= c * r[j];
        }
      if (normalize(w) > 1e-12) cands.push_back(w);
    }
  }
  Vector scores(cands.size());
  for (std::size_t k = 0; k < cands.size(); ++k) scores[k] = pilot_prob(cands[k]);

  auto refine = [&](bool maximize, std::uint64_t stream) {
    std::vector<std::size_t> order(cands.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return maximize ? scores[a] > scores[b] : scores[a] < scores[b];
    });
    const std::size_t starts = std::min(opt.restarts, order.size());
    struct Best {
      double score;
      Vector d;
    };
    auto results = parallel_map<Best>(starts, [&](std::size_t k) {
      Rng r(derive_seed(stream, k));
      Vector d = cands[order[k]];
      double best = scores[order[k]];
      double radius = opt.initial_radius;
      for (std::size_t st = 0; st < opt.stages; ++st, radius *= opt.shrink)
        for (std::size_t step = 0; step < opt.steps_per_stage; ++step) {
          Vector t = d;
          for (double& e : t) e += radius * r.normal() / std::sqrt(static_cast<double>(n));
          if (normalize(t) == 0.0) continue;
          const double s = pilot_prob(t);
          if (maximize ? s > best : s < best) {
            best = s;
            d = std::move(t);
          }
        }
      return Best{best, std::move(d)};
    });
    std::size_t pick = 0;
    for (std::size_t k = 1; k < results.size(); ++k)
      if (maximize ? results[k].score > results[pick].score : results[k].score < results[pick].score) pick = k;
    return results[pick].d;
  };

  SmallBallCertificate out;
  out.sup_direction = refine(true, derive_seed(seed, 2));
  out.inf_direction = refine(false, derive_seed(seed, 3));
  out.sup_estimate = small_ball_prob(ensemble, out.sup_direction, delta, n_mc, derive_seed(seed, 4));
  out.inf_estimate = small_ball_prob(ensemble, out.inf_direction, delta, n_mc, derive_seed(seed, 5));
  return out;
}

}  // namespace clipstab
