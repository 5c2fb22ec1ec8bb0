#pragma once

// Constraint sets for the signal pair (u, v), their samplers and projections,
// structured pair generators and greedy random ε-nets.

#include <clipstab/core.hpp>
#include <clipstab/rng.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>

namespace clipstab {

enum class SetKind { Ball, Sphere, SparseBall, SparseSphere, EffSparseSphere };

inline std::string_view to_string(SetKind k) {
  switch (k) {
    case SetKind::Ball: return "ball";
    case SetKind::Sphere: return "sphere";
    case SetKind::SparseBall: return "sparse_ball";
    case SetKind::SparseSphere: return "sparse_sphere";
    case SetKind::EffSparseSphere: return "eff_sparse_sphere";
  }
  return "?";
}

inline SetKind parse_set_kind(std::string_view s) {
  for (auto k : {SetKind::Ball, SetKind::Sphere, SetKind::SparseBall, SetKind::SparseSphere, SetKind::EffSparseSphere})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown signal set '" + std::string(s) + "'");
}

class SignalSet {
 public:
  SignalSet(SetKind kind, std::size_t n, std::size_t s = 0, bool boundary_biased = false)
      : kind_(kind), n_(n), s_(is_sparse(kind) ? s : n), boundary_biased_(boundary_biased) {
    if (n == 0) throw ConfigError("signal set dimension must be positive");
    if (is_sparse(kind) && (s < 1 || s > n)) throw ConfigError("sparsity must satisfy 1 <= s <= n");
  }

  SetKind kind() const noexcept { return kind_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t s() const noexcept { return s_; }
  bool boundary_biased() const noexcept { return boundary_biased_; }

  /// Sets whose members all have unit norm.
  bool on_sphere() const noexcept { return kind_ != SetKind::Ball && kind_ != SetKind::SparseBall; }
  bool sparse() const noexcept { return is_sparse(kind_); }

  friend bool operator==(const SignalSet&, const SignalSet&) = default;

 private:
  static bool is_sparse(SetKind k) {
    return k == SetKind::SparseBall || k == SetKind::SparseSphere || k == SetKind::EffSparseSphere;
  }

  SetKind kind_;
  std::size_t n_;
  std::size_t s_;
  bool boundary_biased_;
};

inline bool membership(const SignalSet& set, std::span<const double> x, double tol = 1e-9) {
  require_dimension(x.size(), set.n(), "membership");
  const double r = norm2(x);
  switch (set.kind()) {
    case SetKind::Ball: return r <= 1.0 + tol;
    case SetKind::Sphere: return std::abs(r - 1.0) <= tol;
    case SetKind::SparseBall:
    case SetKind::SparseSphere: {
      const auto nnz = static_cast<std::size_t>(std::count_if(x.begin(), x.end(), [](double v) { return v != 0.0; }));
      if (nnz > set.s()) return false;
      return set.kind() == SetKind::SparseBall ? r <= 1.0 + tol : std::abs(r - 1.0) <= tol;
    }
    case SetKind::EffSparseSphere:
      return std::abs(r - 1.0) <= tol && norm1(x) <= std::sqrt(static_cast<double>(set.s())) * r + tol;
  }
  return false;
}

namespace detail {

inline void gaussian_fill(Rng& rng, std::span<double> x) {
  for (double& v : x) v = rng.normal();
}

inline void unit_gaussian(Rng& rng, std::span<double> x) {
  do gaussian_fill(rng, x);
  while (normalize(x) == 0.0);
}

// Keeps the s largest-magnitude coordinates (ties: lowest index) and zeroes the rest.
inline void hard_threshold(std::span<double> x, std::size_t s) {
  if (s >= x.size()) return;
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return std::abs(x[a]) > std::abs(x[b]); });
  for (std::size_t k = s; k < idx.size(); ++k) x[idx[k]] = 0.0;
}

inline Vector soft_threshold(std::span<const double> x, double tau) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::abs(x[i]) - tau;
    out[i] = a > 0.0 ? std::copysign(a, x[i]) : 0.0;
  }
  return out;
}

// Unit vector with ‖y‖₁ ≤ √s obtained by soft thresholding x at the smallest feasible level.
inline Vector project_eff_sparse(std::span<const double> x, std::size_t s) {
  Vector y(x.begin(), x.end());
  if (normalize(y) == 0.0) {
    y[0] = 1.0;
    return y;
  }
  const double budget = std::sqrt(static_cast<double>(s));
  if (norm1(y) <= budget) return y;
  double lo = 0.0;
  double hi = 0.0;
  for (double v : y) hi = std::max(hi, std::abs(v));
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    Vector z = soft_threshold(y, mid);
    if (normalize(z) == 0.0 || norm1(z) <= budget)
      hi = mid;
    else
      lo = mid;
  }
  Vector z = soft_threshold(y, hi);
  if (normalize(z) == 0.0 || norm1(z) > budget * (1.0 + 1e-12)) {
    // Fall back to the single largest coordinate, which is always feasible.
    Vector e(y.size(), 0.0);
    std::size_t best = 0;
    for (std::size_t i = 1; i < y.size(); ++i)
      if (std::abs(y[i]) > std::abs(y[best])) best = i;
    e[best] = std::copysign(1.0, y[best]);
    return e;
  }
  return z;
}

// s distinct indices drawn uniformly (partial Fisher-Yates).
inline std::vector<std::size_t> random_support(Rng& rng, std::size_t n, std::size_t s) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t k = 0; k < s; ++k) std::swap(idx[k], idx[k + rng.index(n - k)]);
  idx.resize(s);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace detail

/// Nearest point of the set (exact for Ball, Sphere and the sparse kinds; a
/// soft-threshold heuristic for EffSparseSphere).
inline Vector project(const SignalSet& set, std::span<const double> x) {
  require_dimension(x.size(), set.n(), "project");
  Vector y(x.begin(), x.end());
  switch (set.kind()) {
    case SetKind::Ball: {
      const double r = norm2(y);
      if (r > 1.0)
        for (double& v : y) v /= r;
      return y;
    }
    case SetKind::SparseBall: {
      detail::hard_threshold(y, set.s());
      const double r = norm2(y);
      if (r > 1.0)
        for (double& v : y) v /= r;
      return y;
    }
    case SetKind::Sphere:
    case SetKind::SparseSphere:
      if (set.kind() == SetKind::SparseSphere) detail::hard_threshold(y, set.s());
      if (normalize(y) == 0.0) y[0] = 1.0;
      return y;
    case SetKind::EffSparseSphere: return detail::project_eff_sparse(y, set.s());
  }
  return y;
}

inline Vector sample_point(const SignalSet& set, Rng& rng) {
  const std::size_t n = set.n();
  Vector x(n, 0.0);
  switch (set.kind()) {
    case SetKind::Ball: {
      detail::unit_gaussian(rng, x);
      const double r = std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
      for (double& v : x) v *= r;
      return x;
    }
    case SetKind::Sphere: detail::unit_gaussian(rng, x); return x;
    case SetKind::SparseBall:
    case SetKind::SparseSphere:
    case SetKind::EffSparseSphere: {
      const auto support = detail::random_support(rng, n, set.s());
      if (set.kind() == SetKind::EffSparseSphere && set.boundary_biased() && rng.coin()) {
        // Flat sign pattern on s coordinates (‖x‖₁ = √s exactly) plus small dense noise.
        for (std::size_t j : support) x[j] = rng.coin() ? 1.0 : -1.0;
        for (double& v : x) v += 0.1 * rng.normal() / std::sqrt(static_cast<double>(n));
        return project(set, x);
      }
      Vector coeff(set.s());
      detail::unit_gaussian(rng, coeff);
      for (std::size_t k = 0; k < support.size(); ++k) x[support[k]] = coeff[k];
      if (set.kind() == SetKind::SparseBall) {
        const double r = std::pow(rng.uniform(), 1.0 / static_cast<double>(set.s()));
        for (double& v : x) v *= r;
      }
      return x;
    }
  }
  return x;
}

inline Vector sample_point(const SignalSet& set, std::uint64_t seed) {
  Rng rng(seed);
  return sample_point(set, rng);
}

enum class PairKind { Independent, Nearby, Colinear, Antipodal };

inline std::string_view to_string(PairKind k) {
  switch (k) {
    case PairKind::Independent: return "independent";
    case PairKind::Nearby: return "nearby";
    case PairKind::Colinear: return "colinear";
    case PairKind::Antipodal: return "antipodal";
  }
  return "?";
}

struct PairStrategy {
  PairKind kind = PairKind::Independent;
  double param = 0.0;  // η for Nearby, ε for Colinear

  static PairStrategy independent() { return {PairKind::Independent, 0.0}; }
  static PairStrategy nearby(double eta) {
    if (!(eta > 0.0)) throw ConfigError("Nearby strategy requires eta > 0");
    return {PairKind::Nearby, eta};
  }
  static PairStrategy colinear(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("Colinear strategy requires eps in (0, 1)");
    return {PairKind::Colinear, eps};
  }
  static PairStrategy antipodal() { return {PairKind::Antipodal, 0.0}; }
};

inline constexpr double kMinPairDistance = 1e-8;

/// Draws (u, v) from the set with ‖u − v‖ ≥ 1e−8.
inline std::pair<Vector, Vector> sample_pair(const SignalSet& set, PairStrategy strategy, Rng& rng) {
  if (strategy.kind == PairKind::Colinear && set.on_sphere())
    throw StrategyError("colinear pairs v = (1 - eps) u leave sphere-type sets");
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Vector u = sample_point(set, rng);
    Vector v;
    switch (strategy.kind) {
      case PairKind::Independent: v = sample_point(set, rng); break;
      case PairKind::Antipodal: v = scaled(u, -1.0); break;
      case PairKind::Colinear: v = scaled(u, 1.0 - strategy.param); break;
      case PairKind::Nearby: {
        Vector w = u;
        const double step = strategy.param / std::sqrt(static_cast<double>(set.n()));
        for (double& x : w) x += step * rng.normal();
        v = project(set, w);
        break;
      }
    }
    if (distance(u, v) >= kMinPairDistance) return {std::move(u), std::move(v)};
  }
  throw DegenerateError("sample_pair: could not draw a non-degenerate pair");
}

inline std::pair<Vector, Vector> sample_pair(const SignalSet& set, PairStrategy strategy, std::uint64_t seed) {
  Rng rng(seed);
  return sample_pair(set, strategy, rng);
}

struct Net {
  std::vector<Vector> points;
  bool partial = false;  // a hard cap stopped construction before the rejection criterion
};

/// Greedy random ε-separated set; stops after max_points consecutive rejections.
inline Net build_net(const SignalSet& set, double epsilon, std::uint64_t seed, std::size_t max_points,
                     std::size_t max_size = 100000, std::size_t max_draws = 20000000) {
  if (!(epsilon > 0.0 && epsilon <= 2.0)) throw ConfigError("build_net: epsilon must lie in (0, 2]");
  if (static_cast<double>(set.n()) * std::log(1.0 / epsilon) > 40.0)
    throw ConfigError("build_net: n log(1/eps) exceeds 40, net would be too large");
  if (max_points == 0) throw ConfigError("build_net: max_points must be positive");
  Rng rng(seed);
  Net net;
  std::size_t rejections = 0;
  for (std::size_t draws = 0; rejections < max_points; ++draws) {
    if (draws >= max_draws || net.points.size() >= max_size) {
      net.partial = true;
      break;
    }
    Vector x = sample_point(set, rng);
    const bool separated =
        std::all_of(net.points.begin(), net.points.end(), [&](const Vector& p) { return distance(p, x) >= epsilon; });
    if (separated) {
      net.points.push_back(std::move(x));
      rejections = 0;
    } else {
      ++rejections;
    }
  }
  return net;
}

}  // namespace clipstab
