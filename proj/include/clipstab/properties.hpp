#pragma once

// Randomized property suite for the measurement operators. Each property runs
// a fixed number of trials in seeded chunks; a failure reports the first
// violating trial (lowest trial index) with its inputs.

#include <clipstab/core.hpp>
#include <clipstab/nonlinear_ops.hpp>
#include <clipstab/parallel.hpp>
#include <clipstab/rng.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace clipstab {

enum class FoldVariant { Standard, ClosedUpper };

/// fold, or the deliberately broken variant that is the identity on the closed interval [−λ, λ].
inline double fold_variant(FoldVariant v, double x, ClipLevel level) {
  if (v == FoldVariant::ClosedUpper && std::abs(x) <= level.lambda()) return x;
  return fold(x, level);
}

struct PropertyResult {
  std::string name;
  std::int64_t trials = 0;
  std::int64_t failures = 0;
  std::optional<std::string> counterexample;
  double seconds = 0.0;

  bool passed() const { return failures == 0; }
};

struct PropertyOptions {
  std::int64_t trials = 1000000;
  std::uint64_t seed = 1;
  FoldVariant fold = FoldVariant::Standard;
};

namespace detail {

inline std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

// One trial returns std::nullopt on success or a description of the violation.
using Trial = std::function<std::optional<std::string>(Rng&, std::int64_t)>;

inline PropertyResult run_property(const std::string& name, const PropertyOptions& opt, std::uint64_t stream,
                                   const Trial& trial) {
  const auto start = std::chrono::steady_clock::now();
  constexpr std::int64_t chunk = 65536;
  const std::size_t chunks = static_cast<std::size_t>((opt.trials + chunk - 1) / chunk);
  struct Partial {
    std::int64_t failures = 0;
    std::optional<std::string> first;
  };
  const std::uint64_t seed = derive_seed(opt.seed, stream);
  auto parts = parallel_map<Partial>(chunks, [&](std::size_t c) {
    Rng rng(derive_seed(seed, c));
    Partial p;
    const std::int64_t begin = static_cast<std::int64_t>(c) * chunk;
    const std::int64_t end = std::min(opt.trials, begin + chunk);
    for (std::int64_t t = begin; t < end; ++t)
      if (auto bad = trial(rng, t)) {
        if (!p.first) p.first = *bad;
        ++p.failures;
      }
    return p;
  });
  PropertyResult r;
  r.name = name;
  r.trials = opt.trials;
  for (auto& p : parts) {
    r.failures += p.failures;
    if (!r.counterexample && p.first) r.counterexample = p.first;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// λ = 2^k and, every fourth trial, a boundary point x = (2j+1)λ (exactly representable).
inline double pick_lambda(Rng& rng, std::int64_t t) {
  if (t % 4 == 0) return std::ldexp(1.0, static_cast<int>(rng.index(11)) - 5);
  return std::exp(rng.uniform(std::log(1e-3), std::log(1e3)));
}

inline double pick_x(Rng& rng, std::int64_t t, double lambda) {
  if (t % 4 == 0) return (2.0 * (static_cast<double>(rng.index(21)) - 10.0) + 1.0) * lambda;
  return rng.uniform(-20.0, 20.0) * lambda;
}

}  // namespace detail

inline std::vector<PropertyResult> run_operator_properties(const PropertyOptions& opt = {}) {
  using detail::fmt;
  std::vector<PropertyResult> out;
  const FoldVariant variant = opt.fold;
  auto F = [variant](double x, ClipLevel l) { return fold_variant(variant, x, l); };

  out.push_back(detail::run_property("clip_monotone_lipschitz", opt, 1, [](Rng& rng, std::int64_t t) -> std::optional<std::string> {
    const ClipLevel l(detail::pick_lambda(rng, t));
    const double s = detail::pick_x(rng, t, l.lambda());
    const double u = rng.uniform(-20.0, 20.0) * l.lambda();
    const double cs = clip(s, l);
    const double cu = clip(u, l);
    const bool ok = std::abs(cs - cu) <= std::abs(s - u) && (s <= u ? cs <= cu : cs >= cu) && std::abs(cs) <= l.lambda();
    if (ok) return std::nullopt;
    return fmt("s=%.17g t=%.17g lambda=%.17g", s, u, l.lambda());
  }));

  out.push_back(detail::run_property("fold_periodicity", opt, 2, [F](Rng& rng, std::int64_t t) -> std::optional<std::string> {
    const ClipLevel l(detail::pick_lambda(rng, t));
    const double x = detail::pick_x(rng, t, l.lambda());
    const double a = F(x, l);
    const double b = F(x + 2.0 * l.lambda(), l);
    if (std::abs(a - b) <= 1e-12 * std::max(l.lambda(), std::abs(x))) return std::nullopt;
    return fmt("x=%.17g lambda=%.17g fold(x)=%.17g fold(x+2lambda)=%.17g", x, l.lambda(), a, b);
  }));

  out.push_back(detail::run_property("fold_range_identity", opt, 3, [F](Rng& rng, std::int64_t t) -> std::optional<std::string> {
    const ClipLevel l(detail::pick_lambda(rng, t));
    const double x = detail::pick_x(rng, t, l.lambda());
    const double y = F(x, l);
    const bool in_range = y >= -l.lambda() && y < l.lambda();
    const bool identity = !(x >= -l.lambda() && x < l.lambda()) || y == x;
    if (in_range && identity) return std::nullopt;
    return fmt("x=%.17g lambda=%.17g fold(x)=%.17g", x, l.lambda(), y);
  }));

  out.push_back(detail::run_property("fold_expansion", opt, 4, [F](Rng& rng, std::int64_t t) -> std::optional<std::string> {
    const ClipLevel l(detail::pick_lambda(rng, t));
    const double s = detail::pick_x(rng, t, l.lambda());
    const double u = s + rng.uniform(-1.0, 1.0) * l.lambda();
    const double gap = std::abs(s - u);
    if (gap > l.lambda()) return std::nullopt;
    const double d = std::abs(F(s, l) - F(u, l));
    if (d >= gap * (1.0 - 1e-12) - 1e-12 * l.lambda()) return std::nullopt;
    return fmt("s=%.17g t=%.17g lambda=%.17g |fold(s)-fold(t)|=%.17g", s, u, l.lambda(), d);
  }));

  out.push_back(detail::run_property("omega_gap", opt, 5, [F](Rng& rng, std::int64_t t) -> std::optional<std::string> {
    const ClipLevel l(detail::pick_lambda(rng, t));
    const double a = rng.uniform(1e-3, 0.5 - 1e-3);
    const double s = detail::pick_x(rng, t, l.lambda());
    const double u = s - rng.uniform(-6.0, 6.0) * l.lambda();
    if (!in_omega(s - u, FoldBand(a, l.lambda()))) return std::nullopt;
    const double d = std::abs(F(s, l) - F(u, l));
    if (d >= a * l.lambda() * (1.0 - 1e-9)) return std::nullopt;
    return fmt("s=%.17g t=%.17g lambda=%.17g a=%.17g", s, u, l.lambda(), a);
  }));

  out.push_back(detail::run_property("clip_pair_lower_bound", opt, 6, [](Rng& rng, std::int64_t) -> std::optional<std::string> {
    // Draw until the hypotheses hold: 4L ≤ λ ≤ 1, u, v in the unit ball,
    // |⟨x,u⟩| ≤ λ/2 and |⟨x,u−v⟩| ≥ L‖u−v‖.
    for (;;) {
      const std::size_t n = 1 + rng.index(8);
      std::vector<double> x(n), u(n), v(n);
      for (auto& e : x) e = rng.normal() * std::sqrt(static_cast<double>(n));
      for (auto& e : u) e = rng.normal();
      for (auto& e : v) e = rng.normal();
      const double ru = norm2(u) / std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
      const double rv = norm2(v) / std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
      for (auto& e : u) e /= std::max(ru, 1e-300);
      for (auto& e : v) e /= std::max(rv, 1e-300);
      const double lambda = rng.uniform(1e-3, 1.0);
      const double L = rng.uniform(0.0, lambda / 4.0);
      const double pu = dot(x, u);
      const double pv = dot(x, v);
      const double d = distance(u, v);
      if (std::abs(pu) > lambda / 2 || std::abs(pu - pv) < L * d || d == 0.0) continue;
      const ClipLevel l(lambda);
      const double diff = std::abs(clip(pu, l) - clip(pv, l));
      if (diff >= L * d * (1.0 - 1e-12)) return std::nullopt;
      return fmt("<x,u>=%.17g <x,v>=%.17g lambda=%.17g L=%.17g", pu, pv, lambda, L);
    }
  }));

  out.push_back(detail::run_property("sign_consistency", opt, 7, [](Rng& rng, std::int64_t t) -> std::optional<std::string> {
    const double x = t % 4 == 0 ? 0.0 : rng.uniform(-1.0, 1.0) * std::ldexp(1.0, static_cast<int>(rng.index(80)) - 40);
    if (static_cast<double>(sign_q(x)) * x >= 0.0) return std::nullopt;
    return fmt("x=%.17g", x);
  }));

  return out;
}

}  // namespace clipstab
