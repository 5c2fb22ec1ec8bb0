#pragma once

// Reconstruction from clipped and one-bit measurements: consistent declipping
// by cyclic projections and the sign-sum direction estimator.

#include <clipstab/core.hpp>
#include <clipstab/ensembles.hpp>
#include <clipstab/nonlinear_ops.hpp>

#include <cmath>
#include <optional>
#include <vector>

namespace clipstab {

struct ClippedObservation {
  Vector values;
  ClipLevel level = ClipLevel::unbounded();
  std::vector<int> saturation_flags;  // −1 clipped at −λ, 0 interior, +1 clipped at +λ
};

/// values = clip(Xu). A measurement equal to ±λ is flagged as saturated, so
/// flag 0 always means |value| < λ.
inline ClippedObservation observe_clipped(const MeasurementMatrix& x, std::span<const double> u, ClipLevel level) {
  require_dimension(u.size(), x.n(), "observe_clipped");
  ClippedObservation obs;
  obs.level = level;
  obs.values.resize(x.m());
  obs.saturation_flags.resize(x.m());
  for (std::size_t i = 0; i < x.m(); ++i) {
    const double p = dot(x.rows.row(i), u);
    obs.values[i] = clip(p, level);
    obs.saturation_flags[i] = p >= level.lambda() ? 1 : (p <= -level.lambda() ? -1 : 0);
  }
  return obs;
}

struct PocsOptions {
  double radius = 1.0;
  std::optional<Vector> reference;  // a feasible point whose distance to the iterates is tracked
};

struct PocsResult {
  Vector x_hat;
  bool converged = false;
  double residual = 0.0;
  std::size_t sweeps = 0;
  Vector reference_distance;  // distance to the reference after each sweep (sweep 0 = start)
  std::size_t fejer_violations = 0;
};

/// Largest violation of the interior equalities, saturation inequalities and the ball constraint.
inline double constraint_residual(const MeasurementMatrix& x, const ClippedObservation& obs, std::span<const double> z,
                                  double radius = 1.0) {
  double r = std::max(0.0, norm2(z) - radius);
  const double l = obs.level.lambda();
  for (std::size_t i = 0; i < x.m(); ++i) {
    const double p = dot(x.rows.row(i), z);
    switch (obs.saturation_flags[i]) {
      case 0: r = std::max(r, std::abs(p - obs.values[i])); break;
      case 1: r = std::max(r, l - p); break;
      default: r = std::max(r, p + l); break;
    }
  }
  return r;
}

/// Cyclic projections onto every measurement constraint and the ball, starting from 0.
inline PocsResult declip_pocs(const MeasurementMatrix& x, const ClippedObservation& obs, std::size_t iters, double tol,
                              const PocsOptions& opt = {}) {
  if (x.m() == 0) throw ConfigError("declip_pocs: m must be >= 1");
  require_dimension(obs.values.size(), x.m(), "declip_pocs");
  const std::size_t n = x.n();
  const double l = obs.level.lambda();
  Vector row_sq(x.m());
  for (std::size_t i = 0; i < x.m(); ++i) row_sq[i] = dot(x.rows.row(i), x.rows.row(i));

  PocsResult res;
  Vector z(n, 0.0);
  auto track = [&] {
    if (!opt.reference) return;
    const double d = distance(z, *opt.reference);
    if (!res.reference_distance.empty() && d > res.reference_distance.back() * (1.0 + 1e-12) + 1e-15)
      ++res.fejer_violations;
    res.reference_distance.push_back(d);
  };
  track();
  double move = std::numeric_limits<double>::infinity();
  while (res.sweeps < iters) {
    const Vector before = z;
    for (std::size_t i = 0; i < x.m(); ++i) {
      if (row_sq[i] == 0.0) continue;
      const auto r = x.rows.row(i);
      const double p = dot(r, z);
      double target = p;
      switch (obs.saturation_flags[i]) {
        case 0: target = obs.values[i]; break;
        case 1: target = std::max(p, l); break;
        default: target = std::min(p, -l); break;
      }
      if (target == p) continue;
      const double c = (target - p) / row_sq[i];
      for (std::size_t j = 0; j < n; ++j) z[j] += c * r[j];
    }
    const double nz = norm2(z);
    if (nz > opt.radius)
      for (double& e : z) e *= opt.radius / nz;
    ++res.sweeps;
    move = distance(before, z);
    track();
    if (move < tol && constraint_residual(x, obs, z, opt.radius) <= tol) break;
  }
  res.residual = constraint_residual(x, obs, z, opt.radius);
  res.converged = move < tol && res.residual <= tol;
  res.x_hat = std::move(z);
  return res;
}

/// normalize(Σ signs_i X_i).
inline Vector one_bit_estimate(const MeasurementMatrix& x, std::span<const int> signs) {
  if (x.m() == 0) throw ConfigError("one_bit_estimate: m must be >= 1");
  require_dimension(signs.size(), x.m(), "one_bit_estimate");
  Vector acc(x.n(), 0.0);
  for (std::size_t i = 0; i < x.m(); ++i) {
    const auto r = x.rows.row(i);
    if (norm2(r) == 0.0) throw ConfigError("one_bit_estimate: zero measurement row");
    if (signs[i] != 1 && signs[i] != -1) throw ConfigError("one_bit_estimate: signs must be +1 or -1");
    for (std::size_t j = 0; j < x.n(); ++j) acc[j] += signs[i] * r[j];
  }
  if (normalize(acc) == 0.0) throw DegenerateError("one_bit_estimate: aggregate is zero");
  return acc;
}

inline std::vector<int> sign_measurements(const MeasurementMatrix& x, std::span<const double> u) {
  std::vector<int> s(x.m());
  for (std::size_t i = 0; i < x.m(); ++i) s[i] = sign_q(dot(x.rows.row(i), u));
  return s;
}

}  // namespace clipstab
