#pragma once

// Gauss-Legendre rules. Nodes are computed by Newton iteration on the
// Legendre recurrence and cached per order.

#include <clipstab/core.hpp>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace clipstab {

struct GaussLegendreRule {
  Vector nodes;    // on [-1, 1]
  Vector weights;
};

namespace detail {

inline GaussLegendreRule compute_gauss_legendre(std::size_t order) {
  GaussLegendreRule rule;
  rule.nodes.assign(order, 0.0);
  rule.weights.assign(order, 0.0);
  const std::size_t half = (order + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(order) + 0.5));
    double derivative = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (std::size_t j = 0; j < order; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * static_cast<double>(j) + 1.0) * z * p1 - static_cast<double>(j) * p2) / (static_cast<double>(j) + 1.0);
      }
      derivative = static_cast<double>(order) * (z * p0 - p1) / (z * z - 1.0);
      const double step = p0 / derivative;
      z -= step;
      if (std::abs(step) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * derivative * derivative);
    rule.nodes[i] = -z;
    rule.nodes[order - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  return rule;
}

}  // namespace detail

inline const GaussLegendreRule& gauss_legendre(std::size_t order) {
  if (order == 0) throw ConfigError("gauss_legendre: order must be positive");
  static std::mutex guard;
  static std::map<std::size_t, std::unique_ptr<GaussLegendreRule>> cache;
  std::lock_guard lock(guard);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<GaussLegendreRule>(detail::compute_gauss_legendre(order));
  return *slot;
}

/// Integral of f over [a, b] with an order-`order` Gauss-Legendre rule.
template <class F>
double integrate(F&& f, double a, double b, std::size_t order) {
  const auto& rule = gauss_legendre(order);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return acc * half;
}

}  // namespace clipstab
