#pragma once

// Scalar measurement nonlinearities: clipping, folding (centered modulo 2λ)
// and the sign quantizer, plus the periodic folding sets Ω_a(δ).

#include <clipstab/core.hpp>

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>

namespace clipstab {

class ClipLevel {
 public:
  /// λ > 0; +infinity is allowed and means "no saturation".
  explicit ClipLevel(double lambda) : lambda_(lambda) {
    if (!(lambda > 0.0)) throw ConfigError("ClipLevel: lambda must be positive, got " + std::to_string(lambda));
  }
  static ClipLevel unbounded() { return ClipLevel(std::numeric_limits<double>::infinity()); }

  double lambda() const noexcept { return lambda_; }
  bool finite() const noexcept { return std::isfinite(lambda_); }

 private:
  double lambda_;
};

class FoldBand {
 public:
  FoldBand(double a, double delta) : a_(a), delta_(delta) {
    if (!(a > 0.0 && a < 0.5)) throw ConfigError("FoldBand: a must lie in (0, 1/2)");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("FoldBand: delta must be positive and finite");
  }
  double a() const noexcept { return a_; }
  double delta() const noexcept { return delta_; }

 private:
  double a_;
  double delta_;
};

enum class Nonlinearity { Clip, Fold, Sign };

inline std::string_view to_string(Nonlinearity op) {
  switch (op) {
    case Nonlinearity::Clip: return "clip";
    case Nonlinearity::Fold: return "fold";
    case Nonlinearity::Sign: return "sign";
  }
  return "?";
}

inline Nonlinearity parse_nonlinearity(std::string_view name) {
  if (name == "clip") return Nonlinearity::Clip;
  if (name == "fold") return Nonlinearity::Fold;
  if (name == "sign") return Nonlinearity::Sign;
  throw ConfigError("unknown nonlinearity '" + std::string(name) + "'");
}

inline double clip(double x, ClipLevel level) noexcept {
  const double l = level.lambda();
  return std::fmax(-l, std::fmin(x, l));
}

/// 2λ(x/2λ + 1/2 − ⌊x/2λ + 1/2⌋ − 1/2). Identity on [−λ, λ), so fold(λ) = −λ.
/// Evaluated as x − 2λ⌊x/2λ + 1/2⌋, which is the same expression rearranged
/// and is exact on the fundamental domain.
inline double fold(double x, ClipLevel level) noexcept {
  const double l = level.lambda();
  if (!std::isfinite(l) || (x >= -l && x < l)) return x;
  const double k = std::floor(x / (2.0 * l) + 0.5);
  double y = std::fma(-2.0 * l, k, x);
  if (y >= l) y -= 2.0 * l;
  if (y < -l) y += 2.0 * l;
  return y;
}

inline int sign_q(double x) noexcept { return x < 0.0 ? -1 : 1; }

/// t ∈ [(a+2k)δ, (1−a+2k)δ] for some integer k.
inline bool in_omega(double t, FoldBand band) noexcept {
  double r = std::fmod(t / band.delta(), 2.0);
  if (r < 0.0) r += 2.0;
  return r >= band.a() && r <= 1.0 - band.a();
}

inline double apply(Nonlinearity op, double x, ClipLevel level) noexcept {
  switch (op) {
    case Nonlinearity::Clip: return clip(x, level);
    case Nonlinearity::Fold: return fold(x, level);
    case Nonlinearity::Sign: return static_cast<double>(sign_q(x));
  }
  return x;
}

inline Vector apply_elementwise(std::span<const double> values, Nonlinearity op, ClipLevel level) {
  Vector out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = apply(op, values[i], level);
  return out;
}

}  // namespace clipstab
