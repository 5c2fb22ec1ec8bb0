#pragma once

// Laws of the measurement vector X and their one-dimensional marginals.

#include <clipstab/core.hpp>
#include <clipstab/montecarlo.hpp>
#include <clipstab/parallel.hpp>
#include <clipstab/quadrature.hpp>
#include <clipstab/rng.hpp>

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

namespace clipstab {

enum class EnsembleKind { UniformSphere, Gaussian, Rademacher, TwoSubsphere, AtomPlusSphere };

inline std::string_view to_string(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::UniformSphere: return "uniform_sphere";
    case EnsembleKind::Gaussian: return "gaussian";
    case EnsembleKind::Rademacher: return "rademacher";
    case EnsembleKind::TwoSubsphere: return "two_subsphere";
    case EnsembleKind::AtomPlusSphere: return "atom_plus_sphere";
  }
  return "?";
}

inline EnsembleKind parse_ensemble_kind(std::string_view s) {
  for (auto k : {EnsembleKind::UniformSphere, EnsembleKind::Gaussian, EnsembleKind::Rademacher,
                 EnsembleKind::TwoSubsphere, EnsembleKind::AtomPlusSphere})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown ensemble '" + std::string(s) + "'");
}

class MeasurementEnsemble {
 public:
  MeasurementEnsemble(EnsembleKind kind, std::size_t n) : kind_(kind), n_(n) {
    if (n == 0) throw ConfigError("ensemble dimension must be positive");
    if (kind == EnsembleKind::TwoSubsphere && n < 3) throw ConfigError("two_subsphere requires n >= 3");
    if (kind == EnsembleKind::AtomPlusSphere) {
      atom_.assign(n, 0.0);
      atom_[0] = std::sqrt(static_cast<double>(n));
    }
  }

  /// AtomPlusSphere with a custom atom; the atom is rescaled onto √n·S^{n−1}.
  static MeasurementEnsemble atom_plus_sphere(Vector atom) {
    MeasurementEnsemble e(EnsembleKind::AtomPlusSphere, atom.size());
    if (normalize(atom) == 0.0) throw ConfigError("atom must be nonzero");
    for (double& x : atom) x *= std::sqrt(static_cast<double>(atom.size()));
    e.atom_ = std::move(atom);
    return e;
  }

  EnsembleKind kind() const noexcept { return kind_; }
  std::size_t n() const noexcept { return n_; }
  const Vector& atom() const noexcept { return atom_; }
  static constexpr double atom_mass = 0.5;

  /// Writes one sample of X into out (size n).
  void sample(Rng& rng, std::span<double> out) const {
    const double radius = std::sqrt(static_cast<double>(n_));
    switch (kind_) {
      case EnsembleKind::Gaussian:
        for (double& x : out) x = rng.normal();
        return;
      case EnsembleKind::Rademacher:
        for (double& x : out) x = rng.coin() ? 1.0 : -1.0;
        return;
      case EnsembleKind::UniformSphere:
        sphere(rng, out, radius);
        return;
      case EnsembleKind::TwoSubsphere: {
        const std::size_t zero = rng.coin() ? 1 : 0;
        sphere(rng, out, radius, zero);
        return;
      }
      case EnsembleKind::AtomPlusSphere:
        if (rng.uniform() < atom_mass) {
          std::copy(atom_.begin(), atom_.end(), out.begin());
        } else {
          sphere(rng, out, radius);
        }
        return;
    }
  }

  friend bool operator==(const MeasurementEnsemble&, const MeasurementEnsemble&) = default;

 private:
  // Uniform on radius·S^{n−1}, optionally inside the hyperplane {x_skip = 0}.
  static void sphere(Rng& rng, std::span<double> out, double radius, std::size_t skip = SIZE_MAX) {
    double r = 0.0;
    do {
      for (std::size_t j = 0; j < out.size(); ++j) out[j] = j == skip ? 0.0 : rng.normal();
      r = norm2(out);
    } while (r == 0.0);
    for (double& x : out) x *= radius / r;
  }

  EnsembleKind kind_;
  std::size_t n_;
  Vector atom_;
};

struct MeasurementMatrix {
  Matrix rows;
  std::uint64_t seed = 0;
  MeasurementEnsemble ensemble;

  std::size_t m() const noexcept { return rows.rows(); }
  std::size_t n() const noexcept { return rows.cols(); }
};

inline constexpr std::size_t kRowChunk = 256;

/// m i.i.d. rows; row chunk c is drawn from derive_seed(seed, c).
inline MeasurementMatrix sample_matrix(const MeasurementEnsemble& ensemble, std::size_t m, std::uint64_t seed) {
  Matrix rows(m, ensemble.n());
  const std::size_t chunks = (m + kRowChunk - 1) / kRowChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng(derive_seed(seed, c));
    const std::size_t end = std::min(m, (c + 1) * kRowChunk);
    for (std::size_t i = c * kRowChunk; i < end; ++i) ensemble.sample(rng, rows.row(i));
  });
  return {std::move(rows), seed, ensemble};
}

/// Wraps an explicit matrix (fixed test instances, hand-built designs).
inline MeasurementMatrix fixed_matrix(Matrix rows) {
  MeasurementEnsemble label(EnsembleKind::Gaussian, std::max<std::size_t>(rows.cols(), 1));
  return {std::move(rows), 0, label};
}

namespace detail {

inline constexpr std::size_t kMarginalNodes = 2048;

// Unnormalized mass of φ ∈ [−π/2, phi] under cos^{n−2}φ, the law of the angle
// asin(⟨U, e⟩) for U uniform on S^{n−1}.
inline double sphere_angle_mass(double phi, std::size_t n) {
  const double p = static_cast<double>(n) - 2.0;
  return integrate([p](double x) { return std::pow(std::cos(x), p); }, -std::numbers::pi / 2, phi, kMarginalNodes);
}

}  // namespace detail

/// Normalizing constant c_n of the density c_n (1 − t²)^{(n−3)/2} of t = ⟨U, e⟩, obtained by quadrature.
inline double sphere_marginal_normalization(std::size_t n) {
  if (n < 2) throw DomainError("sphere marginal requires n >= 2");
  return 1.0 / detail::sphere_angle_mass(std::numbers::pi / 2, n);
}

/// P(⟨X,u⟩ ≤ s) for X uniform on √n·S^{n−1} and any unit u.
inline double sphere_marginal_cdf(double s, std::size_t n) {
  if (n < 2) throw DomainError("sphere marginal requires n >= 2");
  const double t = s / std::sqrt(static_cast<double>(n));
  if (t <= -1.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double total = detail::sphere_angle_mass(std::numbers::pi / 2, n);
  return std::clamp(detail::sphere_angle_mass(std::asin(t), n) / total, 0.0, 1.0);
}

/// Density of ⟨X,u⟩ at s for X uniform on √n·S^{n−1}.
inline double sphere_marginal_density(double s, std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  const double t = s / rn;
  if (t <= -1.0 || t >= 1.0) return 0.0;
  if (n == 2) return sphere_marginal_normalization(n) / (rn * std::sqrt(1.0 - t * t));
  return sphere_marginal_normalization(n) * std::pow(1.0 - t * t, (static_cast<double>(n) - 3.0) / 2.0) / rn;
}

inline void require_unit(std::span<const double> u, const char* what) {
  if (std::abs(norm2(u) - 1.0) > 1e-9) throw ConfigError(std::string(what) + ": vector must have unit norm");
}

/// Monte Carlo P(|⟨X,u⟩| ≤ δ); UniformSphere also carries the quadrature value.
inline McEstimate small_ball_prob(const MeasurementEnsemble& ensemble, std::span<const double> u, double delta,
                                  std::int64_t n_mc, std::uint64_t seed) {
  require_dimension(u.size(), ensemble.n(), "small_ball_prob");
  require_unit(u, "small_ball_prob");
  if (n_mc <= 0) throw ConfigError("small_ball_prob: n_mc must be positive");
  McEstimate est = mc_mean(n_mc, seed, [&, buffer = Vector(ensemble.n())](Rng& rng) mutable {
    ensemble.sample(rng, buffer);
    return std::abs(dot(buffer, u)) <= delta ? 1.0 : 0.0;
  });
  if (ensemble.kind() == EnsembleKind::UniformSphere && ensemble.n() >= 2)
    est.reference = sphere_marginal_cdf(delta, ensemble.n()) - sphere_marginal_cdf(-delta, ensemble.n());
  return est;
}

}  // namespace clipstab
