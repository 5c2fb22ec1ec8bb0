#include <clipstab/ensembles.hpp>
#include <clipstab/parallel.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace clipstab;

TEST(SampleMatrix, UniformSphereRowNorms) {
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::UniformSphere, 5), 3, 42);
  ASSERT_EQ(x.m(), 3u);
  ASSERT_EQ(x.n(), 5u);
  for (std::size_t i = 0; i < x.m(); ++i) EXPECT_NEAR(norm2(x.rows.row(i)), std::sqrt(5.0), 1e-9 * std::sqrt(5.0));
  EXPECT_EQ(x.seed, 42u);
}

TEST(SampleMatrix, RademacherEntries) {
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::Rademacher, 4), 2, 1);
  for (double v : x.rows.data()) EXPECT_TRUE(v == 1.0 || v == -1.0);
}

TEST(SampleMatrix, ZeroRowsAllowed) {
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::Gaussian, 3), 0, 1);
  EXPECT_EQ(x.m(), 0u);
}

TEST(SampleMatrix, InvalidParameters) {
  EXPECT_THROW(MeasurementEnsemble(EnsembleKind::Gaussian, 0), ConfigError);
  EXPECT_THROW(MeasurementEnsemble(EnsembleKind::TwoSubsphere, 2), ConfigError);
  EXPECT_THROW(MeasurementEnsemble::atom_plus_sphere(Vector{0.0, 0.0}), ConfigError);
}

TEST(SampleMatrix, IsotropyOnTheTwoSphere) {
  // For n = 3 the coordinate t has E t² = 1/3, so E⟨X,e₁⟩² = 3·(1/3) = 1.
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::UniformSphere, 3), 1000000, 7);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.m(); ++i) acc += x.rows(i, 0) * x.rows(i, 0);
  EXPECT_NEAR(acc / static_cast<double>(x.m()), 1.0, 0.01);
}

TEST(SampleMatrix, Deterministic) {
  const MeasurementEnsemble e(EnsembleKind::AtomPlusSphere, 6);
  EXPECT_EQ(sample_matrix(e, 1000, 9).rows, sample_matrix(e, 1000, 9).rows);
  EXPECT_NE(sample_matrix(e, 1000, 9).rows, sample_matrix(e, 1000, 10).rows);
}

TEST(SampleMatrix, IndependentOfThreadCount) {
  const MeasurementEnsemble e(EnsembleKind::UniformSphere, 7);
  set_thread_count(1);
  const auto a = sample_matrix(e, 5000, 11);
  set_thread_count(4);
  const auto b = sample_matrix(e, 5000, 11);
  set_thread_count(0);
  EXPECT_EQ(a.rows, b.rows);
}

TEST(SampleMatrix, TwoSubsphereSupport) {
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::TwoSubsphere, 6), 20000, 3);
  std::size_t first = 0;
  for (std::size_t i = 0; i < x.m(); ++i) {
    const auto r = x.rows.row(i);
    EXPECT_NEAR(norm2(r), std::sqrt(6.0), 1e-9);
    EXPECT_TRUE(r[0] == 0.0 || r[1] == 0.0);
    if (r[0] == 0.0) ++first;
  }
  EXPECT_NEAR(static_cast<double>(first) / 20000.0, 0.5, 0.02);
}

TEST(SampleMatrix, AtomPlusSphereMass) {
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::AtomPlusSphere, 4), 20000, 5);
  std::size_t atoms = 0;
  for (std::size_t i = 0; i < x.m(); ++i)
    if (x.rows(i, 0) == 2.0 && x.rows(i, 1) == 0.0) ++atoms;
  EXPECT_NEAR(static_cast<double>(atoms) / 20000.0, 0.5, 0.02);
}

TEST(SphereMarginal, SupportBounds) {
  for (std::size_t n : {2u, 3u, 10u, 50u}) {
    EXPECT_EQ(sphere_marginal_cdf(std::sqrt(static_cast<double>(n)), n), 1.0);
    EXPECT_EQ(sphere_marginal_cdf(-std::sqrt(static_cast<double>(n)), n), 0.0);
    EXPECT_NEAR(sphere_marginal_cdf(0.0, n), 0.5, 1e-12);
  }
  EXPECT_THROW(sphere_marginal_cdf(0.0, 1), DomainError);
}

TEST(SphereMarginal, ThreeDimensionsIsUniform) {
  // On S² the coordinate is uniform on [−1, 1], so P(|⟨X,u⟩| ≤ s) = s/√3.
  const double p = sphere_marginal_cdf(0.9, 3) - sphere_marginal_cdf(-0.9, 3);
  EXPECT_NEAR(p, 0.9 / std::sqrt(3.0), 1e-12);
}

TEST(SphereMarginal, CircleIsArcsine) {
  const double s = 0.7;
  const double expected = 0.5 + std::asin(s / std::sqrt(2.0)) / std::numbers::pi;
  EXPECT_NEAR(sphere_marginal_cdf(s, 2), expected, 1e-12);
}

TEST(SphereMarginal, NormalizationMatchesGammaConstant) {
  for (std::size_t n : {3u, 5u, 10u, 20u, 50u}) {
    const double dn = static_cast<double>(n);
    const double gamma_form = std::exp(std::lgamma(dn / 2) - std::lgamma((dn - 1) / 2)) / std::sqrt(std::numbers::pi);
    EXPECT_NEAR(sphere_marginal_normalization(n), gamma_form, 1e-10 * gamma_form) << n;
  }
}

TEST(SphereMarginal, DensityIntegratesToCdf) {
  const std::size_t n = 10;
  double acc = 0.0;
  const int steps = 200000;
  const double lo = -1.5;
  const double hi = 0.8;
  for (int i = 0; i < steps; ++i) {
    const double s = lo + (i + 0.5) * (hi - lo) / steps;
    acc += sphere_marginal_density(s, n) * (hi - lo) / steps;
  }
  EXPECT_NEAR(acc, sphere_marginal_cdf(hi, n) - sphere_marginal_cdf(lo, n), 1e-8);
}

TEST(SphereMarginal, MatchesMonteCarloCdf) {
  const std::size_t n = 10;
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::UniformSphere, n), 1000000, 17);
  Vector proj(x.m());
  for (std::size_t i = 0; i < x.m(); ++i) proj[i] = x.rows(i, 3);
  std::sort(proj.begin(), proj.end());
  double sup = 0.0;
  for (std::size_t i = 0; i < proj.size(); i += 997) {
    const double emp = static_cast<double>(i + 1) / static_cast<double>(proj.size());
    sup = std::max(sup, std::abs(emp - sphere_marginal_cdf(proj[i], n)));
  }
  EXPECT_LE(sup, 0.01);
}

TEST(SmallBall, WholeSupport) {
  const std::size_t n = 6;
  Vector u(n, 0.0);
  u[2] = 1.0;
  const auto est = small_ball_prob(MeasurementEnsemble(EnsembleKind::UniformSphere, n), u, std::sqrt(6.0), 10000, 1);
  EXPECT_EQ(est.estimate, 1.0);
  ASSERT_TRUE(est.reference.has_value());
  EXPECT_EQ(*est.reference, 1.0);
}

TEST(SmallBall, ThreeDimensionalExactValue) {
  const auto est = small_ball_prob(MeasurementEnsemble(EnsembleKind::UniformSphere, 3), Vector{1, 0, 0}, 0.9, 1000000, 2);
  EXPECT_NEAR(est.estimate, 0.9 / std::sqrt(3.0), 0.002);
  EXPECT_NEAR(est.std_error, std::sqrt(0.5196 * 0.4804 / 1e6), 1e-5);
  EXPECT_EQ(est.n_mc, 1000000);
  EXPECT_EQ(est.seed, 2u);
}

TEST(SmallBall, AtomAlongItsOwnDirectionIsThinStrip) {
  const std::size_t n = 10;
  Vector u(n, 0.0);
  u[0] = 1.0;
  const MeasurementEnsemble e(EnsembleKind::AtomPlusSphere, n);
  const auto est = small_ball_prob(e, u, 0.01, 1000000, 3);
  const double strip = sphere_marginal_cdf(0.01, n) - sphere_marginal_cdf(-0.01, n);
  EXPECT_GE(est.estimate, 0.0);
  EXPECT_LT(est.estimate, 0.5);
  // only the spherical half contributes
  EXPECT_NEAR(est.estimate, 0.5 * strip, 4 * est.std_error + 1e-6);
}

TEST(SmallBall, RotationInvariance) {
  const std::size_t n = 8;
  const MeasurementEnsemble e(EnsembleKind::UniformSphere, n);
  Vector u(n, 0.0);
  u[0] = 1.0;
  Vector w(n, 1.0 / std::sqrt(8.0));
  const auto a = small_ball_prob(e, u, 0.3, 400000, 5);
  const auto b = small_ball_prob(e, w, 0.3, 400000, 6);
  EXPECT_LE(std::abs(a.estimate - b.estimate), 2.0 * std::hypot(a.std_error, b.std_error) + 1e-3);
}

TEST(SmallBall, TwoSubsphereViolatesAlongFirstAxis) {
  const std::size_t n = 10;
  Vector e1(n, 0.0);
  e1[0] = 1.0;
  for (double d : {1e-3, 1e-2, 0.1}) {
    const auto est = small_ball_prob(MeasurementEnsemble(EnsembleKind::TwoSubsphere, n), e1, d, 200000, 7);
    EXPECT_GE(est.estimate, 0.5 - 3 * est.std_error);
  }
}

TEST(SmallBall, Errors) {
  const MeasurementEnsemble e(EnsembleKind::Gaussian, 3);
  EXPECT_THROW(small_ball_prob(e, Vector{1, 0, 0}, 0.1, 0, 1), ConfigError);
  EXPECT_THROW(small_ball_prob(e, Vector{1, 1, 0}, 0.1, 10, 1), ConfigError);
  EXPECT_THROW(small_ball_prob(e, Vector{1, 0}, 0.1, 10, 1), ConfigError);
}

TEST(SmallBall, Deterministic) {
  const MeasurementEnsemble e(EnsembleKind::Rademacher, 5);
  const Vector u{0.6, 0.8, 0, 0, 0};
  EXPECT_EQ(small_ball_prob(e, u, 0.5, 50000, 1).estimate, small_ball_prob(e, u, 0.5, 50000, 1).estimate);
}

TEST(Ensemble, NamesRoundTrip) {
  for (auto k : {EnsembleKind::UniformSphere, EnsembleKind::Gaussian, EnsembleKind::Rademacher,
                 EnsembleKind::TwoSubsphere, EnsembleKind::AtomPlusSphere})
    EXPECT_EQ(parse_ensemble_kind(to_string(k)), k);
  EXPECT_THROW(parse_ensemble_kind("cauchy"), ConfigError);
}
