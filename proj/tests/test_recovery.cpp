#include <clipstab/recovery.hpp>
#include <clipstab/signal_sets.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace clipstab;

TEST(ObserveClipped, FlagsAndValues) {
  const auto x = fixed_matrix(Matrix(3, 1, {1.0, -2.0, 0.5}));
  const auto obs = observe_clipped(x, Vector{0.5}, ClipLevel(0.5));
  EXPECT_EQ(obs.values, (Vector{0.5, -0.5, 0.25}));
  EXPECT_EQ(obs.saturation_flags, (std::vector<int>{1, -1, 0}));
}

TEST(ConstraintResidual, ZeroForTruth) {
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::UniformSphere, 8), 200, 1);
  const Vector u = sample_point(SignalSet(SetKind::Ball, 8), 2);
  const auto obs = observe_clipped(x, u, ClipLevel(0.3));
  EXPECT_LE(constraint_residual(x, obs, u), 1e-15);
  EXPECT_GT(constraint_residual(x, obs, Vector(8, 0.0)), 0.0);
}

TEST(DeclipPocs, ExactWithoutClipping) {
  const std::size_t n = 6;
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::Gaussian, n), 30, 3);
  const Vector u = scaled(sample_point(SignalSet(SetKind::Sphere, n), 4), 0.7);
  const auto obs = observe_clipped(x, u, ClipLevel::unbounded());
  const auto res = declip_pocs(x, obs, 20000, 1e-12);
  EXPECT_TRUE(res.converged);
  EXPECT_LT(distance(res.x_hat, u), 1e-8);
}

TEST(DeclipPocs, FeasibleAndFejerMonotone) {
  const std::size_t n = 10;
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::UniformSphere, n), 400, 5);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Vector u = scaled(sample_point(SignalSet(SetKind::Ball, n), seed), 0.9);
    const auto obs = observe_clipped(x, u, ClipLevel(0.3));
    PocsOptions opt;
    opt.reference = u;
    const auto res = declip_pocs(x, obs, 2000, 1e-10, opt);
    EXPECT_EQ(res.fejer_violations, 0u);
    EXPECT_EQ(res.reference_distance.size(), res.sweeps + 1);
    EXPECT_LE(norm2(res.x_hat), 1.0 + 1e-12);
    EXPECT_LE(res.residual, 1e-6);
  }
}

TEST(DeclipPocs, ErrorsAndIterationCap) {
  const auto empty = fixed_matrix(Matrix(0, 2));
  EXPECT_THROW(declip_pocs(empty, ClippedObservation{}, 10, 1e-9), ConfigError);
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::Gaussian, 4), 20, 1);
  const auto obs = observe_clipped(x, Vector{0.5, 0.5, 0.0, 0.0}, ClipLevel(0.2));
  const auto res = declip_pocs(x, obs, 1, 1e-15);
  EXPECT_EQ(res.sweeps, 1u);
  EXPECT_FALSE(res.converged);
}

TEST(OneBit, RecoversDirection) {
  const std::size_t n = 10;
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::Gaussian, n), 100000, 6);
  const Vector u = sample_point(SignalSet(SetKind::Sphere, n), 7);
  const auto est = one_bit_estimate(x, sign_measurements(x, u));
  EXPECT_NEAR(norm2(est), 1.0, 1e-12);
  EXPECT_GT(dot(est, u), 0.99);
}

TEST(OneBit, Errors) {
  const auto x = fixed_matrix(Matrix(2, 2, {1.0, 0.0, 1.0, 0.0}));
  const std::vector<int> cancel{1, -1};
  EXPECT_THROW(one_bit_estimate(x, cancel), DegenerateError);
  const std::vector<int> bad{1, 0};
  EXPECT_THROW(one_bit_estimate(x, bad), ConfigError);
  const auto zero_row = fixed_matrix(Matrix(1, 2, {0.0, 0.0}));
  const std::vector<int> one{1};
  EXPECT_THROW(one_bit_estimate(zero_row, one), ConfigError);
}

TEST(SignMeasurements, TieGoesPositive) {
  const auto x = fixed_matrix(Matrix(2, 2, {1.0, 0.0, 0.0, 1.0}));
  EXPECT_EQ(sign_measurements(x, Vector{-1.0, 0.0}), (std::vector<int>{-1, 1}));
}
