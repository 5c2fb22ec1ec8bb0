#include <clipstab/stability.hpp>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>

using namespace clipstab;

namespace {

// Smallest eigenvalue of XᵀX/m, the infimum of the unclipped squared functional.
double smallest_gram_eigenvalue(const MeasurementMatrix& x) {
  Eigen::MatrixXd a(x.m(), x.n());
  for (std::size_t i = 0; i < x.m(); ++i)
    for (std::size_t j = 0; j < x.n(); ++j) a(i, j) = x.rows(i, j);
  const Eigen::MatrixXd g = a.transpose() * a / static_cast<double>(x.m());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().minCoeff();
}

StabilityFunctional clip_functional(double lambda, Normalization norm = Normalization::SquaredDistance) {
  return {Nonlinearity::Clip, ClipLevel(lambda), norm};
}

}  // namespace

TEST(FunctionalValue, HandComputed) {
  const auto x = fixed_matrix(Matrix(2, 2, {1.0, 0.0, 0.0, 1.0}));
  const Vector u{0.5, 0.0};
  const Vector v{0.0, 0.0};
  // clip at 0.3: rows give (0.3 − 0)² and 0, mean 0.045, divided by 0.25
  EXPECT_NEAR(functional_value(x, u, v, clip_functional(0.3)), 0.18, 1e-15);
  EXPECT_NEAR(functional_value(x, u, v, clip_functional(0.3, Normalization::Distance)), 0.09, 1e-15);
  const StabilityFunctional sign{Nonlinearity::Sign, ClipLevel::unbounded(), Normalization::Distance};
  // sign(0.5) = sign(0) = +1, sign(0) = sign(0) on the second row
  EXPECT_EQ(functional_value(x, u, v, sign), 0.0);
  EXPECT_EQ(functional_value(x, Vector{-0.5, 0.0}, v, sign), 4.0 / 2.0 / 0.5);
}

TEST(FunctionalValue, IdentityMatrixExample) {
  const auto x = fixed_matrix(Matrix(2, 2, {1.0, 0.0, 0.0, 1.0}));
  EXPECT_DOUBLE_EQ(functional_value(x, Vector{1.0, 0.0}, Vector{0.0, 1.0}, clip_functional(0.5)), 0.125);
}

TEST(FunctionalValue, NoClippingGivesFrameQuotient) {
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::Gaussian, 4), 50, 2);
  const Vector u{0.1, -0.2, 0.3, 0.0};
  const Vector v{0.0, 0.1, 0.2, -0.1};
  const Vector w = subtract(u, v);
  const Vector xw = multiply(x.rows, w);
  const double quotient = dot(xw, xw) / 50.0 / dot(w, w);
  EXPECT_NEAR(functional_value(x, u, v, clip_functional(1e9)), quotient, 1e-12 * quotient);
}

TEST(FunctionalValue, ClipNeverExceedsUnclipped) {
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::UniformSphere, 6), 100, 3);
  const SignalSet ball(SetKind::Ball, 6);
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const auto [u, v] = sample_pair(ball, PairStrategy::independent(), rng);
    const double l = std::exp(rng.uniform(std::log(0.01), std::log(2.0)));
    EXPECT_LE(functional_value(x, u, v, clip_functional(l)), functional_value(x, u, v, clip_functional(1e300)) * (1 + 1e-12));
  }
}

TEST(ColinearLimit, ConvergesAsEpsilonShrinks) {
  // Once no row crosses ±λ between u and (1−ε)u the pair value equals the limit
  // up to rounding, which grows like 1/ε.
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::UniformSphere, 10), 400, 11);
  const SignalSet ball(SetKind::Ball, 10);
  const ClipLevel l(0.2);
  const StabilityFunctional f{Nonlinearity::Clip, l, Normalization::SquaredDistance};
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    const Vector u = sample_point(ball, rng);
    const double limit = colinear_limit_value(x, u, l);
    for (double eps : {1e-4, 1e-6}) {
      const double gap = std::abs(functional_value(x, u, scaled(u, 1.0 - eps), f) - limit);
      EXPECT_LE(gap, 1e-8 * std::max(limit, 1e-6)) << "eps " << eps;
    }
  }
}

TEST(WorstPairSearch, RankOneMatrixHasZeroInfimum) {
  const std::size_t n = 4;
  Matrix rows(10, n);
  for (std::size_t i = 0; i < 10; ++i) rows(i, 0) = 2.0;
  const auto est = worst_pair_search(fixed_matrix(rows), SignalSet(SetKind::Ball, n), clip_functional(1.0), 2000, 1);
  EXPECT_LE(est.value, 1e-6);
}

TEST(WorstPairSearch, UnclippedSphereMatchesEigenvalueOracle) {
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::Gaussian, 5), 30, 21);
  const double lmin = smallest_gram_eigenvalue(x);
  const auto est = worst_pair_search(x, SignalSet(SetKind::Sphere, 5), clip_functional(1e6), 10000, 22);
  EXPECT_GE(est.value, lmin * (1.0 - 1e-9));
  EXPECT_LE(est.value, lmin * 1.05);
}

TEST(FunctionalValue, Errors) {
  const auto x = fixed_matrix(Matrix(1, 2, {1.0, 0.0}));
  EXPECT_THROW(functional_value(x, Vector{0.1, 0.0}, Vector{0.1, 0.0}, clip_functional(1.0)), DegenerateError);
  EXPECT_THROW(functional_value(x, Vector{0.1}, Vector{0.1, 0.0}, clip_functional(1.0)), ConfigError);
  const auto empty = fixed_matrix(Matrix(0, 2));
  EXPECT_THROW(functional_value(empty, Vector{0.1, 0.0}, Vector{0.0, 0.0}, clip_functional(1.0)), DegenerateError);
}

TEST(ColinearLimit, MatchesSmallEpsilon) {
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::UniformSphere, 10), 400, 3);
  const SignalSet ball(SetKind::Ball, 10);
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const Vector u = sample_point(ball, rng);
    const ClipLevel l(0.2);
    const double limit = colinear_limit_value(x, u, l);
    const double near = functional_value(x, u, scaled(u, 1.0 - 1e-7), {Nonlinearity::Clip, l, Normalization::SquaredDistance});
    EXPECT_NEAR(near, limit, 1e-3 * std::max(limit, 1e-3));
  }
}

TEST(ColinearLimit, Errors) {
  const auto x = fixed_matrix(Matrix(1, 2, {1.0, 0.0}));
  EXPECT_THROW(colinear_limit_value(x, Vector{0.0, 0.0}, ClipLevel(1.0)), DegenerateError);
  EXPECT_THROW(colinear_limit_value(x, Vector{1.0, 1.0}, ClipLevel(1.0)), ConfigError);
}

TEST(WorstPairSearch, UnclippedMatchesEigenvalueOracle) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::Gaussian, 6), 40, seed);
    const double lmin = smallest_gram_eigenvalue(x);
    const auto est = worst_pair_search(x, SignalSet(SetKind::Ball, 6), clip_functional(1e6), 4000, seed);
    EXPECT_GE(est.value, lmin * (1.0 - 1e-9));
    EXPECT_LE(est.value, lmin * 1.05 + 1e-9) << "seed " << seed;
  }
}

TEST(WorstPairSearch, ValueIsAttainedByReturnedPair) {
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::UniformSphere, 8), 300, 5);
  const SignalSet ball(SetKind::Ball, 8);
  const auto f = clip_functional(0.2);
  const auto est = worst_pair_search(x, ball, f, 2000, 9);
  EXPECT_TRUE(membership(ball, est.u));
  EXPECT_TRUE(membership(ball, est.v));
  EXPECT_EQ(est.value, functional_value(x, est.u, est.v, f));
  EXPECT_GT(est.evaluations, 0);
  EXPECT_FALSE(est.strategy_breakdown.empty());
  for (const auto& s : est.strategy_breakdown) EXPECT_GE(s.value, est.value);
}

TEST(WorstPairSearch, Deterministic) {
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::UniformSphere, 8), 300, 5);
  const SignalSet ball(SetKind::Ball, 8);
  const auto a = worst_pair_search(x, ball, clip_functional(0.2), 2000, 9);
  set_thread_count(3);
  const auto b = worst_pair_search(x, ball, clip_functional(0.2), 2000, 9);
  set_thread_count(0);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.v, b.v);
}

TEST(WorstPairSearch, BeatsRandomPairs) {
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::UniformSphere, 10), 500, 6);
  const SignalSet ball(SetKind::Ball, 10);
  const auto f = clip_functional(0.15);
  const auto est = worst_pair_search(x, ball, f, 3000, 2);
  Rng rng(8);
  for (int i = 0; i < 2000; ++i)
    for (auto st : {PairStrategy::independent(), PairStrategy::colinear(0.01)}) {
      const auto [u, v] = sample_pair(ball, st, rng);
      EXPECT_LE(est.value, functional_value(x, u, v, f) * (1 + 1e-12));
    }
}

TEST(WorstPairSearch, RespectsMaxDistance) {
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::UniformSphere, 6), 200, 7);
  SearchOptions opt;
  opt.max_distance = 0.1;
  const auto est = worst_pair_search(x, SignalSet(SetKind::Sphere, 6), {Nonlinearity::Fold, ClipLevel(0.2), Normalization::SquaredDistance},
                                     2000, 3, opt);
  EXPECT_LE(distance(est.u, est.v), 0.1 * (1 + 1e-12));
  EXPECT_GE(distance(est.u, est.v), kMinPairDistance);
}

TEST(WorstPairSearch, SphereAvoidsColinearStrategy) {
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::UniformSphere, 5), 100, 1);
  const auto est = worst_pair_search(x, SignalSet(SetKind::Sphere, 5), clip_functional(0.3), 500, 1);
  for (const auto& s : est.strategy_breakdown) EXPECT_NE(s.name, "colinear");
}

TEST(WorstPairSearch, SparseSetsStaySparse) {
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::UniformSphere, 30), 300, 4);
  const SignalSet set(SetKind::SparseBall, 30, 3);
  const auto est = worst_pair_search(x, set, clip_functional(0.2), 1000, 4);
  EXPECT_TRUE(membership(set, est.u));
  EXPECT_TRUE(membership(set, est.v));
}

TEST(WorstPairSearch, Errors) {
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::UniformSphere, 5), 10, 1);
  EXPECT_THROW(worst_pair_search(x, SignalSet(SetKind::Ball, 4), clip_functional(0.3), 100, 1), ConfigError);
  EXPECT_THROW(worst_pair_search(x, SignalSet(SetKind::Ball, 5), clip_functional(0.3), 0, 1), ConfigError);
}

TEST(ExpectedSharpness, MonotoneInLambdaAndBoundedByOne) {
  const auto est = expected_sharpness_scan(10, {0.05, 0.1, 0.2, 0.5, 100.0}, 200, 200, 3);
  ASSERT_EQ(est.size(), 5u);
  for (std::size_t k = 1; k < est.size(); ++k) EXPECT_GE(est[k].estimate, est[k - 1].estimate);
  // with no clipping E⟨X,u⟩² = 1
  EXPECT_NEAR(est.back().estimate, 1.0, 5 * est.back().std_error + 1e-3);
}

TEST(ExpectedSharpness, CubicSmallLambdaLaw) {
  // For the sphere marginal density ρ(0)·2λ³/3 is the small-λ leading term.
  const std::size_t n = 20;
  const double lambda = 0.02;
  const auto est = expected_sharpness_scan(n, {lambda}, 2000, 500, 4);
  const double rho0 = sphere_marginal_density(0.0, n);
  const double lead = rho0 * 2.0 * lambda * lambda * lambda / 3.0;
  EXPECT_NEAR(est[0].estimate, lead, 4 * est[0].std_error + 0.01 * lead);
}
