#include <clipstab/signal_sets.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace clipstab;

namespace {

std::size_t nnz(const Vector& x) {
  std::size_t k = 0;
  for (double v : x) k += v != 0.0;
  return k;
}

const SetKind kAllKinds[] = {SetKind::Ball, SetKind::Sphere, SetKind::SparseBall, SetKind::SparseSphere,
                             SetKind::EffSparseSphere};

}  // namespace

TEST(SignalSet, Validation) {
  EXPECT_THROW(SignalSet(SetKind::Ball, 0), ConfigError);
  EXPECT_THROW(SignalSet(SetKind::SparseBall, 5, 0), ConfigError);
  EXPECT_THROW(SignalSet(SetKind::SparseSphere, 5, 6), ConfigError);
  EXPECT_NO_THROW(SignalSet(SetKind::EffSparseSphere, 5, 5));
  EXPECT_EQ(SignalSet(SetKind::Ball, 4).s(), 4u);
}

TEST(SignalSet, NamesRoundTrip) {
  for (auto k : kAllKinds) EXPECT_EQ(parse_set_kind(to_string(k)), k);
  EXPECT_THROW(parse_set_kind("cube"), ConfigError);
}

TEST(Membership, Examples) {
  const SignalSet sb(SetKind::SparseBall, 4, 2);
  EXPECT_TRUE(membership(sb, Vector{0.6, 0.0, 0.0, 0.8}));
  EXPECT_FALSE(membership(sb, Vector{0.5, 0.5, 0.5, 0.0}));
  EXPECT_FALSE(membership(sb, Vector{1.0, 1.0, 0.0, 0.0}));
  const SignalSet es(SetKind::EffSparseSphere, 4, 2);
  EXPECT_TRUE(membership(es, Vector{0.5, 0.5, 0.5, 0.5}) == false);  // ‖x‖₁ = 2 > √2
  EXPECT_TRUE(membership(es, Vector{std::sqrt(0.5), std::sqrt(0.5), 0.0, 0.0}));
  EXPECT_THROW(membership(sb, Vector{1.0}), ConfigError);
}

TEST(SamplePoint, AlwaysMembers) {
  Rng rng(1);
  for (auto k : kAllKinds)
    for (bool biased : {false, true}) {
      const SignalSet set(k, 12, 3, biased);
      for (int i = 0; i < 2000; ++i) {
        const auto x = sample_point(set, rng);
        ASSERT_TRUE(membership(set, x, 1e-9)) << to_string(k);
      }
    }
}

TEST(SamplePoint, BallRadiusLaw) {
  // P(‖x‖ ≤ r) = r^n for the uniform ball.
  const SignalSet ball(SetKind::Ball, 3);
  Rng rng(2);
  int inside = 0;
  const int trials = 200000;
  for (int i = 0; i < trials; ++i) inside += norm2(sample_point(ball, rng)) <= 0.5;
  EXPECT_NEAR(inside / static_cast<double>(trials), 0.125, 0.003);
}

TEST(SamplePoint, SparseSupportSize) {
  Rng rng(3);
  const SignalSet set(SetKind::SparseSphere, 30, 4);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(nnz(sample_point(set, rng)), 4u);
}

TEST(SamplePoint, SeededIsDeterministic) {
  const SignalSet set(SetKind::EffSparseSphere, 10, 3, true);
  EXPECT_EQ(sample_point(set, 77), sample_point(set, 77));
}

TEST(Project, IdempotentAndFeasible) {
  Rng rng(4);
  for (auto k : kAllKinds) {
    const SignalSet set(k, 9, 3);
    for (int i = 0; i < 500; ++i) {
      Vector x(9);
      for (double& v : x) v = 3.0 * rng.normal();
      const auto p = project(set, x);
      ASSERT_TRUE(membership(set, p, 1e-9)) << to_string(k);
      const auto q = project(set, p);
      for (std::size_t j = 0; j < 9; ++j) ASSERT_NEAR(p[j], q[j], 1e-9) << to_string(k);
    }
  }
}

TEST(Project, NearestPointForExactKinds) {
  // No random member is closer than the projection.
  Rng rng(5);
  for (auto k : {SetKind::Ball, SetKind::Sphere, SetKind::SparseBall, SetKind::SparseSphere}) {
    const SignalSet set(k, 5, 2);
    for (int i = 0; i < 50; ++i) {
      Vector x(5);
      for (double& v : x) v = 2.0 * rng.normal();
      const double dp = distance(project(set, x), x);
      for (int j = 0; j < 200; ++j) ASSERT_GE(distance(sample_point(set, rng), x), dp - 1e-12) << to_string(k);
    }
  }
}

TEST(Project, ZeroVectorOnSphere) {
  const auto p = project(SignalSet(SetKind::Sphere, 3), Vector{0, 0, 0});
  EXPECT_EQ(p, (Vector{1, 0, 0}));
}

TEST(SamplePair, StrategiesProduceMembers) {
  Rng rng(6);
  const SignalSet ball(SetKind::Ball, 8);
  for (auto st : {PairStrategy::independent(), PairStrategy::nearby(0.01), PairStrategy::colinear(0.1),
                  PairStrategy::antipodal()}) {
    for (int i = 0; i < 500; ++i) {
      const auto [u, v] = sample_pair(ball, st, rng);
      ASSERT_TRUE(membership(ball, u));
      ASSERT_TRUE(membership(ball, v));
      ASSERT_GE(distance(u, v), kMinPairDistance);
    }
  }
}

TEST(SamplePair, ColinearAndAntipodalShapes) {
  const SignalSet ball(SetKind::Ball, 6);
  const auto [u, v] = sample_pair(ball, PairStrategy::colinear(0.25), 9);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(v[i], 0.75 * u[i]);
  const auto [a, b] = sample_pair(SignalSet(SetKind::Sphere, 6), PairStrategy::antipodal(), 9);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(b[i], -a[i]);
  EXPECT_NEAR(distance(a, b), 2.0, 1e-12);
}

TEST(SamplePair, NearbyIsClose) {
  Rng rng(7);
  const SignalSet sphere(SetKind::Sphere, 20);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto [u, v] = sample_pair(sphere, PairStrategy::nearby(1e-3), rng);
    worst = std::max(worst, distance(u, v));
  }
  EXPECT_LT(worst, 1e-2);
}

TEST(SamplePair, Errors) {
  EXPECT_THROW(sample_pair(SignalSet(SetKind::Sphere, 4), PairStrategy::colinear(0.1), 1), StrategyError);
  EXPECT_THROW(PairStrategy::colinear(0.0), ConfigError);
  EXPECT_THROW(PairStrategy::colinear(1.0), ConfigError);
  EXPECT_THROW(PairStrategy::nearby(0.0), ConfigError);
}

TEST(BuildNet, SeparatedAndCovering) {
  const SignalSet circle(SetKind::Sphere, 2);
  const auto net = build_net(circle, 0.5, 3, 2000);
  EXPECT_FALSE(net.partial);
  for (std::size_t i = 0; i < net.points.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) ASSERT_GE(distance(net.points[i], net.points[j]), 0.5);
  // A maximal 0.5-separated set on the circle has between ⌈2π/(2·0.5)⌉ − 1 and 2π/0.5 points.
  EXPECT_GE(net.points.size(), 6u);
  EXPECT_LE(net.points.size(), 13u);
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto x = sample_point(circle, rng);
    double best = 10.0;
    for (const auto& p : net.points) best = std::min(best, distance(p, x));
    EXPECT_LT(best, 0.5 + 1e-9);
  }
}

TEST(BuildNet, LargeEpsilonGivesFewPoints) {
  const auto net = build_net(SignalSet(SetKind::Sphere, 3), 1.5, 1, 500);
  EXPECT_GE(net.points.size(), 2u);
  EXPECT_LE(net.points.size(), 6u);
}

TEST(BuildNet, Errors) {
  const SignalSet s(SetKind::Sphere, 100);
  EXPECT_THROW(build_net(s, 0.1, 1, 10), ConfigError);
  EXPECT_THROW(build_net(SignalSet(SetKind::Sphere, 2), 0.0, 1, 10), ConfigError);
  EXPECT_THROW(build_net(SignalSet(SetKind::Sphere, 2), 2.5, 1, 10), ConfigError);
}

TEST(BuildNet, CapsMarkPartial) {
  const auto net = build_net(SignalSet(SetKind::Sphere, 3), 0.05, 1, 1000, 50);
  EXPECT_TRUE(net.partial);
  EXPECT_EQ(net.points.size(), 50u);
}
