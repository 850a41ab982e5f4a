#include <gtest/gtest.h>

#include <Eigen/LU>

#include <cmath>
#include <random>

#include "support/sampling.hpp"
#include "usc/errors.hpp"
#include "usc/losses.hpp"

namespace usc {
namespace {

using testing::SamplePoint;
using testing::V;

FeasibleSet UnitBall(int d) { return FeasibleSet::MakeBall(Vector::Zero(d), 1.0); }

StreamConfig Config(StreamClass c, double param, long horizon, std::uint64_t seed = 5, int dim = 3) {
  StreamConfig cfg;
  cfg.stream_class = c;
  cfg.dim = dim;
  cfg.horizon = horizon;
  cfg.seed = seed;
  cfg.true_parameter = param;
  cfg.grad_bound = 2.0;
  return cfg;
}

double FdRelativeError(const LossOracle& f, const Vector& x) {
  const double h = 1e-6 * (1.0 + x.norm());
  const Vector g = f.Gradient(x);
  Vector fd(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector a = x, b = x;
    a[i] += h;
    b[i] -= h;
    fd[i] = (f.Value(a) - f.Value(b)) / (2 * h);
  }
  return (fd - g).norm() / std::max(1.0, g.norm());
}

TEST(Huber, Branches) {
  EXPECT_DOUBLE_EQ(Huber(0.5, 1.0), 0.125);
  EXPECT_DOUBLE_EQ(Huber(-3.0, 1.0), 2.5);
  EXPECT_DOUBLE_EQ(HuberDerivative(-3.0, 1.0), -1.0);
  EXPECT_DOUBLE_EQ(HuberDerivative(0.25, 1.0), 0.25);
}

TEST(LossOracle, ClosedFormExamples) {
  const LossOracle q = LossOracle::Quadratic(1.0, V({0, 0}));
  EXPECT_EQ(q.Gradient(V({1, 0})), V({1, 0}));
  EXPECT_DOUBLE_EQ(q.Value(V({1, 0})), 0.5);

  const LossOracle s = LossOracle::SquaredLinear(V({1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(s.Value(V({0.5, 0})), 0.125);
  EXPECT_EQ(s.Gradient(V({0.5, 0})), V({0.5, 0}));

  const LossOracle h = LossOracle::HuberLinear(V({1, 0}), 0.0, 1.0);
  EXPECT_DOUBLE_EQ(h.Value(V({0.5, 0})), 0.125);
}

TEST(LossOracle, AddGradientToMatchesGradient) {
  const LossOracle h = LossOracle::HuberLinear(V({1, -2}), 0.3, 0.5);
  Vector acc = V({1, 1});
  h.AddGradientTo(V({0.4, -0.7}), 2.0, acc);
  EXPECT_LE((acc - (V({1, 1}) + 2.0 * h.Gradient(V({0.4, -0.7})))).norm(), 1e-15);
}

TEST(LossOracle, CustomLossHasNoClosedFormGap) {
  const LossOracle c = LossOracle::Custom({[](const Vector& x) { return x.squaredNorm(); },
                                           [](const Vector& x) { return Vector(2 * x); }},
                                          {});
  EXPECT_DOUBLE_EQ(c.Value(V({1, 2})), 5.0);
  EXPECT_FALSE(c.MaxGradientNorm(UnitBall(2)).has_value());
}

TEST(Generators, ParameterRange) {
  const FeasibleSet set = UnitBall(3);
  EXPECT_THROW(GenerateStronglyConvexStream(Config(StreamClass::kStrong, 1.5, 100), set), ParameterRangeError);
  EXPECT_THROW(GenerateStronglyConvexStream(Config(StreamClass::kStrong, 0.001, 100), set), ParameterRangeError);
  EXPECT_THROW(GenerateExpConcaveStream(Config(StreamClass::kExpConcave, 2.0, 100), set), ParameterRangeError);
  EXPECT_NO_THROW(GenerateStronglyConvexStream(Config(StreamClass::kStrong, 0.01, 100), set));
}

TEST(Generators, Deterministic) {
  const FeasibleSet set = UnitBall(3);
  for (StreamClass c : {StreamClass::kStrong, StreamClass::kExpConcave, StreamClass::kConvex}) {
    const LossStream a = GenerateStream(Config(c, 0.5, 200, 9), set);
    const LossStream b = GenerateStream(Config(c, 0.5, 200, 9), set);
    const LossStream other = GenerateStream(Config(c, 0.5, 200, 10), set);
    const Vector x = V({0.1, 0.2, -0.3});
    bool differs = false;
    for (size_t t = 0; t < a.size(); ++t) {
      EXPECT_EQ(a[t].Value(x), b[t].Value(x));
      EXPECT_EQ(a[t].Gradient(x), b[t].Gradient(x));
      differs = differs || a[t].Value(x) != other[t].Value(x);
    }
    EXPECT_TRUE(differs);
  }
}

class Witnesses : public ::testing::TestWithParam<StreamClass> {};

TEST_P(Witnesses, OraclesHonourTheirTags) {
  const StreamClass cls = GetParam();
  const FeasibleSet sets[] = {UnitBall(3), FeasibleSet::MakeBox(V({-1, 0, 0.5}), V({0, 2, 1}))};
  for (const FeasibleSet& set : sets) {
    StreamConfig cfg = Config(cls, cls == StreamClass::kStrong ? 0.5 : 1.0, 20, 17);
    const LossStream stream = GenerateStream(cfg, set);
    const double g_bound = cfg.grad_bound;
    const double d = set.diameter();
    std::mt19937_64 rng(99);
    for (const LossOracle& f : stream) {
      const LossClassTags& tags = f.tags();
      ASSERT_TRUE(tags.smoothness.has_value());
      ASSERT_TRUE(tags.nonnegative);
      const double h = *tags.smoothness;
      for (int k = 0; k < 300; ++k) {
        const Vector x = SamplePoint(rng, set);
        const Vector y = SamplePoint(rng, set);
        const Vector gx = f.Gradient(x);
        EXPECT_LE(FdRelativeError(f, x), 1e-5);
        EXPECT_GE(f.Value(x), 0.0);
        EXPECT_LE(gx.norm(), g_bound + 1e-12);
        EXPECT_LE(gx.norm(), std::sqrt(4.0 * h * f.Value(x)) + 1e-9);
        const double lin = f.Value(y) - f.Value(x) - gx.dot(y - x);
        EXPECT_GE(lin, -1e-12);
        const Vector m = 0.5 * (x + y);
        EXPECT_LE(f.Value(m), 0.5 * (f.Value(x) + f.Value(y)) + 1e-12);
        if (tags.strong_convexity) {
          EXPECT_GE(lin - 0.5 * *tags.strong_convexity * (y - x).squaredNorm(), -1e-12);
        }
        if (tags.exp_concavity) {
          const double a = *tags.exp_concavity;
          EXPECT_GE(std::exp(-a * f.Value(m)), 0.5 * (std::exp(-a * f.Value(x)) + std::exp(-a * f.Value(y))) - 1e-12);
          const double beta = 0.5 * std::min(1.0 / (4.0 * g_bound * d), a);
          const double ip = gx.dot(y - x);
          EXPECT_GE(lin - 0.5 * beta * ip * ip, -1e-10);
        }
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(AllClasses, Witnesses,
                         ::testing::Values(StreamClass::kStrong, StreamClass::kExpConcave, StreamClass::kConvex));

TEST(Generators, MonteCarloGradientBoundAndNonnegativity) {
  const FeasibleSet set = UnitBall(2);
  for (StreamClass c : {StreamClass::kStrong, StreamClass::kExpConcave, StreamClass::kConvex}) {
    StreamConfig cfg = Config(c, 1.0, 5, 3, 2);
    const LossStream stream = GenerateStream(cfg, set);
    std::mt19937_64 rng(1);
    for (const LossOracle& f : stream) {
      double max_norm = 0.0, min_value = INFINITY;
      for (int k = 0; k < 10000; ++k) {
        const Vector x = SamplePoint(rng, set);
        max_norm = std::max(max_norm, f.Gradient(x).norm());
        min_value = std::min(min_value, f.Value(x));
      }
      EXPECT_LE(max_norm, cfg.grad_bound);
      EXPECT_LE(max_norm, *f.MaxGradientNorm(set) + 1e-12);
      EXPECT_GE(min_value, 0.0);
    }
  }
}

TEST(Generators, StrongStreamKeepsCurvatureAndCenters) {
  const FeasibleSet set = UnitBall(2);
  const LossStream s = GenerateStronglyConvexStream(Config(StreamClass::kStrong, 0.25, 50, 2, 2), set);
  for (const LossOracle& f : s) {
    const auto& q = std::get<QuadraticLoss>(f.family());
    EXPECT_EQ(q.curvature, 0.25);
    EXPECT_TRUE(set.Contains(q.center));
  }
}

TEST(Generators, TooSmallGradBoundFailsLoudly) {
  StreamConfig cfg = Config(StreamClass::kStrong, 1.0, 10, 1, 2);
  cfg.grad_bound = 0.5;
  EXPECT_THROW(GenerateStronglyConvexStream(cfg, UnitBall(2)), AssumptionViolation);
}

TEST(Generators, RealizableStreamsShareAZeroLossPoint) {
  const FeasibleSet set = UnitBall(2);
  StreamConfig cfg = Config(StreamClass::kConvex, 1.0, 30, 4, 2);
  cfg.realizable = true;
  const LossStream s = GenerateConvexStream(cfg, set);
  // Two generic rounds pin the common zero.
  const auto& h0 = std::get<HuberLinearLoss>(s[0].family());
  const auto& h1 = std::get<HuberLinearLoss>(s[1].family());
  Eigen::Matrix2d a;
  a << h0.coef[0], h0.coef[1], h1.coef[0], h1.coef[1];
  const Vector z = a.lu().solve(Eigen::Vector2d(h0.target, h1.target));
  EXPECT_TRUE(set.Contains(z));
  for (const LossOracle& f : s) EXPECT_LE(f.Value(z), 1e-20);
}

TEST(Generators, LabelOffsetKeepsLinearBranch) {
  const FeasibleSet set = UnitBall(2);
  StreamConfig cfg = Config(StreamClass::kConvex, 1.0, 100, 8, 2);
  cfg.label_offset = 5.0;
  const LossStream s = GenerateConvexStream(cfg, set);
  std::mt19937_64 rng(2);
  for (const LossOracle& f : s) {
    const auto& h = std::get<HuberLinearLoss>(f.family());
    for (int k = 0; k < 50; ++k) {
      EXPECT_GT(std::abs(h.coef.dot(SamplePoint(rng, set)) - h.target), h.delta);
    }
  }
}

TEST(MaxGradientGap, QuadraticClosedForm) {
  const FeasibleSet set = UnitBall(2);
  const LossOracle a = LossOracle::Quadratic(0.5, V({0.2, 0.1}));
  const LossOracle b = LossOracle::Quadratic(0.5, V({-0.3, 0.4}));
  EXPECT_NEAR(*MaxGradientGap(a, &b, set), 0.5 * (V({0.2, 0.1}) - V({-0.3, 0.4})).norm(), 1e-15);
  EXPECT_NEAR(*MaxGradientGap(a, nullptr, set), 0.5 * (1.0 + V({0.2, 0.1}).norm()), 1e-15);
}

TEST(MaxGradientGap, UpperBoundsSampledGap) {
  const FeasibleSet set = FeasibleSet::MakeBox(V({-1, -1}), V({1, 0.5}));
  std::mt19937_64 rng(4);
  for (StreamClass c : {StreamClass::kStrong, StreamClass::kExpConcave, StreamClass::kConvex}) {
    const LossStream s = GenerateStream(Config(c, 0.5, 20, 6, 2), set);
    for (size_t t = 1; t < s.size(); ++t) {
      const double bound = *MaxGradientGap(s[t], &s[t - 1], set);
      for (int k = 0; k < 500; ++k) {
        const Vector x = SamplePoint(rng, set);
        EXPECT_LE((s[t].Gradient(x) - s[t - 1].Gradient(x)).norm(), bound + 1e-12);
      }
    }
  }
}

TEST(StreamClass, ParseRoundTrip) {
  for (StreamClass c : {StreamClass::kStrong, StreamClass::kExpConcave, StreamClass::kConvex}) {
    EXPECT_EQ(ParseStreamClass(ToString(c)), c);
  }
  EXPECT_THROW(ParseStreamClass("weird"), ConfigError);
}

}  // namespace
}  // namespace usc
