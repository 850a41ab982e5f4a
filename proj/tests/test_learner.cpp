#include <gtest/gtest.h>

#include <cmath>

#include "support/sampling.hpp"
#include "usc/errors.hpp"
#include "usc/learner.hpp"

namespace usc {
namespace {

using testing::V;

const PoolSpec kFullPool{{"ogd_strong", "oegd_strong"}, {"ons"}, {"ogd_convex", "sogd"}};

FeasibleSet UnitBall(int d) { return FeasibleSet::MakeBall(Vector::Zero(d), 1.0); }

LossStream Stream(StreamClass c, long horizon, std::uint64_t seed, const FeasibleSet& set) {
  StreamConfig cfg;
  cfg.stream_class = c;
  cfg.dim = set.dim();
  cfg.horizon = horizon;
  cfg.seed = seed;
  cfg.true_parameter = 0.5;
  cfg.grad_bound = 2.0;
  return GenerateStream(cfg, set);
}

UscLearner MakeLearner(const FeasibleSet& set, long horizon, std::optional<Vector> anchor = std::nullopt,
                       const PoolSpec& spec = kFullPool) {
  const ExpertRegistry reg = ExpertRegistry::WithBuiltins();
  return UscLearner(BuildExpertPool(reg, spec, horizon, ExpertContext{set, 2.0, 1.0, 512, {}}), set, 2.0,
                    std::move(anchor));
}

TEST(Learner, FirstRoundPlaysCenter) {
  const FeasibleSet set = FeasibleSet::MakeBox(V({0, 1}), V({2, 2}));
  UscLearner l = MakeLearner(set, 50);
  EXPECT_EQ(l.Predict(), set.center());
  const RoundRecord r = l.Step(Stream(StreamClass::kStrong, 2, 1, set)[0]);
  EXPECT_EQ(r.x, set.center());
  EXPECT_EQ(r.t, 1);
}

TEST(Learner, IdenticalExpertPointsGiveThatPointExactly) {
  const FeasibleSet set = UnitBall(2);
  const ExpertRegistry reg = ExpertRegistry::WithBuiltins();
  std::vector<std::unique_ptr<Expert>> pool;
  for (int i = 0; i < 3; ++i) pool.push_back(reg.Create("ogd_strong", ExpertContext{set, 2.0}, 0.25));
  UscLearner l(std::move(pool), set, 2.0);
  for (const LossOracle& f : Stream(StreamClass::kStrong, 100, 3, set)) {
    const RoundRecord r = l.Step(f);
    ASSERT_EQ(r.x, r.expert_points[0]);
  }
}

TEST(Learner, EmptyStream) {
  UscLearner l = MakeLearner(UnitBall(2), 10);
  EXPECT_TRUE(l.Run({}).empty());
  EXPECT_EQ(l.round(), 0);
}

TEST(Learner, ZeroGradientLossesStayAtCenter) {
  const FeasibleSet set = UnitBall(2);
  UscLearner l = MakeLearner(set, 20);
  const LossOracle flat = LossOracle::Custom(
      {[](const Vector&) { return 1.0; }, [](const Vector& x) { return Vector(Vector::Zero(x.size())); }}, {});
  for (const RoundRecord& r : l.Run(LossStream(20, flat))) EXPECT_EQ(r.x, set.center());
}

TEST(Learner, RoundConsistency) {
  const FeasibleSet set = UnitBall(3);
  for (StreamClass c : {StreamClass::kStrong, StreamClass::kExpConcave, StreamClass::kConvex}) {
    const LossStream s = Stream(c, 400, 4, set);
    UscLearner l = MakeLearner(set, 400);
    for (const LossOracle& f : s) {
      const RoundRecord r = l.Step(f);
      ASSERT_TRUE(set.Contains(r.x));
      ASSERT_EQ(r.loss_value, f.Value(r.x));
      ASSERT_EQ(r.gradient_norm, f.Gradient(r.x).norm());
      double s_p = 0.0, mixed = 0.0;
      Vector avg = Vector::Zero(3);
      for (size_t i = 0; i < r.weights.size(); ++i) {
        s_p += r.weights[i];
        mixed += r.weights[i] * r.expert_linloss[i];
        avg += r.weights[i] * r.expert_points[i];
        ASSERT_GE(r.expert_linloss[i], 0.0);
        ASSERT_LE(r.expert_linloss[i], 1.0);
        ASSERT_EQ(r.expert_losses[i], f.Value(r.expert_points[i]));
      }
      ASSERT_NEAR(s_p, 1.0, 1e-12);
      ASSERT_NEAR(mixed, r.meta_linloss, 1e-10);
      ASSERT_LE((avg - r.x).norm(), 1e-12);
      ASSERT_EQ(r.gradient_queries, 1 + static_cast<int>(l.num_experts()));
    }
  }
}

TEST(Learner, DeterministicReruns) {
  const FeasibleSet set = UnitBall(2);
  const LossStream s = Stream(StreamClass::kStrong, 100, 6, set);
  UscLearner a = MakeLearner(set, 100), b = MakeLearner(set, 100);
  const auto ra = a.Run(s), rb = b.Run(s);
  ASSERT_EQ(ra.size(), rb.size());
  for (size_t t = 0; t < ra.size(); ++t) {
    ASSERT_EQ(ra[t].x, rb[t].x);
    ASSERT_EQ(ra[t].weights, rb[t].weights);
    ASSERT_EQ(ra[t].expert_linloss, rb[t].expert_linloss);
  }
}

TEST(Learner, AnchorInvariance) {
  const FeasibleSet set = UnitBall(2);
  const LossStream s = Stream(StreamClass::kConvex, 2000, 7, set);
  UscLearner a = MakeLearner(set, 2000), b = MakeLearner(set, 2000, V({0.3, -0.5}));
  double worst = 0.0;
  for (const LossOracle& f : s) {
    const RoundRecord ra = a.Step(f), rb = b.Step(f);
    for (size_t i = 0; i < ra.weights.size(); ++i) worst = std::max(worst, std::abs(ra.weights[i] - rb.weights[i]));
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Learner, SingleExpertBypassesMeta) {
  const FeasibleSet set = UnitBall(2);
  const LossStream s = Stream(StreamClass::kStrong, 200, 8, set);
  UscLearner l = MakeLearner(set, 200, std::nullopt, PoolSpec{{}, {}, {"sogd"}});
  EXPECT_EQ(l.meta(), nullptr);
  Sogd alone(ExpertContext{set, 2.0});
  for (const LossOracle& f : s) {
    const RoundRecord r = l.Step(f);
    ASSERT_EQ(r.x, alone.Predict());
    ASSERT_EQ(r.weights, std::vector<double>{1.0});
    alone.Update(f);
  }
}

TEST(Learner, RejectsBadSetup) {
  const FeasibleSet set = UnitBall(2);
  EXPECT_THROW(UscLearner({}, set, 2.0), ConfigError);
  EXPECT_THROW(MakeLearner(set, 10, V({3, 0})), ConfigError);
}

TEST(Learner, NonFiniteLossAbortsWithRound) {
  const FeasibleSet set = UnitBall(2);
  UscLearner l = MakeLearner(set, 10);
  l.Step(Stream(StreamClass::kStrong, 2, 1, set)[0]);
  const LossOracle bad =
      LossOracle::Custom({[](const Vector&) { return NAN; }, [](const Vector& x) { return Vector(x); }}, {});
  try {
    l.Step(bad);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_EQ(e.round(), 2);
  }
}

}  // namespace
}  // namespace usc
