#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include "support/sampling.hpp"
#include "usc/errors.hpp"
#include "usc/harness/bounds.hpp"
#include "usc/harness/comparator.hpp"
#include "usc/harness/config.hpp"
#include "usc/harness/experiment.hpp"
#include "usc/harness/trace.hpp"
#include "usc/meta.hpp"

namespace usc::harness {
namespace {

namespace fs = std::filesystem;
using testing::V;

const char* kStrongConfig = R"(
# comment line
[stream]
class = "strong"
dim = 2
horizon = 2^9
seed = 3
parameter = 0.5
grad_bound = 2.0

[domain]
kind = ball
radius = 1.0

[pool]
strong = ["ogd_strong", "oegd_strong"]
expconcave = ["ons"]
convex = ["ogd_convex", "sogd"]   # trailing comment

[baselines]
experts = ["oegd_strong", "ogd_strong:0.25", "sogd"]

[output]
dir = "somewhere"
)";

fs::path TempDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("usc_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string ConfigErrorText(const std::string& text) {
  try {
    ParseConfig(text, "cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, ParsesAllSections) {
  const ExperimentConfig cfg = ParseConfig(kStrongConfig, "cfg");
  EXPECT_EQ(cfg.stream.stream_class, StreamClass::kStrong);
  EXPECT_EQ(cfg.stream.horizon, 512);
  EXPECT_EQ(cfg.stream.seed, 3u);
  EXPECT_EQ(cfg.stream.true_parameter, 0.5);
  EXPECT_EQ(cfg.domain.kind, "ball");
  EXPECT_EQ(cfg.pool.convex, (std::vector<std::string>{"ogd_convex", "sogd"}));
  ASSERT_EQ(cfg.baselines.size(), 3u);
  EXPECT_FALSE(cfg.baselines[0].parameter.has_value());
  EXPECT_EQ(*cfg.baselines[1].parameter, 0.25);
  EXPECT_EQ(cfg.output_dir, "somewhere");
  EXPECT_NO_THROW(ValidateConfig(cfg, ExpertRegistry::WithBuiltins()));
}

TEST(Config, DiagnosticsNameLineAndField) {
  EXPECT_NE(ConfigErrorText("[stream]\nhorizon = abc\n").find("cfg:2: field 'stream.horizon'"), std::string::npos);
  EXPECT_NE(ConfigErrorText("[stream]\n\nbogus = 1\n").find("cfg:3: field 'stream.bogus': unknown key"),
            std::string::npos);
  EXPECT_NE(ConfigErrorText("[pool]\nconvex = sogd\n").find("field 'pool.convex'"), std::string::npos);
  EXPECT_NE(ConfigErrorText("horizon = 1\n").find("cfg:1"), std::string::npos);
  EXPECT_NE(ConfigErrorText("[stream]\nseed = 1\nseed = 2\n").find("set twice"), std::string::npos);
  EXPECT_NE(ConfigErrorText("[nope]\nx = 1\n").find("unknown section"), std::string::npos);
}

TEST(Config, ValidationMessages) {
  const ExpertRegistry reg = ExpertRegistry::WithBuiltins();
  ExperimentConfig cfg = ParseConfig(kStrongConfig);
  cfg.stream.horizon = 0;
  try {
    ValidateConfig(cfg, reg);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_STREQ(e.what(), "horizon must be ≥ 1");
  }
  cfg = ParseConfig(kStrongConfig);
  cfg.pool.convex.push_back("adagrad");
  EXPECT_THROW(ValidateConfig(cfg, reg), ConfigError);
  cfg = ParseConfig(kStrongConfig);
  cfg.stream.true_parameter = 2.0;
  EXPECT_THROW(ValidateConfig(cfg, reg), ConfigError);
}

TEST(Comparator, CommonMinimizer) {
  const FeasibleSet set = FeasibleSet::MakeBall(V({0, 0}), 1.0);
  const LossStream s(50, LossOracle::Quadratic(1.0, V({0.3, -0.2})));
  const ComparatorResult r = FindComparator(s, set, {}, 1);
  EXPECT_LE((r.x_star - V({0.3, -0.2})).norm(), 1e-12);
  EXPECT_LE(r.loss, 1e-24);
}

TEST(Comparator, TwoCentersGiveProjectedMidpoint) {
  const FeasibleSet set = FeasibleSet::MakeBall(V({0, 0}), 1.0);
  const LossStream s = {LossOracle::Quadratic(1.0, V({0.9, 0.9})), LossOracle::Quadratic(1.0, V({0.9, 0.5}))};
  const ComparatorResult r = FindComparator(s, set, {}, 1);
  EXPECT_LE((r.x_star - Project(set, V({0.9, 0.7}))).norm(), 1e-12);
}

TEST(Comparator, MatchesGridSearch) {
  const FeasibleSet set = FeasibleSet::MakeBall(V({0, 0}), 1.0);
  for (StreamClass c : {StreamClass::kStrong, StreamClass::kExpConcave, StreamClass::kConvex}) {
    StreamConfig cfg;
    cfg.stream_class = c;
    cfg.dim = 2;
    cfg.horizon = 100;
    cfg.seed = 31;
    cfg.true_parameter = 0.5;
    cfg.grad_bound = 2.0;
    const LossStream s = GenerateStream(cfg, set);
    ComparatorOptions opts;
    opts.grid_resolution = 1e-3;
    const ComparatorResult r = FindComparator(s, set, opts, 2);
    ASSERT_TRUE(r.grid_checked);
    EXPECT_LE((r.grid_x_star - r.x_star).norm(), 1e-3) << ToString(c);
    EXPECT_LE(r.loss, r.grid_loss + 1e-12);
  }
}

TEST(GradientVariation, IdenticalLossesOnlyCountFirstRound) {
  const FeasibleSet set = FeasibleSet::MakeBall(V({0, 0}), 1.0);
  const LossOracle f = LossOracle::Quadratic(0.5, V({0.2, 0.1}));
  const LossStream s(30, f);
  const double first = *f.MaxGradientNorm(set);
  EXPECT_NEAR(GradientVariation(s, set), first * first, 1e-15);
}

TEST(GradientVariation, AlternatingCenters) {
  const FeasibleSet set = FeasibleSet::MakeBall(V({0, 0}), 1.0);
  const double lambda = 0.7;
  const Vector a = V({0.5, 0}), b = V({-0.1, 0.4});
  LossStream s;
  for (int t = 0; t < 41; ++t) s.push_back(LossOracle::Quadratic(lambda, t % 2 ? b : a));
  const double first = lambda * (1.0 + a.norm());
  const double expect = first * first + lambda * lambda * (a - b).squaredNorm() * 40;
  EXPECT_NEAR(GradientVariation(s, set), expect, 1e-12);
  double prev = 0.0, acc = 0.0;
  for (double v : GradientVariationTerms(s, set)) {
    acc += v;
    EXPECT_GE(acc, prev);
    prev = acc;
  }
}

ExperimentConfig SmallConfig(StreamClass c, long horizon, double param = 0.5) {
  ExperimentConfig cfg = ParseConfig(kStrongConfig);
  cfg.stream.stream_class = c;
  cfg.stream.horizon = horizon;
  cfg.stream.true_parameter = param;
  cfg.baselines.clear();
  return cfg;
}

TEST(Trace, RegretIdentityAndRoundTrip) {
  const ExpertRegistry reg = ExpertRegistry::WithBuiltins();
  ExperimentConfig cfg = ParseConfig(kStrongConfig);
  const RunTrace tr = RunExperiment(cfg, reg);
  EXPECT_EQ(tr.UscRegret(), tr.UscCumulativeLoss() - tr.comparator_loss);
  ASSERT_EQ(tr.baselines.size(), 3u);
  EXPECT_EQ(tr.baselines[0].expert.parameter, 0.5);
  EXPECT_EQ(tr.baselines[1].expert.parameter, 0.25);
  for (const auto& b : tr.baselines) EXPECT_EQ(b.regret, b.cumulative_loss - tr.comparator_loss);

  const fs::path dir = TempDir("roundtrip");
  WriteTrace(dir.string(), tr);
  const RunTrace back = ReadTrace(dir.string());
  ASSERT_EQ(back.rounds(), tr.rounds());
  ASSERT_EQ(back.num_experts(), tr.num_experts());
  EXPECT_EQ(back.experts[3].name, tr.experts[3].name);
  for (long t = 0; t < tr.rounds(); t += 37) {
    EXPECT_NEAR(back.usc_loss[t], tr.usc_loss[t], 1e-11 * std::max(1.0, tr.usc_loss[t]));
    EXPECT_NEAR(back.expert_linloss[t][5], tr.expert_linloss[t][5], 1e-12);
  }
  EXPECT_NEAR(back.UscRegret(), tr.UscRegret(), 1e-8);
  EXPECT_TRUE(VerifyBounds(back).AllPass());

  std::ifstream head(dir / "trace.csv");
  std::string line;
  std::getline(head, line);
  EXPECT_EQ(line, "t,usc_loss,usc_cumregret,grad_norm,weight_entropy,top_expert_id,top_expert_weight");
  fs::remove_all(dir);
}

TEST(Trace, DeterministicCsv) {
  const ExpertRegistry reg = ExpertRegistry::WithBuiltins();
  const ExperimentConfig cfg = SmallConfig(StreamClass::kStrong, 100);
  const fs::path a = TempDir("det_a"), b = TempDir("det_b");
  WriteTrace(a.string(), RunExperiment(cfg, reg));
  WriteTrace(b.string(), RunExperiment(cfg, reg));
  for (const char* f : {"trace.csv", "experts.csv", "pool.csv", "summary.csv", "baselines.csv"}) {
    EXPECT_EQ(Slurp(a / f), Slurp(b / f)) << f;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Trace, WeightHelpers) {
  EXPECT_NEAR(WeightEntropy({0.5, 0.5}), std::log(2.0), 1e-15);
  EXPECT_EQ(WeightEntropy({1.0, 0.0}), 0.0);
  EXPECT_EQ(TopExpert({0.2, 0.4, 0.4}), 1u);
  EXPECT_EQ(FormatNumber(0.1), "1.000000000000e-01");
}

TEST(Bounds, DegenerateSymmetricRun) {
  const ExpertRegistry reg = ExpertRegistry::WithBuiltins();
  ExperimentConfig cfg = SmallConfig(StreamClass::kStrong, 200);
  cfg.stream.realizable = true;
  cfg.pool = PoolSpec{{}, {}, {"ogd_convex"}};
  // Two copies of the same algorithm under different names.
  ExpertRegistry twins = reg;
  twins.Register("ogd_convex_b", ExpertClass::kConvex,
                 [](const ExpertContext& c, double) { return std::make_unique<OgdConvex>(c); });
  cfg.pool.convex.push_back("ogd_convex_b");
  const RunTrace tr = RunExperiment(cfg, twins);
  const BoundReport rep = VerifyBounds(tr);
  EXPECT_TRUE(rep.AllPass());
  for (const BoundCheck& c : rep.checks) {
    if (!c.skipped) EXPECT_GE(c.SlackRatio(), 1.0) << c.name;
  }
  for (const auto& w : tr.expert_weight) EXPECT_EQ(w[0], w[1]);
}

TEST(Bounds, StrongFixtureAllChecksPass) {
  const ExpertRegistry reg = ExpertRegistry::WithBuiltins();
  ExperimentConfig cfg = SmallConfig(StreamClass::kStrong, 4096);
  cfg.pool = PoolSpec{{"ogd_strong", "oegd_strong"}, {}, {"ogd_convex"}};
  const RunTrace tr = RunExperiment(cfg, reg);
  const BoundReport rep = VerifyBounds(tr, {true});
  EXPECT_TRUE(rep.AllPass()) << rep.Format();
  std::set<std::string> names;
  for (const BoundCheck& c : rep.checks) {
    if (!c.skipped) names.insert(c.name.substr(0, c.name.find('[')));
  }
  for (const char* n : {"adapt_ml_prod_second_order", "linearized_meta_regret", "usc_strongly_convex", "usc_convex",
                        "oegd_strong"}) {
    EXPECT_TRUE(names.count(n)) << n;
  }
}

TEST(Bounds, ConvexFixtureBoundPasses) {
  const ExpertRegistry reg = ExpertRegistry::WithBuiltins();
  ExperimentConfig cfg = SmallConfig(StreamClass::kConvex, 4096);
  cfg.stream.label_offset = 5.0;
  const BoundReport rep = VerifyBounds(RunExperiment(cfg, reg), {true});
  bool seen = false;
  for (const BoundCheck& c : rep.checks) {
    if (c.name == "usc_convex") {
      seen = true;
      EXPECT_TRUE(c.pass);
    }
  }
  EXPECT_TRUE(seen);
  EXPECT_TRUE(rep.AllPass());
}

TEST(Bounds, InflatedLossIsCaught) {
  const ExpertRegistry reg = ExpertRegistry::WithBuiltins();
  RunTrace tr = RunExperiment(SmallConfig(StreamClass::kStrong, 256), reg);
  for (double& v : tr.usc_loss) v += 10.0;
  const BoundReport rep = VerifyBounds(tr);
  EXPECT_FALSE(rep.AllPass());
}

TEST(Bounds, SingleExpertSkipsMetaChecks) {
  const ExpertRegistry reg = ExpertRegistry::WithBuiltins();
  ExperimentConfig cfg = SmallConfig(StreamClass::kStrong, 64);
  cfg.pool = PoolSpec{{}, {}, {"sogd"}};
  const BoundReport rep = VerifyBounds(RunExperiment(cfg, reg));
  EXPECT_TRUE(rep.AllPass());
  EXPECT_TRUE(rep.checks[0].skipped);
}

TEST(Bounds, FormulasByHand) {
  const double gamma = GammaConstant(4, 100);
  const double lnk = std::log(4.0);
  EXPECT_NEAR(StronglyConvexBound(1.0, 4, 100, 2.0, 3.0, 0.5),
              1.0 + 2 * gamma * 6.0 * (2 + 1 / std::sqrt(lnk)) + gamma * gamma * 4.0 / (2 * 0.5 * lnk), 1e-12);
  const double beta = 0.5 * std::min(1.0 / 24.0, 0.1);
  EXPECT_EQ(ExpConcaveBeta(2.0, 3.0, 0.1), beta);
  EXPECT_NEAR(ExpConcaveBound(1.0, 4, 100, 2.0, 3.0, 0.1),
              1.0 + 2 * gamma * 6.0 * (2 + 1 / std::sqrt(lnk)) + gamma * gamma / (2 * beta * lnk), 1e-12);
  EXPECT_NEAR(ConvexBound(1.0, 4, 100, 2.0, 3.0, 50.0),
              1.0 + 4 * gamma * 6.0 + gamma * 3.0 / std::sqrt(lnk) * std::sqrt(16.0 + 50.0), 1e-12);
  const double inner = 2 * 0.5 * 7.0 / 4.0 + 2;
  const double m = std::log(512.0 * 1.0 * (1 + 2.0) + 1) / std::log(inner) + 1;
  EXPECT_NEAR(OegdStrongBound(2.0, 3.0, 0.5, 1.0, 7.0), m * (64.0 + 128.0) * std::log(inner) + 9.0 * 2.0 / 32.0,
              1e-9);
}

TEST(Sweep, HorizonParsing) {
  EXPECT_EQ(ParseHorizons("2^8..2^14"), (std::vector<long>{256, 1024, 4096, 16384}));
  EXPECT_EQ(ParseHorizons("2^2..2^5/1"), (std::vector<long>{4, 8, 16, 32}));
  EXPECT_EQ(ParseHorizons("100, 2^3"), (std::vector<long>{100, 8}));
  EXPECT_THROW(ParseHorizons("2^3..100"), ConfigError);
  EXPECT_THROW(ParseHorizons("0"), ConfigError);
  EXPECT_THROW(ParseHorizons("x"), ConfigError);
}

TEST(Sweep, MedianAndNormalizer) {
  EXPECT_EQ(Median({3, 1, 2}), 2.0);
  EXPECT_EQ(Median({4, 1, 2, 3}), 2.5);
  StreamConfig s;
  s.stream_class = StreamClass::kConvex;
  EXPECT_NEAR(ScalingNormalizer(s, 1024), std::sqrt(1024 * std::log(std::log(1024.0))), 1e-12);
  s.stream_class = StreamClass::kStrong;
  EXPECT_NEAR(ScalingNormalizer(s, 1024), std::log(1024.0), 1e-15);
}

TEST(Sweep, ParallelMatchesSerial) {
  const ExpertRegistry reg = ExpertRegistry::WithBuiltins();
  const ExperimentConfig cfg = SmallConfig(StreamClass::kStrong, 64);
  SweepOptions serial{{64, 128}, 3, 1};
  SweepOptions parallel{{64, 128}, 3, 3};
  const SweepResult a = RunSweep(cfg, reg, serial);
  const SweepResult b = RunSweep(cfg, reg, parallel);
  ASSERT_EQ(a.points.size(), 2u);
  for (size_t k = 0; k < 2; ++k) EXPECT_EQ(a.points[k].regrets, b.points[k].regrets);
}

}  // namespace
}  // namespace usc::harness
