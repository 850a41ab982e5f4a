#include "usc/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "usc/errors.hpp"
#include "usc/harness/comparator.hpp"
#include "usc/learner.hpp"

namespace usc::harness {
namespace {

ExpertDescriptor Describe(const Expert& e) {
  return {e.info().name, e.info().expert_class, e.info().assumed_parameter};
}

long ParseHorizonToken(const std::string& raw) {
  std::string s = raw;
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; }), s.end());
  try {
    size_t used = 0;
    if (s.rfind("2^", 0) == 0) {
      const long k = std::stol(s.substr(2), &used);
      if (used != s.size() - 2 || k < 0 || k > 40) throw ConfigError("");
      return 1L << k;
    }
    const long v = std::stol(s, &used);
    if (used != s.size()) throw ConfigError("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("horizons: cannot parse '" + raw + "'");
  }
}

int Log2Exact(long v, const std::string& text) {
  int k = 0;
  while ((1L << k) < v) ++k;
  if ((1L << k) != v) throw ConfigError("horizons: range ends must be powers of two in '" + text + "'");
  return k;
}

}  // namespace

double BaselineParameter(const BaselineSpec& spec, const ExperimentConfig& cfg, const ExpertRegistry& registry) {
  const ExpertRegistry::Entry& entry = registry.Get(spec.name);
  if (entry.expert_class == ExpertClass::kConvex) return 0.0;
  if (spec.parameter) return *spec.parameter;
  return BuildGrid(cfg.stream.horizon).SelectAtMost(cfg.stream.true_parameter);
}

RunTrace RunExperiment(const ExperimentConfig& cfg, const ExpertRegistry& registry) {
  ValidateConfig(cfg, registry);
  const FeasibleSet set = cfg.domain.Build(cfg.stream.dim);
  const LossStream stream = GenerateStream(cfg.stream, set);
  const long horizon = cfg.stream.horizon;

  ExpertContext ctx{set, cfg.stream.grad_bound, 1.0, 512, {}};
  ctx.sogd_delta = cfg.sogd_delta;

  RunTrace tr;
  tr.stream_class = cfg.stream.stream_class;
  tr.true_parameter = cfg.stream.true_parameter;
  tr.grad_bound = cfg.stream.grad_bound;
  tr.diameter = set.diameter();
  tr.horizon = horizon;
  tr.dim = cfg.stream.dim;

  auto pool = BuildExpertPool(registry, cfg.pool, horizon, ctx);
  for (const auto& e : pool) tr.experts.push_back(Describe(*e));

  UscLearner learner(std::move(pool), set, cfg.stream.grad_bound);
  tr.usc_loss.reserve(horizon);
  tr.grad_norm.reserve(horizon);
  tr.meta_linloss.reserve(horizon);
  tr.expert_loss.reserve(horizon);
  tr.expert_linloss.reserve(horizon);
  tr.expert_weight.reserve(horizon);
  for (const LossOracle& f : stream) {
    RoundRecord r = learner.Step(f);
    tr.usc_loss.push_back(r.loss_value);
    tr.grad_norm.push_back(r.gradient_norm);
    tr.meta_linloss.push_back(r.meta_linloss);
    tr.expert_loss.push_back(std::move(r.expert_losses));
    tr.expert_linloss.push_back(std::move(r.expert_linloss));
    tr.expert_weight.push_back(std::move(r.weights));
  }

  for (const BaselineSpec& b : cfg.baselines) {
    const double param = BaselineParameter(b, cfg, registry);
    auto expert = registry.Create(b.name, ctx, param);
    double total = 0.0;
    for (const LossOracle& f : stream) {
      total += f.Value(expert->Predict());
      expert->Update(f);
    }
    tr.baselines.push_back({Describe(*expert), total, 0.0});
  }

  const ComparatorResult cmp = FindComparator(stream, set, cfg.comparator, cfg.stream.seed);
  tr.comparator_loss = cmp.loss;
  tr.x_star = cmp.x_star;
  tr.comparator_gradient_mapping = cmp.gradient_mapping_norm;
  tr.comparator_round_loss.reserve(horizon);
  for (const LossOracle& f : stream) tr.comparator_round_loss.push_back(f.Value(cmp.x_star));
  for (BaselineResult& b : tr.baselines) b.regret = b.cumulative_loss - tr.comparator_loss;

  tr.variation_term = GradientVariationTerms(stream, set);
  double h = 0.0;
  for (const LossOracle& f : stream) {
    if (!f.tags().smoothness) {
      h = 0.0;
      break;
    }
    h = std::max(h, *f.tags().smoothness);
  }
  tr.smoothness = h;
  return tr;
}

std::vector<long> ParseHorizons(const std::string& text) {
  std::vector<long> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    std::string hi_text = text.substr(dots + 2);
    int step = 2;
    const auto slash = hi_text.find('/');
    if (slash != std::string::npos) {
      step = static_cast<int>(ParseHorizonToken(hi_text.substr(slash + 1)));
      hi_text = hi_text.substr(0, slash);
    }
    const long lo = ParseHorizonToken(text.substr(0, dots));
    const long hi = ParseHorizonToken(hi_text);
    if (step < 1 || lo < 1 || hi < lo) throw ConfigError("horizons: bad range '" + text + "'");
    const int a = Log2Exact(lo, text), b = Log2Exact(hi, text);
    for (int k = a; k <= b; k += step) out.push_back(1L << k);
  } else {
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(ParseHorizonToken(tok));
  }
  if (out.empty()) throw ConfigError("horizons: empty list");
  for (long t : out) {
    if (t < 1) throw ConfigError("horizon must be ≥ 1");
  }
  return out;
}

double ScalingNormalizer(const StreamConfig& stream, long horizon) {
  const double t = static_cast<double>(horizon);
  if (stream.realizable) return 1.0;
  if (stream.stream_class == StreamClass::kConvex) return std::sqrt(t * std::log(std::log(t)));
  return std::log(t);
}

double Median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

SweepResult RunSweep(const ExperimentConfig& cfg, const ExpertRegistry& registry, const SweepOptions& options) {
  if (options.horizons.empty()) throw ConfigError("sweep: no horizons");
  if (options.seeds < 1) throw ConfigError("sweep: --multi-seed must be ≥ 1");
  const size_t hs = options.horizons.size();
  const size_t seeds = static_cast<size_t>(options.seeds);
  std::vector<ExperimentConfig> jobs;
  for (long h : options.horizons) {
    for (size_t s = 0; s < seeds; ++s) {
      ExperimentConfig c = cfg;
      c.stream.horizon = h;
      c.stream.seed = cfg.stream.seed + s;
      ValidateConfig(c, registry);
      jobs.push_back(std::move(c));
    }
  }

  std::vector<double> regrets(jobs.size());
  std::atomic<size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr error;
  auto worker = [&] {
    for (size_t j = next++; j < jobs.size(); j = next++) {
      try {
        regrets[j] = RunExperiment(jobs[j], registry).UscRegret();
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(options.jobs, static_cast<int>(jobs.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  SweepResult res;
  res.stream_class = cfg.stream.stream_class;
  res.realizable = cfg.stream.realizable;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (size_t k = 0; k < hs; ++k) {
    SweepPoint p;
    p.horizon = options.horizons[k];
    p.regrets.assign(regrets.begin() + k * seeds, regrets.begin() + (k + 1) * seeds);
    p.median_regret = Median(p.regrets);
    p.normalized = p.median_regret / ScalingNormalizer(cfg.stream, p.horizon);
    lo = std::min(lo, p.normalized);
    hi = std::max(hi, p.normalized);
    res.points.push_back(std::move(p));
  }
  res.spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (res.realizable) {
    const double last = res.points.back().median_regret;
    const double prev = hs >= 2 ? res.points[hs - 2].median_regret : last;
    res.pass = last - prev <= 0.1 * std::abs(prev) + 1.0;
  } else {
    res.pass = res.spread <= 3.0;
  }
  return res;
}

std::string SweepResult::Format() const {
  std::ostringstream out;
  const char* norm = realizable ? "1" : (stream_class == StreamClass::kConvex ? "sqrt(T lnln T)" : "ln T");
  out << "stream " << ToString(stream_class) << (realizable ? " (realizable)" : "") << ", normalizer " << norm
      << '\n';
  out << "horizon  median_regret  normalized\n";
  for (const SweepPoint& p : points) {
    out << p.horizon << "  " << FormatNumber(p.median_regret) << "  " << FormatNumber(p.normalized) << '\n';
  }
  if (realizable) {
    out << (pass ? "PASS" : "FAIL") << "  regret curve flattens\n";
  } else {
    out << (pass ? "PASS" : "FAIL") << "  spread " << FormatNumber(spread) << " (limit 3)\n";
  }
  return out.str();
}

void WriteSweep(const std::string& dir, const SweepResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  const std::string path = (std::filesystem::path(dir) / "sweep.csv").string();
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "horizon,median_regret,normalized";
  const size_t seeds = result.points.empty() ? 0 : result.points.front().regrets.size();
  for (size_t s = 0; s < seeds; ++s) out << ",regret_seed" << s;
  out << '\n';
  for (const SweepPoint& p : result.points) {
    out << p.horizon << ',' << FormatNumber(p.median_regret) << ',' << FormatNumber(p.normalized);
    for (double r : p.regrets) out << ',' << FormatNumber(r);
    out << '\n';
  }
}

}  // namespace usc::harness
