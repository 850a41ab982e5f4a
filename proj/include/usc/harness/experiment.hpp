#pragma once

#include <string>
#include <vector>

#include "usc/experts.hpp"
#include "usc/harness/config.hpp"
#include "usc/harness/trace.hpp"

namespace usc::harness {

// Generates the stream, runs USC over the configured pool plus every baseline,
// and computes the comparator and gradient variation.
RunTrace RunExperiment(const ExperimentConfig& cfg, const ExpertRegistry& registry);

// Parameter a baseline runs with: its explicit value, else the largest grid
// value not above the stream's true parameter. 0 for convex algorithms.
double BaselineParameter(const BaselineSpec& spec, const ExperimentConfig& cfg, const ExpertRegistry& registry);

// "2^8..2^14" (exponent step 2), "2^8..2^14/1" (explicit step) or "256,1024,4096".
std::vector<long> ParseHorizons(const std::string& text);

// ln T for strong and exp-concave streams, sqrt(T ln ln T) for convex ones,
// 1 for realizable streams (regret should stay bounded).
double ScalingNormalizer(const StreamConfig& stream, long horizon);

struct SweepPoint {
  long horizon = 0;
  std::vector<double> regrets;  // one per seed
  double median_regret = 0.0;
  double normalized = 0.0;  // median_regret / ScalingNormalizer
};

struct SweepOptions {
  std::vector<long> horizons;
  int seeds = 1;  // seeds cfg.seed, cfg.seed + 1, ...
  int jobs = 1;
};

struct SweepResult {
  StreamClass stream_class = StreamClass::kStrong;
  bool realizable = false;
  std::vector<SweepPoint> points;
  // max/min of the normalized medians; +inf if any is not positive.
  double spread = 0.0;
  bool pass = false;

  std::string Format() const;
};

double Median(std::vector<double> v);

// Realizable streams pass when the last step of the regret curve is at most
// 10% of the previous value plus 1; otherwise the spread must be at most 3.
SweepResult RunSweep(const ExperimentConfig& cfg, const ExpertRegistry& registry, const SweepOptions& options);
void WriteSweep(const std::string& dir, const SweepResult& result);

}  // namespace usc::harness
