#pragma once

#include <optional>
#include <string>
#include <vector>

#include "usc/experts.hpp"
#include "usc/geometry.hpp"
#include "usc/losses.hpp"

namespace usc::harness {

struct DomainSpec {
  std::string kind = "ball";   // ball | box
  std::vector<double> center;  // ball; defaults to the origin
  double radius = 1.0;
  std::vector<double> lower;  // box
  std::vector<double> upper;

  FeasibleSet Build(int dim) const;
};

// A standalone expert run next to USC. Without an explicit parameter, strong and
// exp-concave algorithms get the largest grid value not above the true parameter.
struct BaselineSpec {
  std::string name;
  std::optional<double> parameter;
};

struct ComparatorOptions {
  int pgd_iters = 2000;
  int starts = 8;
  // Grid cross-check resolution for dim <= 2; 0 disables it.
  double grid_resolution = 0.0;
};

struct ExperimentConfig {
  StreamConfig stream;
  DomainSpec domain;
  PoolSpec pool;
  double sogd_delta = 1.0;
  std::vector<BaselineSpec> baselines;
  ComparatorOptions comparator;
  std::string output_dir = "usc_out";
};

// Parses the sectioned key = value format:
//
//   # comment
//   [section]
//   key = value        value: number | true | false | "string" | bare-word | [v, v, ...]
//
// Sections and keys:
//   [stream]     class, dim, horizon, seed, parameter, grad_bound, huber_delta,
//                realizable, label_offset
//   [domain]     kind, center, radius, lower, upper
//   [pool]       strong, expconcave, convex (lists of algorithm names), sogd_delta
//   [baselines]  experts (list of "name" or "name:parameter")
//   [comparator] pgd_iters, starts, grid_resolution
//   [output]     dir
//
// Errors are ConfigError with "<source>:<line>: field '<key>': ..." diagnostics.
ExperimentConfig ParseConfig(const std::string& text, const std::string& source = "<config>");
ExperimentConfig LoadConfig(const std::string& path);

// Validates cross-field constraints (horizon, parameter range, registry names).
void ValidateConfig(const ExperimentConfig& cfg, const ExpertRegistry& registry);

}  // namespace usc::harness
