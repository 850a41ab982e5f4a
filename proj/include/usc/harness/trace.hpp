#pragma once

#include <string>
#include <vector>

#include "usc/experts.hpp"
#include "usc/geometry.hpp"
#include "usc/losses.hpp"

namespace usc::harness {

struct ExpertDescriptor {
  std::string name;
  ExpertClass expert_class = ExpertClass::kConvex;
  double parameter = 0.0;
};

struct BaselineResult {
  ExpertDescriptor expert;
  double cumulative_loss = 0.0;
  double regret = 0.0;
};

// Everything a finished run produced, in the form that is written to and read
// back from the CSV outputs. Per-expert matrices are indexed [round][expert].
struct RunTrace {
  StreamClass stream_class = StreamClass::kStrong;
  double true_parameter = 0.0;
  double grad_bound = 0.0;
  double diameter = 0.0;
  long horizon = 0;
  int dim = 0;
  double smoothness = 0.0;  // max_t H_t, 0 if unknown
  double comparator_loss = 0.0;
  Vector x_star;
  double comparator_gradient_mapping = 0.0;
  std::vector<ExpertDescriptor> experts;

  std::vector<double> usc_loss;
  std::vector<double> grad_norm;
  std::vector<double> comparator_round_loss;
  std::vector<double> meta_linloss;
  std::vector<double> variation_term;
  std::vector<std::vector<double>> expert_loss;
  std::vector<std::vector<double>> expert_linloss;
  std::vector<std::vector<double>> expert_weight;

  std::vector<BaselineResult> baselines;

  long rounds() const { return static_cast<long>(usc_loss.size()); }
  size_t num_experts() const { return experts.size(); }
  double UscCumulativeLoss() const;
  // Regret against the final comparator. May be negative.
  double UscRegret() const;
  double ExpertCumulativeLoss(size_t i) const;
  double ExpertRegret(size_t i) const;
  double SumSquaredGradients() const;
  double GradientVariation() const;
  // Regret of the first `t` rounds against the fixed comparator.
  std::vector<double> UscCumulativeRegretCurve() const;
};

double WeightEntropy(const std::vector<double>& p);
// Index of the largest weight; ties go to the lowest index.
size_t TopExpert(const std::vector<double>& p);

// Writes trace.csv, experts.csv, pool.csv, baselines.csv and summary.csv into `dir`
// (created if missing). Numbers use %.12e.
void WriteTrace(const std::string& dir, const RunTrace& trace);
RunTrace ReadTrace(const std::string& dir);

std::string FormatNumber(double v);

}  // namespace usc::harness
