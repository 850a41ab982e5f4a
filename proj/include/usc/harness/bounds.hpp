#pragma once

#include <string>
#include <vector>

#include "usc/harness/trace.hpp"

namespace usc::harness {

// Right-hand sides of the regret guarantees. `best_expert_regret` is the
// measured regret of the best expert of the relevant class.

// best + 2 Gamma G D (2 + 1/sqrt(ln K)) + Gamma^2 G^2 / (2 lambda ln K)
double StronglyConvexBound(double best_expert_regret, long num_experts, long horizon, double grad_bound,
                           double diameter, double lambda);
// beta = min(1/(4 G D), alpha) / 2
double ExpConcaveBeta(double grad_bound, double diameter, double alpha);
// best + 2 Gamma G D (2 + 1/sqrt(ln K)) + Gamma^2 / (2 beta ln K)
double ExpConcaveBound(double best_expert_regret, long num_experts, long horizon, double grad_bound,
                       double diameter, double alpha);
// best + 4 Gamma G D + (Gamma D / sqrt(ln K)) sqrt(4 G^2 + sum_t ||g_t||^2)
double ConvexBound(double best_expert_regret, long num_experts, long horizon, double grad_bound, double diameter,
                   double sum_sq_gradients);
// m (8G^2/lambda + 32 G^2) ln(2 lambda V / G^2 + 2) + D^2 (2 lambda + 1) / 32 with
// m = log(512 H^2 (1 + 4 lambda) + 1) / log(2 lambda V / G^2 + 2) + 1.
double OegdStrongBound(double grad_bound, double diameter, double lambda, double smoothness, double variation);

// Adapt-ML-Prod guarantee for one expert over a prefix of length t:
// (Gamma(K, t) / sqrt(ln K)) sqrt(1 + sum r^2) + 2 Gamma(K, t).
double SecondOrderBound(long num_experts, long prefix, double sum_sq_excess);

struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = true;
  bool skipped = false;
  std::string detail;

  // rhs / lhs; +inf when lhs <= 0.
  double SlackRatio() const;
};

struct BoundReport {
  std::vector<BoundCheck> checks;
  std::vector<std::string> warnings;

  bool AllPass() const;
  std::string Format() const;
};

struct VerifyOptions {
  // Exact double comparison. Otherwise lhs may exceed rhs by 1e-9 * max(1, |rhs|).
  bool strict = false;
};

// Worst case over experts and prefixes of the Adapt-ML-Prod second-order bound.
BoundCheck CheckSecondOrder(const RunTrace& trace, const VerifyOptions& options = {});
// Linearized meta-regret bound sum_t <g_t, x_t - x_t^i> against the full horizon.
BoundCheck CheckLinearizedMetaRegret(const RunTrace& trace, const VerifyOptions& options = {});

// Runs every check applicable to the trace's stream class.
BoundReport VerifyBounds(const RunTrace& trace, const VerifyOptions& options = {});

}  // namespace usc::harness
