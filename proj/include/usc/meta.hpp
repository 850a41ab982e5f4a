#pragma once

#include <span>
#include <vector>

#include "usc/geometry.hpp"

namespace usc {

// Linearized expert loss mapped into [0, 1]:
//   (<g, x_expert - anchor> + G D) / (2 G D).
// Throws AssumptionViolation when the value leaves [0, 1] by more than 1e-12,
// which means G or D understate the data.
double NormalizedExpertLoss(const Vector& gradient, const Vector& expert_point, const Vector& anchor,
                            double grad_bound, double diameter);

// 3 ln K + ln(1 + K/(2e) (1 + ln(T + 1))). Requires K >= 2.
double GammaConstant(long num_experts, long horizon);

struct MetaRoundLosses {
  std::vector<double> weights;        // p_t used this round
  std::vector<double> expert_losses;  // l_t^i
  double meta_loss = 0.0;             // l_t
};

// Adapt-ML-Prod over normalized linearized losses. The only per-round input is
// the gradient at the aggregate; the meta layer never sees the loss function.
//
// Weights are kept as logarithms.
class AdaptMlProd {
 public:
  AdaptMlProd(long num_experts, double grad_bound, double diameter, Vector anchor);

  long num_experts() const { return static_cast<long>(log_w_.size()); }
  long round() const { return round_; }
  const Vector& anchor() const { return anchor_; }

  // p_t^i proportional to eta_{t-1}^i w_{t-1}^i.
  std::vector<double> Weights() const;

  // Consumes g_t = grad f_t(x_t). `aggregate` must be the Weights()-weighted
  // average of `expert_points`.
  MetaRoundLosses Update(const Vector& gradient, std::span<const Vector> expert_points, const Vector& aggregate);

  const std::vector<double>& learning_rates() const { return eta_; }
  const std::vector<double>& log_weights() const { return log_w_; }
  const std::vector<double>& cumulative_squared_excess() const { return cum_sq_; }

 private:
  double grad_bound_;
  double diameter_;
  Vector anchor_;
  double log_k_;
  std::vector<double> log_w_;
  std::vector<double> eta_;
  std::vector<double> cum_sq_;
  long round_ = 0;
};

}  // namespace usc
