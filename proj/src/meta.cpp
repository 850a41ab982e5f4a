#include "usc/meta.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "usc/errors.hpp"

namespace usc {

double NormalizedExpertLoss(const Vector& gradient, const Vector& expert_point, const Vector& anchor,
                            double grad_bound, double diameter) {
  RequireSameDim(gradient, expert_point, "normalized loss");
  RequireSameDim(expert_point, anchor, "normalized loss");
  const double gd = grad_bound * diameter;
  const double value = (gradient.dot(expert_point - anchor) + gd) / (2.0 * gd);
  if (!(value >= -1e-12 && value <= 1.0 + 1e-12)) {
    throw AssumptionViolation("normalized linearized loss " + std::to_string(value) +
                              " outside [0, 1]: G or D is misconfigured");
  }
  return std::clamp(value, 0.0, 1.0);
}

double GammaConstant(long num_experts, long horizon) {
  if (num_experts < 2) throw ConfigError("Gamma needs at least two experts");
  if (horizon < 1) throw ConfigError("horizon must be ≥ 1");
  const double k = static_cast<double>(num_experts);
  const double t = static_cast<double>(horizon);
  return 3.0 * std::log(k) + std::log(1.0 + k / (2.0 * std::numbers::e) * (1.0 + std::log(t + 1.0)));
}

AdaptMlProd::AdaptMlProd(long num_experts, double grad_bound, double diameter, Vector anchor)
    : grad_bound_(grad_bound), diameter_(diameter), anchor_(std::move(anchor)) {
  if (num_experts < 2) {
    throw ConfigError("Adapt-ML-Prod needs at least two experts (ln|E| must be positive)");
  }
  if (!(grad_bound > 0.0) || !(diameter > 0.0)) throw ConfigError("G and D must be positive");
  RequireFinite(anchor_, "anchor");
  log_k_ = std::log(static_cast<double>(num_experts));
  const size_t n = static_cast<size_t>(num_experts);
  log_w_.assign(n, -log_k_);
  eta_.assign(n, std::min(0.5, std::sqrt(log_k_)));
  cum_sq_.assign(n, 0.0);
}

std::vector<double> AdaptMlProd::Weights() const {
  const size_t n = log_w_.size();
  std::vector<double> p(n);
  double top = -INFINITY;
  for (size_t i = 0; i < n; ++i) {
    p[i] = std::log(eta_[i]) + log_w_[i];
    top = std::max(top, p[i]);
  }
  double total = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    total += v;
  }
  if (!(total > 0.0) || !std::isfinite(total)) throw InvariantFailure("Adapt-ML-Prod: degenerate weights");
  for (double& v : p) v /= total;
  return p;
}

MetaRoundLosses AdaptMlProd::Update(const Vector& gradient, std::span<const Vector> expert_points,
                                    const Vector& aggregate) {
  const size_t n = log_w_.size();
  if (expert_points.size() != n) throw ContractViolation("meta update: wrong number of expert points");
  const long t = round_ + 1;
  if (!gradient.allFinite()) throw NumericError("meta update: non-finite gradient", t);

  MetaRoundLosses out;
  out.weights = Weights();
  out.expert_losses.resize(n);
  double mixed = 0.0;
  for (size_t i = 0; i < n; ++i) {
    out.expert_losses[i] = NormalizedExpertLoss(gradient, expert_points[i], anchor_, grad_bound_, diameter_);
    mixed += out.weights[i] * out.expert_losses[i];
  }
  out.meta_loss = NormalizedExpertLoss(gradient, aggregate, anchor_, grad_bound_, diameter_);
  if (std::abs(out.meta_loss - mixed) > 1e-10) {
    throw InvariantFailure("meta loss " + std::to_string(out.meta_loss) +
                           " differs from the weighted expert loss " + std::to_string(mixed) +
                           "; the aggregate is not the weighted average of the expert points");
  }

  for (size_t i = 0; i < n; ++i) {
    const double r = out.meta_loss - out.expert_losses[i];
    const double base = 1.0 + eta_[i] * r;
    if (!(base > 0.0)) throw InvariantFailure("Adapt-ML-Prod: nonpositive base in the weight recurrence");
    cum_sq_[i] += r * r;
    const double eta_next = std::min(0.5, std::sqrt(log_k_ / (1.0 + cum_sq_[i])));
    log_w_[i] = (eta_next / eta_[i]) * (log_w_[i] + std::log1p(eta_[i] * r));
    eta_[i] = eta_next;
    if (!std::isfinite(log_w_[i])) throw NumericError("Adapt-ML-Prod: non-finite log-weight", t);
  }
  round_ = t;
  return out;
}

}  // namespace usc
