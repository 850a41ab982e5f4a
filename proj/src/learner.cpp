#include "usc/learner.hpp"

#include <cmath>

#include "usc/errors.hpp"

namespace usc {

UscLearner::UscLearner(std::vector<std::unique_ptr<Expert>> experts, FeasibleSet set, double grad_bound,
                       std::optional<Vector> anchor)
    : experts_(std::move(experts)), set_(std::move(set)), grad_bound_(grad_bound) {
  if (experts_.empty()) throw ConfigError("USC needs at least one expert");
  for (const auto& e : experts_) {
    if (!e) throw ConfigError("USC: null expert");
    if (e->Predict().size() != set_.dim()) throw ConfigError("USC: expert dimension mismatch");
  }
  Vector a = anchor.value_or(set_.center());
  if (!set_.Contains(a)) throw ConfigError("USC: anchor must lie in the feasible set");
  if (experts_.size() >= 2) {
    meta_.emplace(static_cast<long>(experts_.size()), grad_bound, set_.diameter(), std::move(a));
  }
}

std::vector<double> UscLearner::Weights() const {
  if (meta_) return meta_->Weights();
  return {1.0};
}

namespace {

// Weighted sum, or the common point when all experts agree.
Vector Aggregate(const std::vector<Vector>& points, const std::vector<double>& weights) {
  bool identical = true;
  for (size_t i = 1; i < points.size() && identical; ++i) identical = points[i] == points[0];
  if (identical) return points[0];
  Vector x = Vector::Zero(points[0].size());
  for (size_t i = 0; i < points.size(); ++i) x.noalias() += weights[i] * points[i];
  return x;
}

}  // namespace

Vector UscLearner::Predict() const {
  std::vector<Vector> points;
  for (const auto& e : experts_) points.push_back(e->Predict());
  return Aggregate(points, Weights());
}

RoundRecord UscLearner::Step(const LossOracle& f) {
  RoundRecord rec;
  rec.t = round_ + 1;
  rec.weights = Weights();

  const size_t n = experts_.size();
  rec.expert_points.reserve(n);
  for (const auto& e : experts_) rec.expert_points.push_back(e->Predict());

  rec.x = Aggregate(rec.expert_points, rec.weights);

  rec.loss_value = f.Value(rec.x);
  const Vector g = f.Gradient(rec.x);
  if (!std::isfinite(rec.loss_value) || !g.allFinite()) {
    throw NumericError("loss oracle returned non-finite values", rec.t);
  }
  if (g.size() != rec.x.size()) throw ContractViolation("loss gradient dimension mismatch");
  rec.gradient_norm = g.norm();
  rec.gradient_queries = 1;

  if (meta_) {
    MetaRoundLosses m = meta_->Update(g, rec.expert_points, rec.x);
    rec.expert_linloss = std::move(m.expert_losses);
    rec.meta_linloss = m.meta_loss;
  } else {
    const Vector& anchor = set_.center();
    rec.meta_linloss = NormalizedExpertLoss(g, rec.x, anchor, grad_bound_, set_.diameter());
    rec.expert_linloss = {rec.meta_linloss};
  }

  rec.expert_losses.resize(n);
  for (size_t i = 0; i < n; ++i) {
    rec.expert_losses[i] = f.Value(rec.expert_points[i]);
    if (!std::isfinite(rec.expert_losses[i])) throw NumericError("loss oracle returned non-finite values", rec.t);
  }
  for (auto& e : experts_) rec.gradient_queries += e->Update(f);

  round_ = rec.t;
  return rec;
}

std::vector<RoundRecord> UscLearner::Run(const LossStream& stream) {
  std::vector<RoundRecord> out;
  out.reserve(stream.size());
  for (const LossOracle& f : stream) out.push_back(Step(f));
  return out;
}

}  // namespace usc
