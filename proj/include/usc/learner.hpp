#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "usc/experts.hpp"
#include "usc/geometry.hpp"
#include "usc/losses.hpp"
#include "usc/meta.hpp"

namespace usc {

struct RoundRecord {
  long t = 0;
  Vector x;
  std::vector<Vector> expert_points;
  std::vector<double> weights;
  double loss_value = 0.0;  // f_t(x_t)
  double gradient_norm = 0.0;
  std::vector<double> expert_linloss;  // l_t^i
  double meta_linloss = 0.0;           // l_t
  std::vector<double> expert_losses;   // f_t(x_t^i)
  int gradient_queries = 0;
};

// The universal strategy: experts run on the original losses, Adapt-ML-Prod
// mixes their predictions using only the gradient at the mixed point.
//
// Per round: weights -> expert predictions -> aggregate -> gradient at the
// aggregate -> meta update -> expert updates.
class UscLearner {
 public:
  // `anchor` defaults to the set center. A single expert bypasses the meta layer.
  UscLearner(std::vector<std::unique_ptr<Expert>> experts, FeasibleSet set, double grad_bound,
             std::optional<Vector> anchor = std::nullopt);

  RoundRecord Step(const LossOracle& f);
  std::vector<RoundRecord> Run(const LossStream& stream);

  long round() const { return round_; }
  size_t num_experts() const { return experts_.size(); }
  const Expert& expert(size_t i) const { return *experts_.at(i); }
  const AdaptMlProd* meta() const { return meta_ ? &*meta_ : nullptr; }
  const FeasibleSet& set() const { return set_; }
  double grad_bound() const { return grad_bound_; }

  // Current weights p_t (for the round about to be played).
  std::vector<double> Weights() const;
  // Aggregate prediction for the round about to be played.
  Vector Predict() const;

 private:
  std::vector<std::unique_ptr<Expert>> experts_;
  FeasibleSet set_;
  double grad_bound_;
  std::optional<AdaptMlProd> meta_;
  long round_ = 0;
};

}  // namespace usc
