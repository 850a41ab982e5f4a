#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "usc/geometry.hpp"

namespace usc {

// f(x) = (curvature/2) ||x - center||^2 + offset
struct QuadraticLoss {
  double curvature;
  Vector center;
  double offset = 0.0;
};

// f(x) = 0.5 (<coef, x> - target)^2
struct SquaredLinearLoss {
  Vector coef;
  double target;
};

// f(x) = huber_delta(<coef, x> - target)
struct HuberLinearLoss {
  Vector coef;
  double target;
  double delta;
};

// Arbitrary user-provided loss. Class tags are whatever the caller asserts.
struct CustomLoss {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

using LossFamily = std::variant<QuadraticLoss, SquaredLinearLoss, HuberLinearLoss, CustomLoss>;

struct LossClassTags {
  std::optional<double> strong_convexity;  // lambda
  std::optional<double> exp_concavity;     // alpha
  std::optional<double> smoothness;        // H
  bool nonnegative = false;
};

double Huber(double z, double delta);
// Derivative of Huber: z clipped to [-delta, delta].
double HuberDerivative(double z, double delta);

// Per-round loss function. Immutable once built; Value/Gradient are pure.
class LossOracle {
 public:
  static LossOracle Quadratic(double curvature, Vector center, double offset = 0.0);
  static LossOracle SquaredLinear(Vector coef, double target, std::optional<double> exp_concavity = {});
  static LossOracle HuberLinear(Vector coef, double target, double delta);
  static LossOracle Custom(CustomLoss fn, LossClassTags tags);

  double Value(const Vector& x) const;
  Vector Gradient(const Vector& x) const;
  // acc += weight * grad f(x), without allocating.
  void AddGradientTo(const Vector& x, double weight, Vector& acc) const;

  const LossClassTags& tags() const { return tags_; }
  const LossFamily& family() const { return family_; }
  // Smoothness constant if known, otherwise 0.
  double smoothness_or_zero() const { return tags_.smoothness.value_or(0.0); }

  // Exact max over the set of ||grad f(x)||, or nullopt for custom losses.
  std::optional<double> MaxGradientNorm(const FeasibleSet& set) const;

 private:
  LossOracle(LossFamily family, LossClassTags tags) : family_(std::move(family)), tags_(tags) {}

  LossFamily family_;
  LossClassTags tags_;
};

// Upper bound on max over x in the set of ||grad f(x) - grad g(x)||. Exact for
// quadratics; for the linear-composite families it is a coefficient-difference
// bound. A missing `previous` means the zero function. nullopt for custom losses.
std::optional<double> MaxGradientGap(const LossOracle& current, const LossOracle* previous,
                                     const FeasibleSet& set);

enum class StreamClass { kStrong, kExpConcave, kConvex };

std::string ToString(StreamClass c);
StreamClass ParseStreamClass(const std::string& s);

struct StreamConfig {
  StreamClass stream_class = StreamClass::kStrong;
  int dim = 2;
  long horizon = 1;
  std::uint64_t seed = 0;
  double true_parameter = 1.0;  // lambda or alpha; unused for convex streams
  double grad_bound = 1.0;      // G
  double huber_delta = 1.0;
  // Targets generated from one fixed point so the best comparator has zero loss.
  bool realizable = false;
  // Convex streams: random-sign shift added to targets. Values at or above
  // scale*D + delta keep every round on the linear branch of the Huber loss.
  double label_offset = 0.0;
};

using LossStream = std::vector<LossOracle>;

// f_t(x) = (lambda/2)||x - c_t||^2 with c_t uniform in a shrunken copy of the set.
LossStream GenerateStronglyConvexStream(const StreamConfig& cfg, const FeasibleSet& set);
// f_t(x) = 0.5(<a_t, x> - y_t)^2 scaled to be alpha-exp-concave on the set.
LossStream GenerateExpConcaveStream(const StreamConfig& cfg, const FeasibleSet& set);
// f_t(x) = huber(<a_t, x> - y_t) with ||a_t|| = G / delta.
LossStream GenerateConvexStream(const StreamConfig& cfg, const FeasibleSet& set);
// Dispatches on cfg.stream_class.
LossStream GenerateStream(const StreamConfig& cfg, const FeasibleSet& set);

}  // namespace usc
