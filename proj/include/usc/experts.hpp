#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "usc/geometry.hpp"
#include "usc/losses.hpp"

namespace usc {

// Geometric grid {1/T, 2/T, ..., 2^N/T} with N = ceil(log2 T). Used for both
// the strong-convexity and the exp-concavity moduli.
struct ParamGrid {
  std::vector<double> values;
  long horizon = 0;

  int exponent() const { return static_cast<int>(values.size()) - 1; }
  // Largest grid value not exceeding `parameter`; throws if none exists.
  double SelectAtMost(double parameter) const;
};

ParamGrid BuildGrid(long horizon);

enum class AlgorithmId { kOgdConvex, kOgdStrong, kOns, kSogd, kOegdStrong, kCustom };

// Function class an expert is designed for; decides its block in the pool and
// whether it consumes a grid parameter.
enum class ExpertClass { kStrong, kExpConcave, kConvex };

std::string ToString(ExpertClass c);
ExpertClass ParseExpertClass(const std::string& s);

struct ExpertContext {
  FeasibleSet set;
  double grad_bound;  // G
  double sogd_delta = 1.0;
  int ons_rebuild_interval = 512;
  GeneralizedProjectionOptions projection;

  double diameter() const { return set.diameter(); }
};

struct ExpertInfo {
  std::string name;
  AlgorithmId id = AlgorithmId::kCustom;
  ExpertClass expert_class = ExpertClass::kConvex;
  double assumed_parameter = 0.0;  // lambda-hat / alpha-hat, 0 for convex experts
};

// One online learner processing the original losses. Predict() is the round-t
// decision; Update(f_t) consumes the revealed loss and moves to round t+1.
class Expert {
 public:
  Expert(ExpertInfo info, const ExpertContext& ctx);
  virtual ~Expert() = default;
  Expert(const Expert&) = delete;
  Expert& operator=(const Expert&) = delete;

  const ExpertInfo& info() const { return info_; }
  const Vector& Predict() const { return x_; }
  // Number of updates consumed so far.
  long round() const { return round_; }

  // Returns the number of gradient queries the update made.
  int Update(const LossOracle& f);

 protected:
  virtual int DoUpdate(const LossOracle& f, long t) = 0;
  // Gradient at `x`, checked for finiteness.
  Vector QueryGradient(const LossOracle& f, const Vector& x, long t) const;

  ExpertInfo info_;
  ExpertContext ctx_;
  Vector x_;

 private:
  long round_ = 0;
};

// x <- P(x - eta_t g), eta_t = D / (G sqrt(t)).
class OgdConvex final : public Expert {
 public:
  explicit OgdConvex(const ExpertContext& ctx);

 protected:
  int DoUpdate(const LossOracle& f, long t) override;
};

// x <- P(x - eta_t g), eta_t = 1 / (lambda t).
class OgdStrong final : public Expert {
 public:
  OgdStrong(const ExpertContext& ctx, double lambda);

 protected:
  int DoUpdate(const LossOracle& f, long t) override;
};

// Self-confident OGD: eta_t = D / sqrt(delta + sum_{s<=t} ||g_s||^2).
class Sogd final : public Expert {
 public:
  explicit Sogd(const ExpertContext& ctx);
  double squared_gradient_sum() const { return sum_sq_; }

 protected:
  int DoUpdate(const LossOracle& f, long t) override;

 private:
  double sum_sq_ = 0.0;
};

// Online Newton step. gamma = min(1/(4GD), alpha)/2, A_0 = I / (gamma D)^2,
// A_t = A_{t-1} + g g^T, x <- P^{A_t}(x - A_t^{-1} g / gamma).
class Ons final : public Expert {
 public:
  Ons(const ExpertContext& ctx, double alpha);

  const Matrix& metric() const { return a_; }
  const Matrix& metric_inverse() const { return a_inv_; }
  double gamma() const { return gamma_; }

 protected:
  int DoUpdate(const LossOracle& f, long t) override;

 private:
  double gamma_;
  Matrix a_;
  Matrix a_inv_;
};

// Online extra-gradient descent for strongly convex smooth losses, with
// eta_t = 8G^2 / (lambda (sum_{i<=t} ||g_i - g_{i-1}||^2 + G^2/lambda)), g_0 = 0.
class OegdStrong final : public Expert {
 public:
  OegdStrong(const ExpertContext& ctx, double lambda);

  const Vector& auxiliary() const { return u_; }
  // Step size computed by the most recent update (0 before the first one).
  double step_size() const { return eta_; }
  double variation_sum() const { return variation_; }

 protected:
  int DoUpdate(const LossOracle& f, long t) override;

 private:
  Vector u_;
  Vector prev_grad_;
  double variation_ = 0.0;
  double eta_ = 0.0;
};

using ExpertFactory = std::function<std::unique_ptr<Expert>(const ExpertContext&, double)>;

// Name -> factory table. The built-in algorithms are pre-registered; callers
// may add their own experts under new names.
class ExpertRegistry {
 public:
  struct Entry {
    ExpertClass expert_class;
    AlgorithmId id;
    ExpertFactory factory;
  };

  static ExpertRegistry WithBuiltins();

  void Register(const std::string& name, ExpertClass expert_class, ExpertFactory factory,
                AlgorithmId id = AlgorithmId::kCustom);
  bool Contains(const std::string& name) const { return entries_.count(name) > 0; }
  const Entry& Get(const std::string& name) const;
  std::unique_ptr<Expert> Create(const std::string& name, const ExpertContext& ctx, double parameter) const;

 private:
  std::map<std::string, Entry> entries_;
};

// Algorithm names per block. Each name must be registered under the matching class.
struct PoolSpec {
  std::vector<std::string> strong;
  std::vector<std::string> expconcave;
  std::vector<std::string> convex;
};

size_t PoolSize(const PoolSpec& spec, long horizon);

// Builds the ordered expert pool: strong block, then exp-concave block, then
// convex block; inside a block by algorithm id (then name), then ascending
// grid parameter.
std::vector<std::unique_ptr<Expert>> BuildExpertPool(const ExpertRegistry& registry, const PoolSpec& spec,
                                                     long horizon, const ExpertContext& ctx);

}  // namespace usc
