#include "usc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "usc/errors.hpp"

namespace usc {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Half-width of the range of <a, x> over the set, centred at <a, center>.
double LinearHalfWidth(const FeasibleSet& set, const Vector& a) {
  if (set.is_ball()) return set.ball().radius * a.norm();
  const Box& b = set.box();
  return 0.5 * (a.cwiseAbs().array() * (b.upper - b.lower).array()).sum();
}

// max over the set of |<a, x> - y|.
double MaxAbsResidual(const FeasibleSet& set, const Vector& a, double y) {
  return std::abs(a.dot(set.center()) - y) + LinearHalfWidth(set, a);
}

// max over the set of ||k x - v||.
double MaxAffineNorm(const FeasibleSet& set, double k, const Vector& v) {
  if (k == 0.0) return v.norm();
  return std::abs(k) * set.MaxDistanceFrom(v / k);
}

// max over the set of ||M x - v|| for a general matrix M.
double MaxMatrixAffineNorm(const FeasibleSet& set, const Matrix& m, const Vector& v) {
  const int d = set.dim();
  if (!set.is_ball() && d <= 12) {
    // Convex in x, so the maximum is attained at a vertex.
    const Box& b = set.box();
    double best = 0.0;
    Vector x(d);
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
      for (int i = 0; i < d; ++i) x[i] = (mask >> i) & 1u ? b.upper[i] : b.lower[i];
      best = std::max(best, (m * x - v).norm());
    }
    return best;
  }
  const double op_norm = std::sqrt(PowerIterationMaxEigenvalue(m.transpose() * m, 200));
  const double radius = set.is_ball() ? set.ball().radius : 0.5 * set.diameter();
  return (m * set.center() - v).norm() + op_norm * radius;
}

double UniformUnit(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

Vector UniformDirection(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  } while (v.norm() == 0.0);
  return v.normalized();
}

Vector UniformPoint(std::mt19937_64& rng, const FeasibleSet& set) {
  const int d = set.dim();
  if (set.is_ball()) {
    const Ball& b = set.ball();
    const double r = b.radius * std::pow(UniformUnit(rng), 1.0 / d);
    return b.center + r * UniformDirection(rng, d);
  }
  const Box& b = set.box();
  Vector x(d);
  for (int i = 0; i < d; ++i) x[i] = b.lower[i] + (b.upper[i] - b.lower[i]) * UniformUnit(rng);
  return x;
}

void ValidateCommon(const StreamConfig& cfg, const FeasibleSet& set) {
  if (cfg.horizon < 1) throw ConfigError("horizon must be ≥ 1");
  if (cfg.dim != set.dim()) throw ConfigError("stream dim does not match the feasible set");
  if (!(cfg.grad_bound > 0.0)) throw ConfigError("grad_bound must be positive");
}

void ValidateClassParameter(const StreamConfig& cfg, const char* name) {
  const double lo = 1.0 / static_cast<double>(cfg.horizon);
  if (!(cfg.true_parameter >= lo && cfg.true_parameter <= 1.0)) {
    throw ParameterRangeError(std::string(name) + " = " + std::to_string(cfg.true_parameter) +
                              " outside [1/T, 1]");
  }
}

void CheckGradientBound(const LossOracle& f, const FeasibleSet& set, double g, long t) {
  const double max_norm = *f.MaxGradientNorm(set);
  if (max_norm > g * (1.0 + 1e-12)) {
    throw AssumptionViolation("generated loss at round " + std::to_string(t) + " has gradient norm " +
                              std::to_string(max_norm) + " > G = " + std::to_string(g));
  }
}

}  // namespace

double Huber(double z, double delta) {
  const double a = std::abs(z);
  return a <= delta ? 0.5 * z * z : delta * (a - 0.5 * delta);
}

double HuberDerivative(double z, double delta) { return std::clamp(z, -delta, delta); }

LossOracle LossOracle::Quadratic(double curvature, Vector center, double offset) {
  if (!(curvature > 0.0)) throw ContractViolation("quadratic loss: curvature must be positive");
  RequireFinite(center, "quadratic loss center");
  LossClassTags tags;
  tags.strong_convexity = curvature;
  tags.smoothness = curvature;
  tags.nonnegative = offset >= 0.0;
  return LossOracle(QuadraticLoss{curvature, std::move(center), offset}, tags);
}

LossOracle LossOracle::SquaredLinear(Vector coef, double target, std::optional<double> exp_concavity) {
  RequireFinite(coef, "squared loss coefficients");
  LossClassTags tags;
  tags.exp_concavity = exp_concavity;
  tags.smoothness = coef.squaredNorm();
  tags.nonnegative = true;
  return LossOracle(SquaredLinearLoss{std::move(coef), target}, tags);
}

LossOracle LossOracle::HuberLinear(Vector coef, double target, double delta) {
  RequireFinite(coef, "huber loss coefficients");
  if (!(delta > 0.0)) throw ContractViolation("huber loss: delta must be positive");
  LossClassTags tags;
  tags.smoothness = coef.squaredNorm() / delta;
  tags.nonnegative = true;
  return LossOracle(HuberLinearLoss{std::move(coef), target, delta}, tags);
}

LossOracle LossOracle::Custom(CustomLoss fn, LossClassTags tags) {
  if (!fn.value || !fn.gradient) throw ContractViolation("custom loss needs value and gradient");
  return LossOracle(std::move(fn), tags);
}

double LossOracle::Value(const Vector& x) const {
  return std::visit(
      Overloaded{
          [&](const QuadraticLoss& q) {
            RequireSameDim(q.center, x, "loss value");
            return 0.5 * q.curvature * (x - q.center).squaredNorm() + q.offset;
          },
          [&](const SquaredLinearLoss& s) {
            const double z = Dot(s.coef, x) - s.target;
            return 0.5 * z * z;
          },
          [&](const HuberLinearLoss& h) { return Huber(Dot(h.coef, x) - h.target, h.delta); },
          [&](const CustomLoss& c) { return c.value(x); },
      },
      family_);
}

Vector LossOracle::Gradient(const Vector& x) const {
  return std::visit(
      Overloaded{
          [&](const QuadraticLoss& q) -> Vector {
            RequireSameDim(q.center, x, "loss gradient");
            return q.curvature * (x - q.center);
          },
          [&](const SquaredLinearLoss& s) -> Vector { return (Dot(s.coef, x) - s.target) * s.coef; },
          [&](const HuberLinearLoss& h) -> Vector {
            return HuberDerivative(Dot(h.coef, x) - h.target, h.delta) * h.coef;
          },
          [&](const CustomLoss& c) -> Vector { return c.gradient(x); },
      },
      family_);
}

void LossOracle::AddGradientTo(const Vector& x, double weight, Vector& acc) const {
  std::visit(
      Overloaded{
          [&](const QuadraticLoss& q) {
            RequireSameDim(q.center, x, "loss gradient");
            acc.noalias() += (weight * q.curvature) * (x - q.center);
          },
          [&](const SquaredLinearLoss& s) { acc.noalias() += (weight * (Dot(s.coef, x) - s.target)) * s.coef; },
          [&](const HuberLinearLoss& h) {
            acc.noalias() += (weight * HuberDerivative(Dot(h.coef, x) - h.target, h.delta)) * h.coef;
          },
          [&](const CustomLoss& c) { acc.noalias() += weight * c.gradient(x); },
      },
      family_);
}

std::optional<double> LossOracle::MaxGradientNorm(const FeasibleSet& set) const {
  return MaxGradientGap(*this, nullptr, set);
}

std::optional<double> MaxGradientGap(const LossOracle& current, const LossOracle* previous,
                                     const FeasibleSet& set) {
  const LossFamily& cur = current.family();
  if (std::holds_alternative<CustomLoss>(cur)) return std::nullopt;
  if (previous == nullptr) {
    return std::visit(
        Overloaded{
            [&](const QuadraticLoss& q) -> std::optional<double> {
              return q.curvature * set.MaxDistanceFrom(q.center);
            },
            [&](const SquaredLinearLoss& s) -> std::optional<double> {
              return MaxAbsResidual(set, s.coef, s.target) * s.coef.norm();
            },
            [&](const HuberLinearLoss& h) -> std::optional<double> {
              return std::min(h.delta, MaxAbsResidual(set, h.coef, h.target)) * h.coef.norm();
            },
            [&](const CustomLoss&) -> std::optional<double> { return std::nullopt; },
        },
        cur);
  }
  const LossFamily& prev = previous->family();
  if (std::holds_alternative<CustomLoss>(prev)) return std::nullopt;

  if (const auto* q1 = std::get_if<QuadraticLoss>(&cur)) {
    if (const auto* q0 = std::get_if<QuadraticLoss>(&prev)) {
      const double k = q1->curvature - q0->curvature;
      const Vector v = q1->curvature * q1->center - q0->curvature * q0->center;
      return MaxAffineNorm(set, k, v);
    }
  }
  if (const auto* s1 = std::get_if<SquaredLinearLoss>(&cur)) {
    if (const auto* s0 = std::get_if<SquaredLinearLoss>(&prev)) {
      const Matrix m = s1->coef * s1->coef.transpose() - s0->coef * s0->coef.transpose();
      const Vector v = s1->target * s1->coef - s0->target * s0->coef;
      return MaxMatrixAffineNorm(set, m, v);
    }
  }
  if (const auto* h1 = std::get_if<HuberLinearLoss>(&cur)) {
    if (const auto* h0 = std::get_if<HuberLinearLoss>(&prev); h0 && h0->delta == h1->delta) {
      // psi1 a1 - psi0 a0 = psi1 (a1 - a0) + (psi1 - psi0) a0, and psi is
      // 1-Lipschitz and bounded by delta.
      const Vector da = h1->coef - h0->coef;
      const double psi1 = std::min(h1->delta, MaxAbsResidual(set, h1->coef, h1->target));
      const double dz = MaxAbsResidual(set, da, h1->target - h0->target);
      return psi1 * da.norm() + h0->coef.norm() * std::min(2.0 * h1->delta, dz);
    }
  }
  return *MaxGradientGap(current, nullptr, set) + *MaxGradientGap(*previous, nullptr, set);
}

std::string ToString(StreamClass c) {
  switch (c) {
    case StreamClass::kStrong:
      return "strong";
    case StreamClass::kExpConcave:
      return "expconcave";
    case StreamClass::kConvex:
      return "convex";
  }
  return "?";
}

StreamClass ParseStreamClass(const std::string& s) {
  if (s == "strong") return StreamClass::kStrong;
  if (s == "expconcave") return StreamClass::kExpConcave;
  if (s == "convex") return StreamClass::kConvex;
  throw ConfigError("unknown stream class '" + s + "' (expected strong | expconcave | convex)");
}

LossStream GenerateStronglyConvexStream(const StreamConfig& cfg, const FeasibleSet& set) {
  ValidateCommon(cfg, set);
  ValidateClassParameter(cfg, "lambda");
  const double lambda = cfg.true_parameter;
  const double g = cfg.grad_bound;
  const double d = set.diameter();
  // lambda * (1 + shrink) * D / 2 <= G keeps every gradient within G.
  const double shrink = std::min(1.0, 2.0 * g / (lambda * d) - 1.0);
  if (!(shrink > 0.0)) {
    throw AssumptionViolation("G = " + std::to_string(g) + " too small for lambda = " +
                              std::to_string(lambda) + " on a domain of diameter " + std::to_string(d));
  }
  std::mt19937_64 rng(cfg.seed);
  const Vector fixed = set.center() + 0.5 * shrink * (UniformPoint(rng, set) - set.center());
  LossStream out;
  out.reserve(static_cast<size_t>(cfg.horizon));
  for (long t = 1; t <= cfg.horizon; ++t) {
    Vector c = cfg.realizable ? fixed : Vector(set.center() + shrink * (UniformPoint(rng, set) - set.center()));
    out.push_back(LossOracle::Quadratic(lambda, std::move(c)));
    CheckGradientBound(out.back(), set, g, t);
  }
  return out;
}

LossStream GenerateExpConcaveStream(const StreamConfig& cfg, const FeasibleSet& set) {
  ValidateCommon(cfg, set);
  ValidateClassParameter(cfg, "alpha");
  const double alpha = cfg.true_parameter;
  const double g = cfg.grad_bound;
  const double d = set.diameter();
  // |<a, x - c>| <= scale*D must stay below 1/sqrt(alpha), and the gradient
  // norm is at most scale^2 * D.
  const double scale = std::min(1.0 / (d * std::sqrt(alpha)), std::sqrt(g / d));
  std::mt19937_64 rng(cfg.seed);
  const Vector fixed = set.center() + 0.5 * (UniformPoint(rng, set) - set.center());
  LossStream out;
  out.reserve(static_cast<size_t>(cfg.horizon));
  for (long t = 1; t <= cfg.horizon; ++t) {
    Vector a = scale * UniformDirection(rng, cfg.dim);
    const Vector c = cfg.realizable ? fixed : UniformPoint(rng, set);
    const double y = a.dot(c);
    const double zmax = MaxAbsResidual(set, a, y);
    if (alpha * zmax * zmax > 1.0 + 1e-12) {
      throw InvariantFailure("exp-concave generator produced a residual range beyond 1/sqrt(alpha)");
    }
    out.push_back(LossOracle::SquaredLinear(std::move(a), y, alpha));
    CheckGradientBound(out.back(), set, g, t);
  }
  return out;
}

LossStream GenerateConvexStream(const StreamConfig& cfg, const FeasibleSet& set) {
  ValidateCommon(cfg, set);
  if (!(cfg.huber_delta > 0.0)) throw ConfigError("huber_delta must be positive");
  if (cfg.label_offset < 0.0) throw ConfigError("label_offset must be nonnegative");
  const double delta = cfg.huber_delta;
  const double scale = cfg.grad_bound / delta;
  std::mt19937_64 rng(cfg.seed);
  const Vector fixed = set.center() + 0.5 * (UniformPoint(rng, set) - set.center());
  LossStream out;
  out.reserve(static_cast<size_t>(cfg.horizon));
  for (long t = 1; t <= cfg.horizon; ++t) {
    Vector a = scale * UniformDirection(rng, cfg.dim);
    const Vector c = cfg.realizable ? fixed : UniformPoint(rng, set);
    double y = a.dot(c);
    if (cfg.label_offset > 0.0) y += (rng() & 1u) ? cfg.label_offset : -cfg.label_offset;
    out.push_back(LossOracle::HuberLinear(std::move(a), y, delta));
    CheckGradientBound(out.back(), set, cfg.grad_bound, t);
  }
  return out;
}

LossStream GenerateStream(const StreamConfig& cfg, const FeasibleSet& set) {
  switch (cfg.stream_class) {
    case StreamClass::kStrong:
      return GenerateStronglyConvexStream(cfg, set);
    case StreamClass::kExpConcave:
      return GenerateExpConcaveStream(cfg, set);
    case StreamClass::kConvex:
      return GenerateConvexStream(cfg, set);
  }
  throw ConfigError("unknown stream class");
}

}  // namespace usc
