#include "usc/experts.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <set>

#include "usc/errors.hpp"

namespace usc {

double ParamGrid::SelectAtMost(double parameter) const {
  auto it = std::upper_bound(values.begin(), values.end(), parameter);
  if (it == values.begin()) {
    throw ParameterRangeError("parameter " + std::to_string(parameter) + " is below the grid minimum");
  }
  return *std::prev(it);
}

ParamGrid BuildGrid(long horizon) {
  if (horizon < 1) throw ConfigError("horizon must be ≥ 1");
  int n = 0;
  while ((1L << n) < horizon) ++n;
  ParamGrid grid;
  grid.horizon = horizon;
  grid.values.reserve(static_cast<size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) grid.values.push_back(std::ldexp(1.0, k) / static_cast<double>(horizon));
  return grid;
}

std::string ToString(ExpertClass c) {
  switch (c) {
    case ExpertClass::kStrong:
      return "strong";
    case ExpertClass::kExpConcave:
      return "expconcave";
    case ExpertClass::kConvex:
      return "convex";
  }
  return "?";
}

ExpertClass ParseExpertClass(const std::string& s) {
  if (s == "strong") return ExpertClass::kStrong;
  if (s == "expconcave") return ExpertClass::kExpConcave;
  if (s == "convex") return ExpertClass::kConvex;
  throw ConfigError("unknown expert class '" + s + "'");
}

Expert::Expert(ExpertInfo info, const ExpertContext& ctx)
    : info_(std::move(info)), ctx_(ctx), x_(ctx.set.center()) {
  if (!(ctx.grad_bound > 0.0)) throw ConfigError("expert context: G must be positive");
}

int Expert::Update(const LossOracle& f) {
  const long t = round_ + 1;
  const int queries = DoUpdate(f, t);
  if (!x_.allFinite()) throw NumericError(info_.name + ": non-finite iterate", t);
  round_ = t;
  return queries;
}

Vector Expert::QueryGradient(const LossOracle& f, const Vector& x, long t) const {
  Vector g = f.Gradient(x);
  if (g.size() != x.size()) throw ContractViolation(info_.name + ": gradient dimension mismatch");
  if (!g.allFinite()) throw NumericError(info_.name + ": non-finite gradient", t);
  return g;
}

OgdConvex::OgdConvex(const ExpertContext& ctx)
    : Expert({"ogd_convex", AlgorithmId::kOgdConvex, ExpertClass::kConvex, 0.0}, ctx) {}

int OgdConvex::DoUpdate(const LossOracle& f, long t) {
  const Vector g = QueryGradient(f, x_, t);
  const double eta = ctx_.diameter() / (ctx_.grad_bound * std::sqrt(static_cast<double>(t)));
  x_ -= eta * g;
  ProjectInPlace(ctx_.set, x_);
  return 1;
}

OgdStrong::OgdStrong(const ExpertContext& ctx, double lambda)
    : Expert({"ogd_strong", AlgorithmId::kOgdStrong, ExpertClass::kStrong, lambda}, ctx) {
  if (!(lambda > 0.0)) throw ConfigError("ogd_strong: lambda must be positive");
}

int OgdStrong::DoUpdate(const LossOracle& f, long t) {
  const Vector g = QueryGradient(f, x_, t);
  const double eta = 1.0 / (info_.assumed_parameter * static_cast<double>(t));
  x_ -= eta * g;
  ProjectInPlace(ctx_.set, x_);
  return 1;
}

Sogd::Sogd(const ExpertContext& ctx) : Expert({"sogd", AlgorithmId::kSogd, ExpertClass::kConvex, 0.0}, ctx) {
  if (!(ctx.sogd_delta > 0.0)) throw ConfigError("sogd: delta must be positive");
}

int Sogd::DoUpdate(const LossOracle& f, long t) {
  const Vector g = QueryGradient(f, x_, t);
  sum_sq_ += g.squaredNorm();
  const double eta = ctx_.diameter() / std::sqrt(ctx_.sogd_delta + sum_sq_);
  x_ -= eta * g;
  ProjectInPlace(ctx_.set, x_);
  return 1;
}

Ons::Ons(const ExpertContext& ctx, double alpha)
    : Expert({"ons", AlgorithmId::kOns, ExpertClass::kExpConcave, alpha}, ctx) {
  if (!(alpha > 0.0)) throw ConfigError("ons: alpha must be positive");
  const double g = ctx.grad_bound;
  const double d = ctx.diameter();
  gamma_ = 0.5 * std::min(1.0 / (4.0 * g * d), alpha);
  const double eps = 1.0 / (gamma_ * gamma_ * d * d);
  const int n = ctx.set.dim();
  a_ = eps * Matrix::Identity(n, n);
  a_inv_ = (1.0 / eps) * Matrix::Identity(n, n);
}

int Ons::DoUpdate(const LossOracle& f, long t) {
  const Vector g = QueryGradient(f, x_, t);
  a_.noalias() += g * g.transpose();
  if (ctx_.ons_rebuild_interval > 0 && t % ctx_.ons_rebuild_interval == 0) {
    a_inv_ = a_.llt().solve(Matrix::Identity(a_.rows(), a_.cols()));
  } else {
    // Sherman-Morrison rank-one update of the inverse.
    const Vector ag = a_inv_ * g;
    a_inv_.noalias() -= (ag * ag.transpose()) / (1.0 + g.dot(ag));
  }
  // symmetrize
  a_inv_ = 0.5 * (a_inv_ + a_inv_.transpose()).eval();
  const Vector y = x_ - (1.0 / gamma_) * (a_inv_ * g);
  x_ = GeneralizedProject(ctx_.set, y, a_, ctx_.projection);
  return 1;
}

OegdStrong::OegdStrong(const ExpertContext& ctx, double lambda)
    : Expert({"oegd_strong", AlgorithmId::kOegdStrong, ExpertClass::kStrong, lambda}, ctx),
      u_(ctx.set.center()),
      prev_grad_(Vector::Zero(ctx.set.dim())) {
  if (!(lambda > 0.0)) throw ConfigError("oegd_strong: lambda must be positive");
}

int OegdStrong::DoUpdate(const LossOracle& f, long t) {
  const Vector g = QueryGradient(f, x_, t);
  variation_ += (g - prev_grad_).squaredNorm();
  const double lambda = info_.assumed_parameter;
  const double g2 = ctx_.grad_bound * ctx_.grad_bound;
  eta_ = 8.0 * g2 / (lambda * (variation_ + g2 / lambda));
  u_ -= eta_ * g;
  ProjectInPlace(ctx_.set, u_);
  // extrapolation uses eta_t
  x_ = u_ - eta_ * g;
  ProjectInPlace(ctx_.set, x_);
  prev_grad_ = g;
  return 1;
}

ExpertRegistry ExpertRegistry::WithBuiltins() {
  ExpertRegistry r;
  r.Register(
      "ogd_convex", ExpertClass::kConvex,
      [](const ExpertContext& ctx, double) { return std::make_unique<OgdConvex>(ctx); },
      AlgorithmId::kOgdConvex);
  r.Register(
      "ogd_strong", ExpertClass::kStrong,
      [](const ExpertContext& ctx, double p) { return std::make_unique<OgdStrong>(ctx, p); },
      AlgorithmId::kOgdStrong);
  r.Register(
      "ons", ExpertClass::kExpConcave,
      [](const ExpertContext& ctx, double p) { return std::make_unique<Ons>(ctx, p); }, AlgorithmId::kOns);
  r.Register(
      "sogd", ExpertClass::kConvex, [](const ExpertContext& ctx, double) { return std::make_unique<Sogd>(ctx); },
      AlgorithmId::kSogd);
  r.Register(
      "oegd_strong", ExpertClass::kStrong,
      [](const ExpertContext& ctx, double p) { return std::make_unique<OegdStrong>(ctx, p); },
      AlgorithmId::kOegdStrong);
  return r;
}

void ExpertRegistry::Register(const std::string& name, ExpertClass expert_class, ExpertFactory factory,
                              AlgorithmId id) {
  if (name.empty() || !factory) throw ConfigError("expert registry: empty name or factory");
  if (Contains(name)) throw ConfigError("expert registry: '" + name + "' already registered");
  entries_.emplace(name, Entry{expert_class, id, std::move(factory)});
}

const ExpertRegistry::Entry& ExpertRegistry::Get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError("unknown expert algorithm '" + name + "'");
  return it->second;
}

std::unique_ptr<Expert> ExpertRegistry::Create(const std::string& name, const ExpertContext& ctx,
                                               double parameter) const {
  const Entry& e = Get(name);
  auto expert = e.factory(ctx, parameter);
  if (!expert) throw ConfigError("expert factory for '" + name + "' returned null");
  return expert;
}

size_t PoolSize(const PoolSpec& spec, long horizon) {
  const size_t grid = BuildGrid(horizon).values.size();
  return (spec.strong.size() + spec.expconcave.size()) * grid + spec.convex.size();
}

namespace {

std::vector<std::string> OrderedBlock(const ExpertRegistry& registry, const std::vector<std::string>& names,
                                      ExpertClass expected) {
  std::set<std::string> seen;
  for (const std::string& n : names) {
    const auto& entry = registry.Get(n);
    if (entry.expert_class != expected) {
      throw ConfigError("algorithm '" + n + "' is a " + ToString(entry.expert_class) +
                        " expert, listed under " + ToString(expected));
    }
    if (!seen.insert(n).second) throw ConfigError("algorithm '" + n + "' listed twice");
  }
  std::vector<std::string> out(names);
  std::sort(out.begin(), out.end(), [&](const std::string& a, const std::string& b) {
    const auto ia = registry.Get(a).id;
    const auto ib = registry.Get(b).id;
    return ia != ib ? ia < ib : a < b;
  });
  return out;
}

}  // namespace

std::vector<std::unique_ptr<Expert>> BuildExpertPool(const ExpertRegistry& registry, const PoolSpec& spec,
                                                     long horizon, const ExpertContext& ctx) {
  if (spec.strong.empty() && spec.expconcave.empty() && spec.convex.empty()) {
    throw ConfigError("expert pool: all algorithm lists are empty");
  }
  const ParamGrid grid = BuildGrid(horizon);
  std::vector<std::unique_ptr<Expert>> pool;
  pool.reserve(PoolSize(spec, horizon));
  for (const std::string& name : OrderedBlock(registry, spec.strong, ExpertClass::kStrong)) {
    for (double v : grid.values) pool.push_back(registry.Create(name, ctx, v));
  }
  for (const std::string& name : OrderedBlock(registry, spec.expconcave, ExpertClass::kExpConcave)) {
    for (double v : grid.values) pool.push_back(registry.Create(name, ctx, v));
  }
  for (const std::string& name : OrderedBlock(registry, spec.convex, ExpertClass::kConvex)) {
    pool.push_back(registry.Create(name, ctx, 0.0));
  }
  return pool;
}

}  // namespace usc
