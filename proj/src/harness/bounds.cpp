#include "usc/harness/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "usc/meta.hpp"

namespace usc::harness {
namespace {

bool Holds(double lhs, double rhs, const VerifyOptions& options) {
  if (options.strict) return lhs <= rhs;
  return lhs <= rhs + 1e-9 * std::max(1.0, std::abs(rhs));
}

BoundCheck Skipped(std::string name, std::string why) {
  BoundCheck c;
  c.name = std::move(name);
  c.skipped = true;
  c.detail = std::move(why);
  return c;
}

BoundCheck Compare(std::string name, double lhs, double rhs, const VerifyOptions& options, std::string detail = {}) {
  BoundCheck c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.pass = Holds(lhs, rhs, options);
  c.detail = std::move(detail);
  return c;
}

// Smallest measured regret among experts of one class; false if the class is empty.
bool BestRegret(const RunTrace& trace, ExpertClass cls, double* best, size_t* which) {
  bool found = false;
  for (size_t i = 0; i < trace.num_experts(); ++i) {
    if (trace.experts[i].expert_class != cls) continue;
    const double r = trace.ExpertRegret(i);
    if (!found || r < *best) {
      *best = r;
      *which = i;
      found = true;
    }
  }
  return found;
}

std::string ExpertLabel(const ExpertDescriptor& e) {
  std::ostringstream ss;
  ss << e.name;
  if (e.expert_class != ExpertClass::kConvex) ss << '@' << e.parameter;
  return ss.str();
}

double MetaSlack(long k, long horizon, double g, double d) {
  const double gamma = GammaConstant(k, horizon);
  return 2.0 * gamma * g * d * (2.0 + 1.0 / std::sqrt(std::log(static_cast<double>(k))));
}

}  // namespace

double StronglyConvexBound(double best_expert_regret, long num_experts, long horizon, double grad_bound,
                           double diameter, double lambda) {
  const double gamma = GammaConstant(num_experts, horizon);
  const double ln_k = std::log(static_cast<double>(num_experts));
  return best_expert_regret + MetaSlack(num_experts, horizon, grad_bound, diameter) +
         gamma * gamma * grad_bound * grad_bound / (2.0 * lambda * ln_k);
}

double ExpConcaveBeta(double grad_bound, double diameter, double alpha) {
  return 0.5 * std::min(1.0 / (4.0 * grad_bound * diameter), alpha);
}

double ExpConcaveBound(double best_expert_regret, long num_experts, long horizon, double grad_bound,
                       double diameter, double alpha) {
  const double gamma = GammaConstant(num_experts, horizon);
  const double ln_k = std::log(static_cast<double>(num_experts));
  const double beta = ExpConcaveBeta(grad_bound, diameter, alpha);
  return best_expert_regret + MetaSlack(num_experts, horizon, grad_bound, diameter) +
         gamma * gamma / (2.0 * beta * ln_k);
}

double ConvexBound(double best_expert_regret, long num_experts, long horizon, double grad_bound, double diameter,
                   double sum_sq_gradients) {
  const double gamma = GammaConstant(num_experts, horizon);
  const double ln_k = std::log(static_cast<double>(num_experts));
  return best_expert_regret + 4.0 * gamma * grad_bound * diameter +
         gamma * diameter / std::sqrt(ln_k) * std::sqrt(4.0 * grad_bound * grad_bound + sum_sq_gradients);
}

double OegdStrongBound(double grad_bound, double diameter, double lambda, double smoothness, double variation) {
  const double g2 = grad_bound * grad_bound;
  const double inner = 2.0 * lambda * variation / g2 + 2.0;
  const double m = std::log(512.0 * smoothness * smoothness * (1.0 + 4.0 * lambda) + 1.0) / std::log(inner) + 1.0;
  return m * (8.0 * g2 / lambda + 32.0 * g2) * std::log(inner) + diameter * diameter * (2.0 * lambda + 1.0) / 32.0;
}

double SecondOrderBound(long num_experts, long prefix, double sum_sq_excess) {
  const double gamma = GammaConstant(num_experts, prefix);
  const double ln_k = std::log(static_cast<double>(num_experts));
  return gamma / std::sqrt(ln_k) * std::sqrt(1.0 + sum_sq_excess) + 2.0 * gamma;
}

double BoundCheck::SlackRatio() const {
  if (lhs <= 0.0) return std::numeric_limits<double>::infinity();
  return rhs / lhs;
}

bool BoundReport::AllPass() const {
  return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.skipped || c.pass; });
}

std::string BoundReport::Format() const {
  std::ostringstream out;
  for (const BoundCheck& c : checks) {
    if (c.skipped) {
      out << "SKIP  " << c.name << "  " << c.detail << '\n';
      continue;
    }
    out << (c.pass ? "PASS  " : "FAIL  ") << c.name << "  lhs=" << FormatNumber(c.lhs)
        << "  rhs=" << FormatNumber(c.rhs) << "  slack_ratio=" << FormatNumber(c.SlackRatio());
    if (!c.detail.empty()) out << "  (" << c.detail << ')';
    out << '\n';
  }
  for (const std::string& w : warnings) out << "WARN  " << w << '\n';
  out << (AllPass() ? "ALL PASS" : "VIOLATIONS FOUND") << '\n';
  return out.str();
}

BoundCheck CheckSecondOrder(const RunTrace& trace, const VerifyOptions& options) {
  const size_t n = trace.num_experts();
  if (n < 2) return Skipped("adapt_ml_prod_second_order", "single expert, no meta layer");
  std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
  BoundCheck worst;
  worst.name = "adapt_ml_prod_second_order";
  double worst_ratio = -std::numeric_limits<double>::infinity();
  bool all = true;
  const long k = static_cast<long>(n);
  const double ln_k = std::log(static_cast<double>(n));
  for (long t = 0; t < trace.rounds(); ++t) {
    const double gamma = GammaConstant(k, t + 1);
    for (size_t i = 0; i < n; ++i) {
      const double r = trace.meta_linloss[t] - trace.expert_linloss[t][i];
      sum[i] += r;
      sum_sq[i] += r * r;
      const double rhs = gamma / std::sqrt(ln_k) * std::sqrt(1.0 + sum_sq[i]) + 2.0 * gamma;
      const bool ok = Holds(sum[i], rhs, options);
      all = all && ok;
      const double ratio = sum[i] / rhs;
      if (ratio > worst_ratio) {
        worst_ratio = ratio;
        worst.lhs = sum[i];
        worst.rhs = rhs;
        worst.detail = "tightest at expert " + std::to_string(i) + " (" + ExpertLabel(trace.experts[i]) +
                       "), prefix " + std::to_string(t + 1);
      }
    }
  }
  worst.pass = all;
  return worst;
}

BoundCheck CheckLinearizedMetaRegret(const RunTrace& trace, const VerifyOptions& options) {
  const size_t n = trace.num_experts();
  if (n < 2) return Skipped("linearized_meta_regret", "single expert, no meta layer");
  const double scale = 2.0 * trace.grad_bound * trace.diameter;
  const long k = static_cast<long>(n);
  const double gamma = GammaConstant(k, std::max(1L, trace.rounds()));
  const double ln_k = std::log(static_cast<double>(n));
  BoundCheck worst;
  worst.name = "linearized_meta_regret";
  double worst_ratio = -std::numeric_limits<double>::infinity();
  bool all = true;
  for (size_t i = 0; i < n; ++i) {
    double s = 0.0, sq = 0.0;
    for (long t = 0; t < trace.rounds(); ++t) {
      const double v = scale * (trace.meta_linloss[t] - trace.expert_linloss[t][i]);
      s += v;
      sq += v * v;
    }
    const double rhs = MetaSlack(k, std::max(1L, trace.rounds()), trace.grad_bound, trace.diameter) +
                       gamma / std::sqrt(ln_k) * std::sqrt(sq);
    all = all && Holds(s, rhs, options);
    if (s / rhs > worst_ratio) {
      worst_ratio = s / rhs;
      worst.lhs = s;
      worst.rhs = rhs;
      worst.detail = "tightest at expert " + std::to_string(i) + " (" + ExpertLabel(trace.experts[i]) + ")";
    }
  }
  worst.pass = all;
  return worst;
}

BoundReport VerifyBounds(const RunTrace& trace, const VerifyOptions& options) {
  BoundReport report;
  report.checks.push_back(CheckSecondOrder(trace, options));
  report.checks.push_back(CheckLinearizedMetaRegret(trace, options));

  const long k = static_cast<long>(trace.num_experts());
  const long horizon = std::max(1L, trace.rounds());
  const double usc_regret = trace.UscRegret();
  const double g = trace.grad_bound;
  const double d = trace.diameter;
  double best = 0.0;
  size_t which = 0;

  if (trace.stream_class == StreamClass::kStrong) {
    if (k < 2) {
      report.checks.push_back(Skipped("usc_strongly_convex", "needs at least two experts"));
    } else if (BestRegret(trace, ExpertClass::kStrong, &best, &which)) {
      report.checks.push_back(Compare("usc_strongly_convex", usc_regret,
                                      StronglyConvexBound(best, k, horizon, g, d, trace.true_parameter), options,
                                      "best strong expert " + ExpertLabel(trace.experts[which])));
    } else {
      report.checks.push_back(Skipped("usc_strongly_convex", "no strongly convex experts in the pool"));
    }
  }
  if (trace.stream_class == StreamClass::kExpConcave) {
    if (k < 2) {
      report.checks.push_back(Skipped("usc_exp_concave", "needs at least two experts"));
    } else if (BestRegret(trace, ExpertClass::kExpConcave, &best, &which)) {
      report.checks.push_back(Compare("usc_exp_concave", usc_regret,
                                      ExpConcaveBound(best, k, horizon, g, d, trace.true_parameter), options,
                                      "best exp-concave expert " + ExpertLabel(trace.experts[which])));
    } else {
      report.checks.push_back(Skipped("usc_exp_concave", "no exp-concave experts in the pool"));
    }
  }
  // convex bound: every stream class
  if (k < 2) {
    report.checks.push_back(Skipped("usc_convex", "needs at least two experts"));
  } else if (BestRegret(trace, ExpertClass::kConvex, &best, &which)) {
    report.checks.push_back(Compare("usc_convex", usc_regret,
                                    ConvexBound(best, k, horizon, g, d, trace.SumSquaredGradients()), options,
                                    "best convex expert " + ExpertLabel(trace.experts[which])));
  } else {
    report.checks.push_back(Skipped("usc_convex", "no general convex experts in the pool"));
  }

  if (trace.stream_class == StreamClass::kStrong) {
    const double variation = trace.GradientVariation();
    if (!(trace.smoothness > 0.0) || !std::isfinite(variation)) {
      report.warnings.push_back("OEGD bound skipped: smoothness or gradient variation unknown");
    } else {
      auto oegd = [&](const ExpertDescriptor& e, double regret, const std::string& where) {
        if (e.name != "oegd_strong" || e.parameter > trace.true_parameter) return;
        report.checks.push_back(Compare("oegd_strong[" + where + ExpertLabel(e) + "]", regret,
                                        OegdStrongBound(g, d, e.parameter, trace.smoothness, variation), options));
      };
      for (size_t i = 0; i < trace.num_experts(); ++i) oegd(trace.experts[i], trace.ExpertRegret(i), "pool:");
      for (const BaselineResult& b : trace.baselines) oegd(b.expert, b.regret, "baseline:");
    }
  }
  if (trace.comparator_gradient_mapping > 1e-6 * std::max(1.0, std::abs(trace.comparator_loss))) {
    report.warnings.push_back("comparator gradient mapping norm " + FormatNumber(trace.comparator_gradient_mapping) +
                              " suggests the comparator is not fully converged");
  }
  return report;
}

}  // namespace usc::harness
