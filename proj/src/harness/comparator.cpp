#include "usc/harness/comparator.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "usc/errors.hpp"

namespace usc::harness {
namespace {

Vector TotalGradient(const LossStream& stream, const Vector& x) {
  Vector g = Vector::Zero(x.size());
  for (const LossOracle& f : stream) f.AddGradientTo(x, 1.0, g);
  return g;
}

Vector RandomStart(std::mt19937_64& rng, const FeasibleSet& set) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector x(set.dim());
  const double half = 0.5 * set.diameter();
  for (int i = 0; i < set.dim(); ++i) x[i] = set.center()[i] + half * u(rng);
  return Project(set, x);
}

struct PgdResult {
  Vector x;
  double value;
};

PgdResult RunPgd(const LossStream& stream, const FeasibleSet& set, Vector x, double lipschitz, int iters) {
  const double stop = 1e-13 * (1.0 + set.diameter());
  double value = CumulativeLoss(stream, x);
  for (int k = 0; k < iters; ++k) {
    const Vector g = TotalGradient(stream, x);
    Vector next;
    double next_value;
    if (lipschitz > 0.0) {
      next = Project(set, x - g / lipschitz);
      next_value = CumulativeLoss(stream, next);
    } else {
      // Unknown smoothness: backtrack until the step decreases F.
      double step = 1.0;
      do {
        next = Project(set, x - step * g);
        next_value = CumulativeLoss(stream, next);
        step *= 0.5;
      } while (next_value > value && step > 1e-20);
      if (next_value > value) break;
    }
    const double moved = (next - x).norm();
    x = std::move(next);
    value = next_value;
    if (moved <= stop) break;
  }
  return {std::move(x), value};
}

}  // namespace

double CumulativeLoss(const LossStream& stream, const Vector& x) {
  double total = 0.0;
  for (const LossOracle& f : stream) total += f.Value(x);
  return total;
}

ComparatorResult FindComparator(const LossStream& stream, const FeasibleSet& set, const ComparatorOptions& options,
                                std::uint64_t seed) {
  if (options.starts < 1 || options.pgd_iters < 1) throw ConfigError("comparator: starts and pgd_iters must be ≥ 1");
  double lipschitz = 0.0;
  for (const LossOracle& f : stream) {
    if (!f.tags().smoothness) {
      lipschitz = 0.0;
      break;
    }
    lipschitz += *f.tags().smoothness;
  }

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  ComparatorResult best;
  best.loss = std::numeric_limits<double>::infinity();
  for (int s = 0; s < options.starts; ++s) {
    Vector start = s == 0 ? Vector(set.center()) : RandomStart(rng, set);
    PgdResult r = RunPgd(stream, set, std::move(start), lipschitz, options.pgd_iters);
    if (r.value < best.loss) {
      best.loss = r.value;
      best.x_star = std::move(r.x);
    }
  }
  if (options.grid_resolution > 0.0 && set.dim() <= 2) {
    auto [gx, gl] = GridSearchMinimum(stream, set, options.grid_resolution);
    best.grid_checked = true;
    best.grid_x_star = gx;
    best.grid_loss = gl;
    if (gl < best.loss) {
      best.loss = gl;
      best.x_star = gx;
    }
  }
  const double l = lipschitz > 0.0 ? lipschitz : 1.0;
  const Vector g = TotalGradient(stream, best.x_star);
  best.gradient_mapping_norm = l * (best.x_star - Project(set, best.x_star - g / l)).norm();
  return best;
}

std::pair<Vector, double> GridSearchMinimum(const LossStream& stream, const FeasibleSet& set, double resolution) {
  const int d = set.dim();
  if (d > 2) throw ContractViolation("grid search supports dim <= 2");
  if (!(resolution > 0.0)) throw ContractViolation("grid search: resolution must be positive");

  Vector lo(d), hi(d);
  if (set.is_ball()) {
    lo = set.ball().center.array() - set.ball().radius;
    hi = set.ball().center.array() + set.ball().radius;
  } else {
    lo = set.box().lower;
    hi = set.box().upper;
  }
  Vector best_x = set.center();
  double best = CumulativeLoss(stream, best_x);
  double h = std::max(resolution, (hi - lo).maxCoeff() / 64.0);
  Vector cell_lo = lo, cell_hi = hi;
  while (true) {
    const int n0 = static_cast<int>(std::ceil((cell_hi[0] - cell_lo[0]) / h));
    const int n1 = d == 2 ? static_cast<int>(std::ceil((cell_hi[1] - cell_lo[1]) / h)) : 0;
    Vector x(d);
    for (int i = 0; i <= n0; ++i) {
      x[0] = std::min(cell_lo[0] + i * h, cell_hi[0]);
      for (int j = 0; j <= n1; ++j) {
        if (d == 2) x[1] = std::min(cell_lo[1] + j * h, cell_hi[1]);
        if (!set.Contains(x, 0.0)) continue;
        const double v = CumulativeLoss(stream, x);
        if (v < best) {
          best = v;
          best_x = x;
        }
      }
    }
    if (h <= resolution) break;
    // Zoom into a neighbourhood of the incumbent.
    cell_lo = (best_x.array() - 2.0 * h).max(lo.array());
    cell_hi = (best_x.array() + 2.0 * h).min(hi.array());
    h = std::max(resolution, h / 8.0);
  }
  return {best_x, best};
}

std::vector<double> GradientVariationTerms(const LossStream& stream, const FeasibleSet& set) {
  std::vector<double> out;
  out.reserve(stream.size());
  for (size_t t = 0; t < stream.size(); ++t) {
    const auto gap = MaxGradientGap(stream[t], t == 0 ? nullptr : &stream[t - 1], set);
    out.push_back(gap ? (*gap) * (*gap) : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

double GradientVariation(const LossStream& stream, const FeasibleSet& set) {
  double total = 0.0;
  for (double v : GradientVariationTerms(stream, set)) total += v;
  return total;
}

}  // namespace usc::harness
