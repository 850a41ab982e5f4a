#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "usc/geometry.hpp"
#include "usc/harness/config.hpp"
#include "usc/losses.hpp"

namespace usc::harness {

struct ComparatorResult {
  Vector x_star;
  double loss = 0.0;  // L_T* = sum_t f_t(x_star)
  // ||x - P(x - grad F(x)/L)|| * L at x_star; zero at an exact constrained optimum.
  double gradient_mapping_norm = 0.0;
  bool grid_checked = false;
  Vector grid_x_star;
  double grid_loss = 0.0;
};

double CumulativeLoss(const LossStream& stream, const Vector& x);

// Minimizes F(x) = sum_t f_t(x) over the set by projected gradient descent with
// step 1/sum_t H_t from `options.starts` seeded starting points (the first is
// the set center). For dim <= 2 and a positive grid resolution the result is
// cross-checked by a coarse-to-fine grid search; the better point is returned.
ComparatorResult FindComparator(const LossStream& stream, const FeasibleSet& set, const ComparatorOptions& options,
                                std::uint64_t seed);

// Coarse-to-fine grid minimization of F for dim <= 2, refined down to `resolution`.
std::pair<Vector, double> GridSearchMinimum(const LossStream& stream, const FeasibleSet& set, double resolution);

// Per-round terms max_x ||grad f_t(x) - grad f_{t-1}(x)||^2 with grad f_0 = 0.
// Entries are NaN where no closed form exists (custom losses).
std::vector<double> GradientVariationTerms(const LossStream& stream, const FeasibleSet& set);
// V_T: the sum of GradientVariationTerms.
double GradientVariation(const LossStream& stream, const FeasibleSet& set);

}  // namespace usc::harness
