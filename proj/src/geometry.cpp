#include "usc/geometry.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <string>

#include "usc/errors.hpp"

namespace usc {

void RequireSameDim(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    throw ContractViolation(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()) + ")");
  }
}

bool AllFinite(const Vector& v) { return v.allFinite(); }

void RequireFinite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw ContractViolation(std::string(what) + ": non-finite entries");
}

double Dot(const Vector& a, const Vector& b) {
  RequireSameDim(a, b, "dot");
  return a.dot(b);
}

Vector Add(const Vector& a, const Vector& b) {
  RequireSameDim(a, b, "add");
  return a + b;
}

Vector Sub(const Vector& a, const Vector& b) {
  RequireSameDim(a, b, "sub");
  return a - b;
}

Vector Scale(double s, const Vector& a) { return s * a; }

FeasibleSet FeasibleSet::MakeBall(Vector center, double radius) {
  if (center.size() == 0) throw ContractViolation("ball: dimension must be positive");
  RequireFinite(center, "ball center");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ContractViolation("ball: radius must be positive and finite");
  }
  return FeasibleSet(Ball{std::move(center), radius});
}

FeasibleSet FeasibleSet::MakeBox(Vector lower, Vector upper) {
  if (lower.size() == 0) throw ContractViolation("box: dimension must be positive");
  RequireSameDim(lower, upper, "box");
  RequireFinite(lower, "box lower");
  RequireFinite(upper, "box upper");
  if (!(lower.array() < upper.array()).all()) {
    throw ContractViolation("box: lower must be strictly below upper in every coordinate");
  }
  return FeasibleSet(Box{std::move(lower), std::move(upper)});
}

FeasibleSet::FeasibleSet(std::variant<Ball, Box> shape) : shape_(std::move(shape)) {
  if (const Ball* b = std::get_if<Ball>(&shape_)) {
    diameter_ = 2.0 * b->radius;
    center_ = b->center;
  } else {
    const Box& x = std::get<Box>(shape_);
    diameter_ = (x.upper - x.lower).norm();
    center_ = 0.5 * (x.lower + x.upper);
  }
}

int FeasibleSet::dim() const { return static_cast<int>(center_.size()); }

double FeasibleSet::Violation(const Vector& x) const {
  RequireSameDim(center_, x, "membership");
  if (const Ball* b = std::get_if<Ball>(&shape_)) {
    return std::max(0.0, (x - b->center).norm() - b->radius);
  }
  const Box& bx = std::get<Box>(shape_);
  const Vector below = (bx.lower - x).cwiseMax(0.0);
  const Vector above = (x - bx.upper).cwiseMax(0.0);
  return std::max(below.maxCoeff(), above.maxCoeff());
}

bool FeasibleSet::Contains(const Vector& x, double tol) const { return Violation(x) <= tol; }

double FeasibleSet::MaxDistanceFrom(const Vector& p) const {
  RequireSameDim(center_, p, "max distance");
  if (const Ball* b = std::get_if<Ball>(&shape_)) {
    return (p - b->center).norm() + b->radius;
  }
  // Separable: the farthest corner picks the farther bound per coordinate.
  const Box& bx = std::get<Box>(shape_);
  double sq = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double d = std::max(std::abs(p[i] - bx.lower[i]), std::abs(p[i] - bx.upper[i]));
    sq += d * d;
  }
  return std::sqrt(sq);
}

void ProjectInPlace(const FeasibleSet& set, Vector& p) {
  RequireSameDim(set.center(), p, "project");
  RequireFinite(p, "project");
  if (set.is_ball()) {
    const Ball& b = set.ball();
    const double norm = (p - b.center).norm();
    if (norm <= b.radius) return;
    p = b.center + (b.radius / norm) * (p - b.center);
    // nudge inside after rounding
    for (double shrink = 1.0 - 0x1p-52; (p - b.center).norm() > b.radius; shrink -= 0x1p-52) {
      const double n = (p - b.center).norm();
      p = b.center + (shrink * b.radius / n) * (p - b.center);
    }
    return;
  }
  const Box& bx = set.box();
  p = p.cwiseMax(bx.lower).cwiseMin(bx.upper);
}

Vector Project(const FeasibleSet& set, const Vector& p) {
  Vector out = p;
  ProjectInPlace(set, out);
  return out;
}

double PowerIterationMaxEigenvalue(const Matrix& m, int iterations) {
  const Eigen::Index n = m.rows();
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i);
  v.normalize();
  double estimate = 0.0;
  for (int k = 0; k < iterations; ++k) {
    Vector w = m * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    estimate = v.dot(m * v);
  }
  return estimate;
}

Vector GeneralizedProject(const FeasibleSet& set, const Vector& p, const Matrix& metric,
                          const GeneralizedProjectionOptions& options) {
  RequireSameDim(set.center(), p, "generalized project");
  RequireFinite(p, "generalized project");
  if (metric.rows() != p.size() || metric.cols() != p.size()) {
    throw ContractViolation("generalized project: metric dimension mismatch");
  }
  if (!metric.allFinite() || !metric.isApprox(metric.transpose(), 1e-12)) {
    throw InvalidMetric("generalized project: metric is not symmetric");
  }
  Eigen::LLT<Matrix> llt(metric);
  if (llt.info() != Eigen::Success) {
    throw InvalidMetric("generalized project: metric is not positive definite");
  }
  {
    const Matrix l = llt.matrixL();
    if ((l.diagonal().array() <= 0.0).any()) {
      throw InvalidMetric("generalized project: Cholesky factor has a non-positive diagonal");
    }
  }
  if (set.Contains(p, 0.0)) return p;

  const double lmax = PowerIterationMaxEigenvalue(metric, options.power_iterations);
  const double step = 1.0 / lmax;
  Vector x = Project(set, p);
  Vector diff(p.size());
  Vector grad(p.size());
  Vector next(p.size());
  for (int k = 0; k < options.max_iterations; ++k) {
    diff = x - p;
    grad.noalias() = metric * diff;
    next = x - step * grad;
    ProjectInPlace(set, next);
    const double moved = (next - x).norm();
    x.swap(next);
    if (moved < options.tolerance) break;
  }
  return x;
}

}  // namespace usc
