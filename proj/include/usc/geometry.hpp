#pragma once

#include <Eigen/Core>

#include <variant>

namespace usc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Checked vector primitives; ContractViolation on mismatched dimensions.
double Dot(const Vector& a, const Vector& b);
Vector Add(const Vector& a, const Vector& b);
Vector Sub(const Vector& a, const Vector& b);
Vector Scale(double s, const Vector& a);
bool AllFinite(const Vector& v);
void RequireFinite(const Vector& v, const char* what);
void RequireSameDim(const Vector& a, const Vector& b, const char* what);

struct Ball {
  Vector center;
  double radius;
};

struct Box {
  Vector lower;
  Vector upper;
};

// Convex decision domain. Only Euclidean balls and axis-aligned boxes are
// supported; both admit closed-form Euclidean projections.
class FeasibleSet {
 public:
  static constexpr double kMembershipTolerance = 1e-12;

  static FeasibleSet MakeBall(Vector center, double radius);
  static FeasibleSet MakeBox(Vector lower, Vector upper);

  int dim() const;
  double diameter() const { return diameter_; }
  const Vector& center() const { return center_; }
  bool is_ball() const { return std::holds_alternative<Ball>(shape_); }
  const Ball& ball() const { return std::get<Ball>(shape_); }
  const Box& box() const { return std::get<Box>(shape_); }

  // Distance-like violation measure: 0 for points inside the set.
  double Violation(const Vector& x) const;
  bool Contains(const Vector& x, double tol = kMembershipTolerance) const;

  // max over x in the set of ||x - p||.
  double MaxDistanceFrom(const Vector& p) const;
  // max over x in the set of ||x||.
  double MaxNorm() const { return MaxDistanceFrom(Vector::Zero(dim())); }

 private:
  explicit FeasibleSet(std::variant<Ball, Box> shape);

  std::variant<Ball, Box> shape_;
  double diameter_;
  Vector center_;
};

// Euclidean projection onto the set.
Vector Project(const FeasibleSet& set, const Vector& p);
void ProjectInPlace(const FeasibleSet& set, Vector& p);

struct GeneralizedProjectionOptions {
  double tolerance = 1e-10;
  int max_iterations = 10000;
  int power_iterations = 100;
};

// argmin over x in the set of (x - p)^T M (x - p), M symmetric positive
// definite. Solved by projected gradient descent with step 1/lambda_max(M).
Vector GeneralizedProject(const FeasibleSet& set, const Vector& p, const Matrix& metric,
                          const GeneralizedProjectionOptions& options = {});

// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double PowerIterationMaxEigenvalue(const Matrix& m, int iterations);

}  // namespace usc
