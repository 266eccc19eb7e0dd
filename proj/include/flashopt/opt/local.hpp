#pragma once

// Local solvers working on a Problem from one starting point.

#include <string>

#include "flashopt/opt/problem.hpp"

namespace flashopt::opt {

struct LocalOptions {
  int max_iterations = 200;
  Scalar tolerance = 1e-9;
  Scalar feasibility_tolerance = 1e-6;
  // Relative to the width of each parameter box.
  Scalar fd_step = 1e-6;
};

struct LocalResult {
  Vector x;
  Scalar objective = 0.0;
  Vector constraints;
  Scalar worst_scaled = 0.0;
  int iterations = 0;
  bool converged = false;
  // The QP subproblem broke down; the caller may retry with another method.
  bool qp_failed = false;
  std::string status;
};

LocalResult sqp_solve(const Problem& problem, const Vector& x0, const LocalOptions& options);
LocalResult auglag_solve(const Problem& problem, const Vector& x0, const LocalOptions& options);

namespace detail {

// Problem seen in unit-box coordinates z = (x - lower) / (upper - lower),
// objective negated and divided by `fscale`, constraints divided by their
// scales. Both solvers minimize phi(z) subject to c(z) >= 0, 0 <= z <= 1.
class NormalizedProblem {
 public:
  NormalizedProblem(const Problem& problem, Scalar fd_step);

  int n() const { return problem_.n; }
  int m() const { return problem_.m; }
  Vector to_x(const Vector& z) const;
  Vector to_z(const Vector& x) const;
  void set_fscale(Scalar s) { fscale_ = s; }

  // [phi; c] at z.
  Vector values(const Vector& z) const;
  // Rows: phi then each constraint.
  Matrix jacobian(const Vector& z, const Vector& f0) const;

 private:
  const Problem& problem_;
  Vector width_;
  Scalar fd_step_;
  Scalar fscale_ = 1.0;
};

}  // namespace detail

}  // namespace flashopt::opt
