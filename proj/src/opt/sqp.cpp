#include <algorithm>
#include <cmath>

#include "flashopt/opt/finite_diff.hpp"
#include "flashopt/opt/local.hpp"
#include "flashopt/opt/qp.hpp"

namespace flashopt::opt {

namespace detail {

NormalizedProblem::NormalizedProblem(const Problem& problem, Scalar fd_step)
    : problem_(problem), width_(problem.upper - problem.lower), fd_step_(fd_step) {}

Vector NormalizedProblem::to_x(const Vector& z) const {
  return problem_.lower + z.cwiseProduct(width_);
}

Vector NormalizedProblem::to_z(const Vector& x) const {
  Vector z(x.size());
  for (int i = 0; i < x.size(); ++i) {
    z[i] = width_[i] > 0.0 ? (x[i] - problem_.lower[i]) / width_[i] : 0.0;
  }
  return z.cwiseMax(0.0).cwiseMin(1.0);
}

Vector NormalizedProblem::values(const Vector& z) const {
  const ProblemValue v = problem_(to_x(z));
  Vector out(1 + problem_.m);
  out[0] = -v.objective / fscale_;
  if (problem_.m > 0) out.tail(problem_.m) = v.constraints.cwiseQuotient(problem_.scales);
  if (!out.allFinite()) throw std::runtime_error("non-finite value");
  return out;
}

Matrix NormalizedProblem::jacobian(const Vector& z, const Vector& f0) const {
  const Vector lo = Vector::Zero(z.size()), hi = Vector::Ones(z.size());
  const Vector step = Vector::Constant(z.size(), fd_step_);
  return bounded_jacobian<Scalar>([this](const Vector& p) { return values(p); }, z, f0, lo, hi,
                                  step);
}

}  // namespace detail

namespace {

Scalar violation(const Vector& c) { return (-c.array()).max(0.0).sum(); }

Scalar worst(const Vector& c) { return c.size() ? std::min(0.0, c.minCoeff()) : 0.0; }

void damped_bfgs(Matrix& B, const Vector& s, const Vector& y) {
  const Vector Bs = B * s;
  const Scalar sBs = s.dot(Bs);
  if (!(sBs > 1e-16)) return;
  const Scalar sy = s.dot(y);
  Scalar theta = 1.0;
  if (sy < 0.2 * sBs) theta = 0.8 * sBs / (sBs - sy);
  const Vector r = theta * y + (1.0 - theta) * Bs;
  const Scalar sr = s.dot(r);
  if (!(sr > 1e-16)) return;
  B += r * r.transpose() / sr - Bs * Bs.transpose() / sBs;
  B = 0.5 * (B + B.transpose());
}

LocalResult finish(const Problem& problem, const detail::NormalizedProblem& np, const Vector& z,
                   int iterations, bool converged, std::string status) {
  LocalResult r;
  r.x = np.to_x(z);
  const ProblemValue v = problem(r.x);
  r.objective = v.objective;
  r.constraints = v.constraints;
  r.worst_scaled = problem.worst_scaled(v.constraints);
  r.iterations = iterations;
  r.converged = converged;
  r.status = std::move(status);
  return r;
}

struct Direction {
  bool ok = false;
  Vector d;
  Vector lambda;  // multipliers of the general constraints
};

// QP subproblem; falls back to an elastic version (one shared slack on the
// general constraints) when the linearization is inconsistent.
Direction qp_direction(const Matrix& B, const Vector& g, const Matrix& Jc, const Vector& c,
                       const Vector& z, Scalar penalty) {
  const int n = static_cast<int>(z.size());
  const int m = static_cast<int>(c.size());
  Matrix C(m + 2 * n, n);
  Vector b(m + 2 * n);
  if (m) C.topRows(m) = Jc;
  C.middleRows(m, n) = Matrix::Identity(n, n);
  C.bottomRows(n) = -Matrix::Identity(n, n);
  if (m) b.head(m) = -c;
  b.segment(m, n) = -z;
  b.tail(n) = z - Vector::Ones(n);

  Direction out;
  const auto plain = solve_qp<Scalar>(B, g, C, b);
  if (plain.status == QpStatus::optimal) {
    out.ok = true;
    out.d = plain.x;
    out.lambda = plain.multipliers.head(m);
    return out;
  }
  if (m == 0) return out;

  Matrix Ge = Matrix::Zero(n + 1, n + 1);
  Ge.topLeftCorner(n, n) = B;
  Ge(n, n) = 1e-6 * std::max(1.0, B.diagonal().maxCoeff());
  Vector ge(n + 1);
  ge << g, penalty;
  Matrix Ce = Matrix::Zero(C.rows() + 1, n + 1);
  Ce.topLeftCorner(C.rows(), n) = C;
  Ce.block(0, n, m, 1).setOnes();
  Ce(C.rows(), n) = 1.0;
  Vector be(b.size() + 1);
  be << b, 0.0;
  const auto elastic = solve_qp<Scalar>(Ge, ge, Ce, be);
  if (elastic.status != QpStatus::optimal) return out;
  out.ok = true;
  out.d = elastic.x.head(n);
  out.lambda = elastic.multipliers.head(m);
  return out;
}

}  // namespace

LocalResult sqp_solve(const Problem& problem, const Vector& x0, const LocalOptions& options) {
  detail::NormalizedProblem np(problem, options.fd_step);
  const int n = problem.n;
  const int m = problem.m;
  Vector z = np.to_z(x0);

  Vector f;
  try {
    np.set_fscale(std::max(1.0, std::abs(problem(np.to_x(z)).objective)));
    f = np.values(z);
  } catch (const std::exception& e) {
    LocalResult r;
    r.x = np.to_x(z);
    r.status = std::string("start not evaluable: ") + e.what();
    r.worst_scaled = -kInfinity;
    r.objective = -kInfinity;
    return r;
  }

  Matrix B;
  Scalar mu = 1.0;
  Vector prev_g, step;
  Matrix prev_jc;
  Vector prev_lambda;
  int resets = 0;
  bool have_prev = false;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    Matrix jac;
    try {
      jac = np.jacobian(z, f);
    } catch (const std::exception& e) {
      return finish(problem, np, z, it, false, std::string("gradient failed: ") + e.what());
    }
    const Vector g = jac.row(0).transpose();
    const Matrix Jc = jac.bottomRows(m);
    const Vector c = f.tail(m);

    if (it == 0) B = std::max(1.0, g.norm()) * Matrix::Identity(n, n);
    if (have_prev) {
      const Vector y =
          (g - Jc.transpose() * prev_lambda) - (prev_g - prev_jc.transpose() * prev_lambda);
      damped_bfgs(B, step, y);
    }

    Direction dir = qp_direction(B, g, Jc, c, z, std::max(100.0, 10.0 * mu));
    if (!dir.ok) {
      LocalResult r = finish(problem, np, z, it, false, "QP subproblem failed");
      r.qp_failed = true;
      return r;
    }

    const Scalar viol = violation(c);
    if (dir.d.lpNorm<Eigen::Infinity>() <= options.tolerance &&
        -worst(c) <= options.feasibility_tolerance) {
      return finish(problem, np, z, it, true, "converged");
    }

    if (m) mu = std::max(mu, 1.1 * dir.lambda.maxCoeff());
    const Scalar merit = f[0] + mu * viol;
    const Scalar slope = g.dot(dir.d) - mu * viol;

    Scalar alpha = 1.0;
    bool accepted = false;
    Vector z_new, f_new;
    for (int ls = 0; ls < 40; ++ls) {
      z_new = (z + alpha * dir.d).cwiseMax(0.0).cwiseMin(1.0);
      Scalar trial = kInfinity;
      try {
        f_new = np.values(z_new);
        trial = f_new[0] + mu * violation(f_new.tail(m));
      } catch (const std::exception&) {
      }
      const bool armijo = slope < 0.0 ? trial <= merit + 1e-4 * alpha * slope : trial < merit;
      if (armijo) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (-worst(c) <= options.feasibility_tolerance &&
          dir.d.lpNorm<Eigen::Infinity>() <= std::sqrt(options.tolerance)) {
        return finish(problem, np, z, it + 1, true, "converged");
      }
      if (++resets > 2) return finish(problem, np, z, it + 1, false, "line search failed");
      B = std::max(1.0, g.norm()) * Matrix::Identity(n, n);
      have_prev = false;
      continue;
    }
    resets = 0;

    prev_g = g;
    prev_jc = Jc;
    prev_lambda = dir.lambda;
    step = z_new - z;
    have_prev = true;

    const Scalar change = std::abs(f_new[0] - f[0]);
    z = z_new;
    f = f_new;
    if (change <= options.tolerance * std::max(1.0, std::abs(f[0])) &&
        step.lpNorm<Eigen::Infinity>() <= std::sqrt(options.tolerance) &&
        -worst(f.tail(m)) <= options.feasibility_tolerance) {
      return finish(problem, np, z, it + 1, true, "converged");
    }
  }
  return finish(problem, np, z, it, false, "iteration limit");
}

}  // namespace flashopt::opt
