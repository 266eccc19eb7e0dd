#include <algorithm>
#include <cmath>

#include "flashopt/opt/local.hpp"

namespace flashopt::opt {

namespace {

struct Inner {
  Scalar value = 0.0;
  Vector grad;
};

// Augmented Lagrangian of phi s.t. c >= 0 with the usual inequality
// treatment: active pieces are quadratic, inactive pieces constant.
Inner lagrangian(const Vector& f, const Matrix& jac, const Vector& lambda, Scalar rho) {
  const Eigen::Index m = lambda.size();
  Inner out;
  out.value = f[0];
  out.grad = jac.row(0).transpose();
  for (Eigen::Index k = 0; k < m; ++k) {
    const Scalar c = f[1 + k];
    if (c < lambda[k] / rho) {
      out.value += -lambda[k] * c + 0.5 * rho * c * c;
      out.grad -= (lambda[k] - rho * c) * jac.row(1 + k).transpose();
    } else {
      out.value += -0.5 * lambda[k] * lambda[k] / rho;
    }
  }
  return out;
}

Scalar inner_value(const Vector& f, const Vector& lambda, Scalar rho) {
  Scalar v = f[0];
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    const Scalar c = f[1 + k];
    v += c < lambda[k] / rho ? -lambda[k] * c + 0.5 * rho * c * c
                             : -0.5 * lambda[k] * lambda[k] / rho;
  }
  return v;
}

Vector project(const Vector& z) { return z.cwiseMax(0.0).cwiseMin(1.0); }

}  // namespace

LocalResult auglag_solve(const Problem& problem, const Vector& x0, const LocalOptions& options) {
  detail::NormalizedProblem np(problem, options.fd_step);
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

  auto finish = [&](int iterations, bool converged, const char* status) {
    LocalResult r;
    r.x = np.to_x(z);
    const ProblemValue v = problem(r.x);
    r.objective = v.objective;
    r.constraints = v.constraints;
    r.worst_scaled = problem.worst_scaled(v.constraints);
    r.iterations = iterations;
    r.converged = converged;
    r.status = status;
    return r;
  };

  Vector lambda = Vector::Zero(m);
  Scalar rho = 10.0;
  Scalar prev_viol = kInfinity;
  int total = 0;
  const int inner_limit = std::max(100, options.max_iterations);
  const int outer_limit = 60;
  for (int outer = 0; outer < outer_limit; ++outer) {
    const Scalar phi_before = f[0];
    Scalar step_len = 1.0;
    Vector z_prev, g_prev;
    for (int inner = 0; inner < inner_limit; ++inner, ++total) {
      Matrix jac;
      try {
        jac = np.jacobian(z, f);
      } catch (const std::exception&) {
        return finish(total, false, "gradient failed");
      }
      const Inner here = lagrangian(f, jac, lambda, rho);
      const Scalar pg = (project(z - here.grad) - z).lpNorm<Eigen::Infinity>();
      if (pg <= std::max(options.tolerance, 1e-3 / (1.0 + outer * outer))) break;
      // Barzilai-Borwein step length, safeguarded by backtracking.
      if (z_prev.size()) {
        const Vector s = z - z_prev, y = here.grad - g_prev;
        const Scalar sy = s.dot(y);
        step_len = sy > 1e-20 ? std::clamp(s.squaredNorm() / sy, 1e-8, 1e3) : 1.0;
      }
      // Penalty gradients can be huge far from feasibility; cap the move.
      step_len = std::min(step_len, 0.1 / std::max(here.grad.lpNorm<Eigen::Infinity>(), 1e-300));
      z_prev = z;
      g_prev = here.grad;
      bool moved = false;
      for (int ls = 0; ls < 40; ++ls) {
        const Vector trial = project(z - step_len * here.grad);
        try {
          const Vector ft = np.values(trial);
          if (inner_value(ft, lambda, rho) <=
              here.value + 1e-4 * here.grad.dot(trial - z)) {
            z = trial;
            f = ft;
            moved = true;
            break;
          }
        } catch (const std::exception&) {
        }
        step_len *= 0.5;
      }
      if (!moved) break;
    }
    const Vector c = f.tail(m);
    const Scalar viol = m > 0 ? (-c.array()).max(0.0).maxCoeff() : 0.0;
    lambda = (lambda - rho * c).cwiseMax(0.0);
    if (viol <= options.feasibility_tolerance &&
        std::abs(f[0] - phi_before) <= options.tolerance * std::max(1.0, std::abs(f[0])) &&
        outer > 0) {
      return finish(total, true, "converged");
    }
    if (viol > 0.25 * prev_viol) rho = std::min(rho * 10.0, 1e10);
    prev_viol = viol;
  }
  return finish(total, false, "iteration limit");
}

}  // namespace flashopt::opt
