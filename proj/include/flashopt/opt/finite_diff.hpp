#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "flashopt/composer/attack_vector.hpp"

namespace flashopt::opt {

class FiniteDifferenceError : public std::runtime_error {
 public:
  FiniteDifferenceError(int coordinate, const std::string& what)
      : std::runtime_error("coordinate " + std::to_string(coordinate) + ": " + what),
        coordinate_(coordinate) {}
  int coordinate() const { return coordinate_; }

 private:
  int coordinate_;
};

// Central differences of a scalar function f(x) with per-coordinate steps.
// Exceptions thrown by f are rethrown as FiniteDifferenceError naming the
// coordinate.
template <typename Scalar, typename F>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> central_gradient(
    F&& f, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& step) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g(x.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    try {
      probe[i] = x[i] + step[i];
      const Scalar up = f(probe);
      probe[i] = x[i] - step[i];
      const Scalar down = f(probe);
      probe[i] = x[i];
      g[i] = (up - down) / (Scalar(2) * step[i]);
    } catch (const FiniteDifferenceError&) {
      throw;
    } catch (const std::exception& e) {
      throw FiniteDifferenceError(static_cast<int>(i), e.what());
    }
  }
  return g;
}

// Jacobian of a vector function, rows = outputs. Central differences where
// the box allows, one-sided at the bounds. `f0` is f(x).
template <typename Scalar, typename F>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> bounded_jacobian(
    F&& f, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f0,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& lower,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& upper,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& step) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> jac(f0.size(), x.size());
  Vec probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Scalar h = step[i];
    const bool room_up = x[i] + h <= upper[i];
    const bool room_down = x[i] - h >= lower[i];
    try {
      if (room_up && room_down) {
        probe[i] = x[i] + h;
        const Vec up = f(probe);
        probe[i] = x[i] - h;
        const Vec down = f(probe);
        jac.col(i) = (up - down) / (Scalar(2) * h);
      } else if (room_up) {
        probe[i] = x[i] + h;
        jac.col(i) = (f(probe) - f0) / h;
      } else {
        probe[i] = x[i] - h;
        jac.col(i) = (f0 - f(probe)) / h;
      }
    } catch (const std::exception& e) {
      throw FiniteDifferenceError(static_cast<int>(i), e.what());
    }
    probe[i] = x[i];
  }
  return jac;
}

// Central-difference gradient of the vector's objective at `params` with an
// absolute step per coordinate. Requires lower + step <= params <= upper -
// step.
Vector finite_diff_gradient(const composer::AttackVector& vector,
                            const models::WorldState& scenario, const Vector& params,
                            Scalar step);

}  // namespace flashopt::opt
