#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace flashopt {

using Scalar = double;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr Scalar kInfinity = std::numeric_limits<Scalar>::infinity();

// Tolerance used by strict-mode execution: a residual below -kStrictTolerance
// counts as a violation.
inline constexpr Scalar kStrictTolerance = 1e-9;

// Unknown pool, wrong pool kind, invalid model parameters. Never raised for a
// merely infeasible parameter choice.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation called in a state where it has no meaning (e.g. repaying a
// position that was never opened).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file or record.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A residual went negative while running in strict mode.
class ConstraintViolation : public std::runtime_error {
 public:
  ConstraintViolation(const std::string& what, Scalar residual)
      : std::runtime_error(what), residual_(residual) {}
  Scalar residual() const { return residual_; }

 private:
  Scalar residual_;
};

// mt19937_64 with hand-rolled uniform/normal draws; the std distributions
// differ between standard libraries, the engine does not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1).
  Scalar uniform();
  Scalar uniform(Scalar lo, Scalar hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  Scalar normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  Scalar spare_ = 0.0;
};

// Derives an independent seed for sub-stream `index` of `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// 64-bit FNV-1a, used for report config/scenario fingerprints.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t value);

}  // namespace flashopt
