#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace roa {

/// A point of the pendulum state space: angle (rad) and angular velocity (rad/s).
struct StateVec {
  double theta = 0.0;
  double omega = 0.0;

  Eigen::Vector2d vec() const { return {theta, omega}; }
  static StateVec from(const Eigen::Vector2d& v) { return {v(0), v(1)}; }

  double norm() const { return std::hypot(theta, omega); }
  bool finite() const { return std::isfinite(theta) && std::isfinite(omega); }

  friend bool operator==(const StateVec&, const StateVec&) = default;
};

/// Raised when an iterative numerical routine fails to produce a usable result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a training loop produces non-finite values or diverges.
class TrainingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace roa
