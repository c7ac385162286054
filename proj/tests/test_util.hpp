#pragma once

#include <cmath>
#include <functional>

#include <Eigen/Core>

namespace roa::test {

/// Central difference of a scalar function of a vector.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& fn, const Eigen::VectorXd& x,
                                   double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (fn(xp) - fn(xm)) / (2.0 * h);
  }
  return g;
}

/// |a - b| / max(|b|, floor), the relative error used by the gradient oracles.
inline double rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor = 1e-8) {
  return (a - b).norm() / std::max(b.norm(), floor);
}

}  // namespace roa::test
