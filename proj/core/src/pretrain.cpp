#include "roa/pretrain.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "roa/text_io.hpp"

namespace roa {

namespace {

Eigen::VectorXd quadratic_target(const Eigen::Matrix2Xd& xs, double ct, double co) {
  return (ct * xs.row(0).array().square() + co * xs.row(1).array().square()).matrix().transpose();
}

}  // namespace

double quadratic_mse(const PDLyapunovNet& net, const GridDomain& grid, double coeff_theta, double coeff_omega) {
  const Eigen::Matrix2Xd xs = grid.centers();
  const Eigen::VectorXd err = net.values(xs) - quadratic_target(xs, coeff_theta, coeff_omega);
  return err.squaredNorm() / static_cast<double>(xs.cols());
}

PretrainResult pretrain_quadratic(const PDLyapunovNet& net, const GridDomain& grid, const PretrainOptions& opts,
                                  std::mt19937_64& rng) {
  if (!(opts.lr > 0.0)) throw std::invalid_argument("pretrain: lr must be > 0");
  if (opts.steps < 0 || opts.batch < 1) throw std::invalid_argument("pretrain: bad step or batch count");
  PretrainResult res{net, 0.0, 0.0};
  res.initial_mse = quadratic_mse(net, grid, opts.coeff_theta, opts.coeff_omega);
  res.final_mse = res.initial_mse;
  if (opts.steps == 0) return res;

  const Eigen::Matrix2Xd centers = grid.centers();
  std::uniform_int_distribution<int> pick(0, grid.size() - 1);
  Eigen::Matrix2Xd xs(2, opts.batch);
  const auto check = [&](int step) {
    const double mse = quadratic_mse(res.net, grid, opts.coeff_theta, opts.coeff_omega);
    if (!std::isfinite(mse) || mse > 10.0 * res.initial_mse) {
      throw TrainingDivergence("pretrain diverged at step " + std::to_string(step) +
                               ": grid MSE " + format_double(mse) + " vs initial " +
                               format_double(res.initial_mse));
    }
    return mse;
  };

  for (int step = 1; step <= opts.steps; ++step) {
    for (int j = 0; j < opts.batch; ++j) xs.col(j) = centers.col(pick(rng));
    const ForwardTape tape = res.net.forward(xs);
    const Eigen::VectorXd err = tape.values - quadratic_target(xs, opts.coeff_theta, opts.coeff_omega);
    const ParamGrad grad = res.net.backward(tape, (2.0 / opts.batch) * err);
    res.net.sgd_step(grad, opts.lr);
    if (opts.check_every > 0 && step % opts.check_every == 0 && step != opts.steps) check(step);
  }
  res.final_mse = check(opts.steps);
  return res;
}

}  // namespace roa
