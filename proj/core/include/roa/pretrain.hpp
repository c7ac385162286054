#pragma once

#include <random>

#include "roa/grid.hpp"
#include "roa/lyapunov_net.hpp"

namespace roa {

struct PretrainOptions {
  double lr = 0.001;
  int steps = 10000;
  /// Grid cells drawn (with replacement) per SGD step.
  int batch = 256;
  double coeff_theta = 0.1;
  double coeff_omega = 0.1;
  /// Full-grid MSE is re-evaluated this often to detect divergence.
  int check_every = 500;
};

struct PretrainResult {
  PDLyapunovNet net;
  double initial_mse = 0.0;
  double final_mse = 0.0;
};

/// Mean squared error between V and coeff_theta*theta^2 + coeff_omega*omega^2 over the grid.
double quadratic_mse(const PDLyapunovNet& net, const GridDomain& grid, double coeff_theta = 0.1,
                     double coeff_omega = 0.1);

/// Fits V to the quadratic target with minibatch SGD over grid cells. Throws
/// TrainingDivergence if the grid MSE becomes non-finite or exceeds 10x its initial value.
PretrainResult pretrain_quadratic(const PDLyapunovNet& net, const GridDomain& grid, const PretrainOptions& opts,
                                  std::mt19937_64& rng);

}  // namespace roa
