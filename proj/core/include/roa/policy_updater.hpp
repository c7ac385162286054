#pragma once

#include <random>
#include <vector>

#include <Eigen/Core>

#include "roa/dynamics.hpp"
#include "roa/grid.hpp"
#include "roa/roa_estimator.hpp"

namespace roa {

struct PolicyUpdHyper {
  double gamma = 4.0;
  double beta = 0.6;
  int n_samples = 10;
  int rollout_steps = 10;  ///< L_p
  double lambda_u = 10.0;
  double lr = 0.01;
  int sgd_steps = 100;
  double safety_factor = 10.0;

  void validate() const;
};

struct PolicyBatch {
  std::vector<StateVec> states;
  bool gap_empty = false;       ///< no gap cells; drawn from the interior only
  bool interior_empty = false;  ///< no interior cells; drawn from the gap only
};

/// Mixture beta * U({c < V < gamma c}) + (1 - beta) * U({V < c}) over the grid. Falls back to
/// whichever part is non-empty, and to the whole domain if both are empty.
PolicyBatch sample_policy_batch(const LevelSetEstimate& est, const GridField& v_field, const PolicyUpdHyper& hyper,
                                std::mt19937_64& rng);
PolicyBatch sample_policy_batch(const LevelSetEstimate& est, const PolicyUpdHyper& hyper, const GridDomain& grid,
                                std::mt19937_64& rng);

struct PolicyLossResult {
  double loss = 0.0;
  Eigen::VectorXd grad;  ///< d loss / d psi over the map's trainable parameters
  int n_outside = 0;     ///< end states with V > c (weighted by lambda_u)
  int n_diverged = 0;    ///< rollouts truncated at the safety box
};

/// sum_x [1{V(x_T) < c} + lambda_u 1{V(x_T) > c}] V(x_T), x_T = Phi(x, L_p). The indicator
/// weights are constants for differentiation; a divergent rollout contributes lambda_u times
/// V of its last in-box state.
double policy_loss(const DiscreteMap& f, const LyapunovCandidate& v, double c, const std::vector<StateVec>& x0s,
                   int rollout_steps, double lambda_u, const SafetyBox& box);

/// Loss and its exact gradient w.r.t. the parameters of f by reverse accumulation through
/// each rollout: dL/dpsi = sum_k lambda_{k+1}' d+x_{k+1}/dpsi with lambda_k = J(x_k)' lambda_{k+1}.
PolicyLossResult policy_loss_and_grad(const DiscreteMap& f, const LyapunovCandidate& v, double c,
                                      const std::vector<StateVec>& x0s, int rollout_steps, double lambda_u,
                                      const SafetyBox& box);

double policy_loss(const SatPolicy& pol, const PendulumParams& params, const LevelSetEstimate& est,
                   const std::vector<StateVec>& x0s, int rollout_steps, double lambda_u, const SafetyBox& box);
Eigen::VectorXd bptt_grad(const SatPolicy& pol, const PendulumParams& params, const LevelSetEstimate& est,
                          const std::vector<StateVec>& x0s, int rollout_steps, double lambda_u,
                          const SafetyBox& box);

struct SignalDiagnostics {
  /// Root-sum-square over the batch of |dL/dx_T|.
  double grad_norm_final = 0.0;
  /// Entry k: batch mean of the spectral norm of dx_T/dx_k, k = 0..T.
  std::vector<double> per_step_jacobian_norms;
  /// |dL/dpsi|, identical to the norm of policy_loss_and_grad's gradient.
  double grad_norm_psi = 0.0;
  /// grad_norm_final < 1e-6: end states sit where grad V vanishes.
  bool weak_signal = false;
};

inline constexpr double kWeakSignalThreshold = 1e-6;

SignalDiagnostics signal_diagnostics(const DiscreteMap& f, const LyapunovCandidate& v, double c,
                                     const std::vector<StateVec>& x0s, int rollout_steps, double lambda_u,
                                     const SafetyBox& box);

struct PolicyUpdateResult {
  SatPolicy policy;
  double loss_before = 0.0;
  double loss_after = 0.0;
  SignalDiagnostics diagnostics;  ///< at the phase-start policy
  PolicyBatch batch;
};

/// One policy sub-phase: a fresh batch, sgd_steps plain SGD steps on the policy loss (psi kept
/// feasible after every step), then the result cropped to within crop_radius of the starting psi.
/// Throws TrainingDivergence on a non-finite gradient.
PolicyUpdateResult update_policy(const SatPolicy& pol, const LevelSetEstimate& est, const PendulumParams& params,
                                 const PolicyUpdHyper& hyper, const GridDomain& grid, std::mt19937_64& rng);

}  // namespace roa
