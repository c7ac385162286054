#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "roa/policy.hpp"
#include "roa/state.hpp"

namespace roa {

/// Inverted pendulum: d theta/dt = omega, d omega/dt = (g/l) sin theta + u/I - mu_f omega / I.
struct PendulumParams {
  double g = 0.81;
  double l = 0.5;
  double inertia = 0.25;
  double mu_f = 0.0;
  double dt = 0.01;

  void validate() const;
};

struct StateDeriv {
  double dtheta = 0.0;
  double domega = 0.0;
};

StateDeriv pendulum_deriv(const StateVec& s, double u, const PendulumParams& p);

/// One forward-Euler step of length p.dt.
StateVec step_euler(const StateVec& s, double u, const PendulumParams& p);

/// An autonomous discrete-time map x_{k+1} = f(x_k) with the sensitivities needed
/// for backpropagation through rollouts.
class DiscreteMap {
 public:
  virtual ~DiscreteMap() = default;

  virtual StateVec operator()(const StateVec& x) const = 0;
  /// Control applied at x (zero for maps without an input).
  virtual double control(const StateVec& x) const;
  /// Total derivative d f / d x, including the feedback path.
  virtual Eigen::Matrix2d jacobian(const StateVec& x) const = 0;
  /// Number of trainable parameters the map depends on.
  virtual int num_params() const;
  /// Immediate derivative of f(x) w.r.t. the trainable parameters, x held fixed.
  virtual Eigen::Matrix2Xd param_jacobian(const StateVec& x) const;
};

/// x_{k+1} = A x_k.
class LinearMap final : public DiscreteMap {
 public:
  explicit LinearMap(const Eigen::Matrix2d& a) : a_(a) {}

  StateVec operator()(const StateVec& x) const override;
  Eigen::Matrix2d jacobian(const StateVec& x) const override;

 private:
  Eigen::Matrix2d a_;
};

/// f_pi(x) = step_euler(x, policy_eval(x)): the Euler pendulum under a saturated policy.
class PendulumClosedLoop final : public DiscreteMap {
 public:
  PendulumClosedLoop(const PendulumParams& params, const SatPolicy& policy);

  StateVec operator()(const StateVec& x) const override;
  double control(const StateVec& x) const override;
  Eigen::Matrix2d jacobian(const StateVec& x) const override;
  int num_params() const override;
  Eigen::Matrix2Xd param_jacobian(const StateVec& x) const override;

  const PendulumParams& params() const { return params_; }
  const SatPolicy& policy() const { return policy_; }

 private:
  PendulumParams params_;
  SatPolicy policy_;
};

PendulumClosedLoop closed_loop(const SatPolicy& policy, const PendulumParams& params);

/// Axis-aligned box |theta| <= theta_max, |omega| <= omega_max outside of which a rollout
/// is considered divergent.
struct SafetyBox {
  double theta_max = 0.0;
  double omega_max = 0.0;

  bool contains(const StateVec& x) const;
};

struct Trajectory {
  std::vector<StateVec> states;  ///< states[0] = x0; only in-box states are kept
  std::vector<double> controls;  ///< controls[k] applied at states[k]
  bool diverged = false;         ///< true if the rollout left the safety box and was truncated

  const StateVec& final_state() const { return states.back(); }
  int length() const { return static_cast<int>(controls.size()); }
};

/// Flow Phi(x0, k) for k = 0..steps. With a box, the rollout stops before the first state
/// outside it and the trajectory is flagged as diverged.
Trajectory rollout(const DiscreteMap& f, const StateVec& x0, int steps, const SafetyBox* box = nullptr);

struct LinearModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
};

using ControlledStep = std::function<StateVec(const StateVec&, double)>;

/// Central finite-difference Jacobians of a discrete controlled map at (s0, u0).
LinearModel linearize(const ControlledStep& step, const StateVec& s0, double u0, double h = 1e-5);

/// Analytic Jacobians of the Euler pendulum: A = I + dt [[0, 1], [(g/l) cos th0, -mu_f/I]],
/// B = dt [0, 1/I]^T.
LinearModel pendulum_linearization(const StateVec& s0, const PendulumParams& p);

struct LqrSolution {
  Eigen::MatrixXd K;  ///< u = -K x
  Eigen::MatrixXd P;
  int iterations = 0;
  double closed_loop_spectral_radius = 0.0;
};

/// P <- A'PA - A'PB (R + B'PB)^-1 B'PA + Q.
Eigen::MatrixXd riccati_step(const Eigen::MatrixXd& P, const LinearModel& m, const Eigen::MatrixXd& Q,
                             const Eigen::MatrixXd& R);

/// Discrete LQR gain by fixed-point iteration of the Riccati recursion starting from P = Q.
/// Throws NumericalError if the iteration does not reach max|dP| < tol within max_iter
/// steps or if the resulting closed loop is not Schur stable.
LqrSolution dare_lqr(const LinearModel& m, const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                     double tol = 1e-10, int max_iter = 10000);

double spectral_radius(const Eigen::MatrixXd& M);

/// LQR gain of the pendulum linearized at the origin.
Eigen::RowVector2d pendulum_lqr_gain(const PendulumParams& p, double q_theta = 1.0, double q_omega = 1.0,
                                     double r = 1.0);

}  // namespace roa
