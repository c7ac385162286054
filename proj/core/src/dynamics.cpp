#include "roa/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace roa {

void PendulumParams::validate() const {
  if (!(l > 0.0)) throw std::invalid_argument("pendulum length l must be > 0");
  if (!(inertia > 0.0)) throw std::invalid_argument("pendulum inertia must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("time step dt must be > 0");
  if (!(mu_f >= 0.0)) throw std::invalid_argument("friction mu_f must be >= 0");
  if (!std::isfinite(g)) throw std::invalid_argument("gravity g must be finite");
}

StateDeriv pendulum_deriv(const StateVec& s, double u, const PendulumParams& p) {
  return {s.omega, (p.g / p.l) * std::sin(s.theta) + u / p.inertia - p.mu_f * s.omega / p.inertia};
}

StateVec step_euler(const StateVec& s, double u, const PendulumParams& p) {
  const StateDeriv d = pendulum_deriv(s, u, p);
  return {s.theta + p.dt * d.dtheta, s.omega + p.dt * d.domega};
}

double DiscreteMap::control(const StateVec&) const { return 0.0; }

int DiscreteMap::num_params() const { return 0; }

Eigen::Matrix2Xd DiscreteMap::param_jacobian(const StateVec&) const { return Eigen::Matrix2Xd(2, 0); }

StateVec LinearMap::operator()(const StateVec& x) const { return StateVec::from(a_ * x.vec()); }

Eigen::Matrix2d LinearMap::jacobian(const StateVec&) const { return a_; }

PendulumClosedLoop::PendulumClosedLoop(const PendulumParams& params, const SatPolicy& policy)
    : params_(params), policy_(policy) {
  params_.validate();
  policy_.validate();
}

StateVec PendulumClosedLoop::operator()(const StateVec& x) const {
  return step_euler(x, policy_eval(x, policy_), params_);
}

double PendulumClosedLoop::control(const StateVec& x) const { return policy_eval(x, policy_); }

Eigen::Matrix2d PendulumClosedLoop::jacobian(const StateVec& x) const {
  const double dt = params_.dt;
  const double slope = sat_slope(policy_feedback(x, policy_), policy_.psi);
  Eigen::Matrix2d J;
  J << 1.0, dt,
      dt * (params_.g / params_.l) * std::cos(x.theta), 1.0 - dt * params_.mu_f / params_.inertia;
  // du/dx = -slope * K enters through the omega row only.
  J(1, 0) -= dt / params_.inertia * slope * policy_.K(0);
  J(1, 1) -= dt / params_.inertia * slope * policy_.K(1);
  return J;
}

int PendulumClosedLoop::num_params() const { return policy_.psi.num_trainable(); }

Eigen::Matrix2Xd PendulumClosedLoop::param_jacobian(const StateVec& x) const {
  const Eigen::VectorXd du = policy_grad_psi(x, policy_);
  Eigen::Matrix2Xd out = Eigen::Matrix2Xd::Zero(2, du.size());
  out.row(1) = (params_.dt / params_.inertia) * du.transpose();
  return out;
}

PendulumClosedLoop closed_loop(const SatPolicy& policy, const PendulumParams& params) {
  return PendulumClosedLoop(params, policy);
}

bool SafetyBox::contains(const StateVec& x) const {
  return x.finite() && std::abs(x.theta) <= theta_max && std::abs(x.omega) <= omega_max;
}

Trajectory rollout(const DiscreteMap& f, const StateVec& x0, int steps, const SafetyBox* box) {
  if (steps < 0) throw std::invalid_argument("rollout step count must be >= 0");
  Trajectory traj;
  traj.states.reserve(static_cast<std::size_t>(steps) + 1);
  traj.controls.reserve(static_cast<std::size_t>(steps));
  traj.states.push_back(x0);
  if (box != nullptr && !box->contains(x0)) {
    traj.diverged = true;
    return traj;
  }
  StateVec x = x0;
  for (int k = 0; k < steps; ++k) {
    const double u = f.control(x);
    const StateVec next = f(x);
    if (box != nullptr && !box->contains(next)) {
      traj.diverged = true;
      break;
    }
    traj.controls.push_back(u);
    traj.states.push_back(next);
    x = next;
  }
  return traj;
}

LinearModel linearize(const ControlledStep& step, const StateVec& s0, double u0, double h) {
  if (!s0.finite() || !std::isfinite(u0)) throw std::invalid_argument("linearize: non-finite point");
  LinearModel m{Eigen::MatrixXd(2, 2), Eigen::MatrixXd(2, 1)};
  const Eigen::Vector2d x0 = s0.vec();
  for (int j = 0; j < 2; ++j) {
    Eigen::Vector2d e = Eigen::Vector2d::Zero();
    e(j) = h;
    const Eigen::Vector2d fp = step(StateVec::from(x0 + e), u0).vec();
    const Eigen::Vector2d fm = step(StateVec::from(x0 - e), u0).vec();
    m.A.col(j) = (fp - fm) / (2.0 * h);
  }
  m.B.col(0) = (step(s0, u0 + h).vec() - step(s0, u0 - h).vec()) / (2.0 * h);
  return m;
}

LinearModel pendulum_linearization(const StateVec& s0, const PendulumParams& p) {
  LinearModel m{Eigen::MatrixXd(2, 2), Eigen::MatrixXd(2, 1)};
  m.A << 1.0, p.dt,
      p.dt * (p.g / p.l) * std::cos(s0.theta), 1.0 - p.dt * p.mu_f / p.inertia;
  m.B << 0.0, p.dt / p.inertia;
  return m;
}

Eigen::MatrixXd riccati_step(const Eigen::MatrixXd& P, const LinearModel& m, const Eigen::MatrixXd& Q,
                             const Eigen::MatrixXd& R) {
  const Eigen::MatrixXd& A = m.A;
  const Eigen::MatrixXd& B = m.B;
  const Eigen::MatrixXd BtPA = B.transpose() * P * A;
  const Eigen::MatrixXd S = R + B.transpose() * P * B;
  return A.transpose() * P * A - BtPA.transpose() * S.ldlt().solve(BtPA) + Q;
}

double spectral_radius(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("spectral_radius: matrix must be square");
  return M.eigenvalues().cwiseAbs().maxCoeff();
}

LqrSolution dare_lqr(const LinearModel& m, const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R, double tol,
                     int max_iter) {
  const auto n = m.A.rows();
  if (m.A.cols() != n || m.B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m.B.cols() ||
      R.cols() != m.B.cols()) {
    throw std::invalid_argument("dare_lqr: inconsistent matrix dimensions");
  }
  LqrSolution sol;
  Eigen::MatrixXd P = Q;
  bool converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::MatrixXd next = riccati_step(P, m, Q, R);
    const double diff = (next - P).cwiseAbs().maxCoeff();
    P = std::move(next);
    sol.iterations = it;
    if (!std::isfinite(diff)) break;
    if (diff < tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NumericalError("dare_lqr: Riccati iteration did not converge within " + std::to_string(max_iter) +
                         " iterations");
  }
  const Eigen::MatrixXd S = R + m.B.transpose() * P * m.B;
  sol.K = S.ldlt().solve(m.B.transpose() * P * m.A);
  sol.P = P;
  sol.closed_loop_spectral_radius = spectral_radius(m.A - m.B * sol.K);
  if (!(sol.closed_loop_spectral_radius < 1.0)) {
    throw NumericalError("dare_lqr: closed loop not Schur stable (spectral radius " +
                         std::to_string(sol.closed_loop_spectral_radius) + ")");
  }
  return sol;
}

Eigen::RowVector2d pendulum_lqr_gain(const PendulumParams& p, double q_theta, double q_omega, double r) {
  const LinearModel m = pendulum_linearization(StateVec{}, p);
  Eigen::MatrixXd Q = Eigen::Vector2d(q_theta, q_omega).asDiagonal();
  Eigen::MatrixXd R(1, 1);
  R(0, 0) = r;
  const LqrSolution sol = dare_lqr(m, Q, R);
  return sol.K.row(0);
}

}  // namespace roa
