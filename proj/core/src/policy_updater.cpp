#include "roa/policy_updater.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "roa/sampling.hpp"
#include "roa/text_io.hpp"

namespace roa {

namespace {

struct Rollouts {
  std::vector<Trajectory> trajs;
  Eigen::Matrix2Xd finals;
  Eigen::VectorXd values;
  Eigen::Matrix2Xd grads;
  Eigen::VectorXd weights;
};

Rollouts roll_all(const DiscreteMap& f, const LyapunovCandidate& v, double c, const std::vector<StateVec>& x0s,
                  int steps, double lambda_u, const SafetyBox& box, bool with_grads) {
  if (steps < 0) throw std::invalid_argument("policy rollout length must be >= 0");
  Rollouts r;
  const auto n = static_cast<Eigen::Index>(x0s.size());
  r.trajs.reserve(x0s.size());
  r.finals.resize(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r.trajs.push_back(rollout(f, x0s[static_cast<std::size_t>(i)], steps, &box));
    r.finals.col(i) = r.trajs.back().final_state().vec();
  }
  r.values = v.values(r.finals);
  if (with_grads) r.grads = v.grads_x(r.finals);
  r.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double val = r.values(i);
    if (r.trajs[static_cast<std::size_t>(i)].diverged) {
      r.weights(i) = lambda_u;
    } else {
      r.weights(i) = (val < c ? 1.0 : 0.0) + (val > c ? lambda_u : 0.0);
    }
  }
  return r;
}

}  // namespace

void PolicyUpdHyper::validate() const {
  if (!(gamma > 1.0)) throw std::invalid_argument("gamma_p must be > 1");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta_p must lie in [0, 1]");
  if (n_samples < 1) throw std::invalid_argument("sample count N must be >= 1");
  if (rollout_steps < 0) throw std::invalid_argument("rollout length L_p must be >= 0");
  if (!(lambda_u >= 1.0)) throw std::invalid_argument("lambda_u must be >= 1");
  if (!(lr > 0.0)) throw std::invalid_argument("policy learning rate must be > 0");
  if (sgd_steps < 0) throw std::invalid_argument("policy sgd_steps must be >= 0");
}

PolicyBatch sample_policy_batch(const LevelSetEstimate& est, const GridField& v_field, const PolicyUpdHyper& hyper,
                                std::mt19937_64& rng) {
  const double c = est.c;
  const double hi = hyper.gamma * c;
  const PDLyapunovNet& net = est.net;
  const CellSampler gap(v_field.grid, cells_of(band_mask(v_field, c, hi)), [&net, c, hi](const StateVec& x) {
    const double val = net.value(x);
    return val > c && val < hi;
  });
  const CellSampler interior(
      v_field.grid, cells_of(band_mask(v_field, -std::numeric_limits<double>::infinity(), c)),
      [&net, c](const StateVec& x) { return net.value(x) < c; });
  PolicyBatch out;
  out.gap_empty = gap.empty();
  out.interior_empty = interior.empty();
  if (out.gap_empty && out.interior_empty) {
    const CellSampler domain(v_field.grid, all_cells(v_field.grid));
    out.states = draw_mixture(domain, domain, hyper.beta, hyper.n_samples, rng);
  } else if (out.gap_empty) {
    out.states = draw_mixture(interior, interior, hyper.beta, hyper.n_samples, rng);
  } else if (out.interior_empty) {
    out.states = draw_mixture(gap, gap, hyper.beta, hyper.n_samples, rng);
  } else {
    out.states = draw_mixture(gap, interior, hyper.beta, hyper.n_samples, rng);
  }
  return out;
}

PolicyBatch sample_policy_batch(const LevelSetEstimate& est, const PolicyUpdHyper& hyper, const GridDomain& grid,
                                std::mt19937_64& rng) {
  return sample_policy_batch(est, evaluate_on_grid(est.net, grid), hyper, rng);
}

double policy_loss(const DiscreteMap& f, const LyapunovCandidate& v, double c, const std::vector<StateVec>& x0s,
                   int rollout_steps, double lambda_u, const SafetyBox& box) {
  const Rollouts r = roll_all(f, v, c, x0s, rollout_steps, lambda_u, box, false);
  return r.weights.dot(r.values);
}

PolicyLossResult policy_loss_and_grad(const DiscreteMap& f, const LyapunovCandidate& v, double c,
                                      const std::vector<StateVec>& x0s, int rollout_steps, double lambda_u,
                                      const SafetyBox& box) {
  const Rollouts r = roll_all(f, v, c, x0s, rollout_steps, lambda_u, box, true);
  PolicyLossResult res;
  res.loss = r.weights.dot(r.values);
  res.grad = Eigen::VectorXd::Zero(f.num_params());
  for (std::size_t i = 0; i < r.trajs.size(); ++i) {
    const Trajectory& traj = r.trajs[i];
    const auto col = static_cast<Eigen::Index>(i);
    res.n_diverged += traj.diverged ? 1 : 0;
    res.n_outside += (traj.diverged || r.values(col) > c) ? 1 : 0;
    Eigen::Vector2d adj = r.weights(col) * r.grads.col(col);
    for (int k = traj.length() - 1; k >= 0; --k) {
      const StateVec& xk = traj.states[static_cast<std::size_t>(k)];
      if (res.grad.size() > 0) res.grad.noalias() += f.param_jacobian(xk).transpose() * adj;
      adj = f.jacobian(xk).transpose() * adj;
    }
  }
  return res;
}

double policy_loss(const SatPolicy& pol, const PendulumParams& params, const LevelSetEstimate& est,
                   const std::vector<StateVec>& x0s, int rollout_steps, double lambda_u, const SafetyBox& box) {
  return policy_loss(closed_loop(pol, params), est.net, est.c, x0s, rollout_steps, lambda_u, box);
}

Eigen::VectorXd bptt_grad(const SatPolicy& pol, const PendulumParams& params, const LevelSetEstimate& est,
                          const std::vector<StateVec>& x0s, int rollout_steps, double lambda_u,
                          const SafetyBox& box) {
  return policy_loss_and_grad(closed_loop(pol, params), est.net, est.c, x0s, rollout_steps, lambda_u, box).grad;
}

SignalDiagnostics signal_diagnostics(const DiscreteMap& f, const LyapunovCandidate& v, double c,
                                     const std::vector<StateVec>& x0s, int rollout_steps, double lambda_u,
                                     const SafetyBox& box) {
  const Rollouts r = roll_all(f, v, c, x0s, rollout_steps, lambda_u, box, true);
  SignalDiagnostics d;
  std::vector<double> sums(static_cast<std::size_t>(rollout_steps) + 1, 0.0);
  std::vector<int> counts(sums.size(), 0);
  double sq = 0.0;
  for (std::size_t i = 0; i < r.trajs.size(); ++i) {
    const Trajectory& traj = r.trajs[i];
    const auto col = static_cast<Eigen::Index>(i);
    sq += (r.weights(col) * r.grads.col(col)).squaredNorm();
    // dx_T/dx_k accumulated backwards from the identity at k = T.
    Eigen::Matrix2d prod = Eigen::Matrix2d::Identity();
    const int T = traj.length();
    for (int k = T; k >= 0; --k) {
      if (k < T) prod = prod * f.jacobian(traj.states[static_cast<std::size_t>(k)]);
      Eigen::JacobiSVD<Eigen::Matrix2d> svd(prod);
      sums[static_cast<std::size_t>(k)] += svd.singularValues()(0);
      counts[static_cast<std::size_t>(k)] += 1;
    }
  }
  for (std::size_t k = 0; k < sums.size(); ++k) {
    if (counts[k] > 0) d.per_step_jacobian_norms.push_back(sums[k] / counts[k]);
  }
  d.grad_norm_final = std::sqrt(sq);
  d.grad_norm_psi = policy_loss_and_grad(f, v, c, x0s, rollout_steps, lambda_u, box).grad.norm();
  d.weak_signal = d.grad_norm_final < kWeakSignalThreshold;
  return d;
}

PolicyUpdateResult update_policy(const SatPolicy& pol, const LevelSetEstimate& est, const PendulumParams& params,
                                 const PolicyUpdHyper& hyper, const GridDomain& grid, std::mt19937_64& rng) {
  hyper.validate();
  pol.validate();
  const SafetyBox box = grid.safety_box(hyper.safety_factor);
  PolicyUpdateResult res;
  res.batch = sample_policy_batch(est, hyper, grid, rng);
  const auto& x0s = res.batch.states;
  const std::vector<SatParam> trainable = pol.psi.trainable_params();

  res.diagnostics = signal_diagnostics(closed_loop(pol, params), est.net, est.c, x0s, hyper.rollout_steps,
                                       hyper.lambda_u, box);
  SatPolicy cur = pol;
  res.loss_before = policy_loss(closed_loop(cur, params), est.net, est.c, x0s, hyper.rollout_steps,
                                hyper.lambda_u, box);
  for (int step = 1; step <= hyper.sgd_steps; ++step) {
    const PolicyLossResult lg = policy_loss_and_grad(closed_loop(cur, params), est.net, est.c, x0s,
                                                     hyper.rollout_steps, hyper.lambda_u, box);
    if (!std::isfinite(lg.loss) || !lg.grad.allFinite()) {
      throw TrainingDivergence("update_policy: non-finite gradient at sgd step " + std::to_string(step) +
                               " (loss " + format_double(lg.loss) + ", |dL/dx_T| " +
                               format_double(res.diagnostics.grad_norm_final) + ")");
    }
    SatParams proposed = cur.psi;
    for (std::size_t i = 0; i < trainable.size(); ++i) {
      proposed.set(trainable[i], cur.psi.get(trainable[i]) - hyper.lr * lg.grad(static_cast<Eigen::Index>(i)));
    }
    // Feasibility only (b <= a, slopes >= 0); the crop against the phase start comes last.
    cur.psi = crop_update(cur.psi, proposed, std::numeric_limits<double>::infinity());
  }
  cur.psi = crop_update(pol.psi, cur.psi, pol.crop_radius);
  res.loss_after = policy_loss(closed_loop(cur, params), est.net, est.c, x0s, hyper.rollout_steps,
                               hyper.lambda_u, box);
  res.policy = cur;
  return res;
}

}  // namespace roa
