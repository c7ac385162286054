#include "roa/roa_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "roa/sampling.hpp"
#include "roa/text_io.hpp"

namespace roa {

void RoaEstHyper::validate() const {
  if (!(gamma > 1.0)) throw std::invalid_argument("gamma_r must be > 1");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta_r must lie in [0, 1]");
  if (n_samples < 1) throw std::invalid_argument("sample count N must be >= 1");
  if (iterations < 0) throw std::invalid_argument("growth iteration count M must be >= 0");
  if (rollout_steps < 1) throw std::invalid_argument("rollout length L_r must be >= 1");
  if (!(lr > 0.0)) throw std::invalid_argument("roa learning rate must be > 0");
  if (sgd_steps < 0) throw std::invalid_argument("roa sgd_steps must be >= 0");
  if (!(lambda_roa >= 0.0) || !(lambda_monot >= 0.0)) throw std::invalid_argument("loss weights must be >= 0");
  if (!(c_bar > 0.0)) throw std::invalid_argument("c_bar must be > 0");
}

GapSample sample_mixture(const LyapunovCandidate& v, const GridField& v_field, double c, double gamma, double beta,
                         int n, std::mt19937_64& rng) {
  const double lo = c;
  const double hi = gamma * c;
  CellSampler gap(v_field.grid, cells_of(band_mask(v_field, lo, hi)), [&v, lo, hi](const StateVec& x) {
    const double val = v.value(x);
    return val > lo && val < hi;
  });
  const CellSampler domain(v_field.grid, all_cells(v_field.grid));
  GapSample out;
  out.gap_empty = gap.empty();
  out.states = draw_mixture(out.gap_empty ? domain : gap, domain, beta, n, rng);
  return out;
}

GapSample sample_mixture(const LevelSetEstimate& est, double gamma, double beta, int n, const GridDomain& grid,
                         std::mt19937_64& rng) {
  return sample_mixture(est.net, evaluate_on_grid(est.net, grid), est.c, gamma, beta, n, rng);
}

LabeledBatch label_batch(const std::vector<StateVec>& x0s, const DiscreteMap& f, const LyapunovCandidate& v,
                         double c, int rollout_steps, const SafetyBox& box) {
  if (rollout_steps < 1) throw std::invalid_argument("label_batch: L_r must be >= 1");
  LabeledBatch batch;
  for (const StateVec& x0 : x0s) {
    const Trajectory traj = rollout(f, x0, rollout_steps, &box);
    if (!traj.diverged && v.value(traj.final_state()) < c) {
      batch.x_in.push_back(x0);
    } else {
      batch.x_out.push_back(x0);
    }
  }
  return batch;
}

RoaLoss::RoaLoss(const LabeledBatch& batch, const DiscreteMap& f_pi, const LyapunovCandidate& prev_v,
                 const DiscreteMap& prev_f, const RoaEstHyper& hyper)
    : n_in_(static_cast<Eigen::Index>(batch.x_in.size())),
      n_out_(static_cast<Eigen::Index>(batch.x_out.size())),
      c_bar_(hyper.c_bar),
      lambda_roa_(hyper.lambda_roa),
      lambda_monot_(hyper.lambda_monot) {
  xs_.resize(2, 2 * n_in_ + n_out_);
  prev_targets_.resize(n_in_);
  for (Eigen::Index i = 0; i < n_in_; ++i) {
    const StateVec& x = batch.x_in[static_cast<std::size_t>(i)];
    xs_.col(i) = x.vec();
    xs_.col(n_in_ + n_out_ + i) = f_pi(x).vec();
    prev_targets_(i) = prev_v.value(prev_f(x));
  }
  for (Eigen::Index i = 0; i < n_out_; ++i) xs_.col(n_in_ + i) = batch.x_out[static_cast<std::size_t>(i)].vec();
}

RoaLossTerms RoaLoss::evaluate(const PDLyapunovNet& net, ParamGrad* grad) const {
  RoaLossTerms t;
  if (xs_.cols() == 0) {
    if (grad != nullptr) *grad = net.zero_grad();
    return t;
  }
  const ForwardTape tape = net.forward(xs_);
  const auto v_in = tape.values.head(n_in_);
  const auto v_out = tape.values.segment(n_in_, n_out_);
  const auto v_next = tape.values.tail(n_in_);
  const Eigen::VectorXd gap = v_in - prev_targets_;
  t.inside = (v_in.array() - c_bar_).sum();
  t.outside = -(v_out.array() - c_bar_).sum();
  t.decrease = lambda_roa_ * (v_next - v_in).sum();
  t.monot = lambda_monot_ * gap.squaredNorm();
  if (grad != nullptr) {
    Eigen::VectorXd dv(xs_.cols());
    dv.head(n_in_) = ((1.0 - lambda_roa_) + 2.0 * lambda_monot_ * gap.array()).matrix();
    dv.segment(n_in_, n_out_).setConstant(-1.0);
    dv.tail(n_in_).setConstant(lambda_roa_);
    *grad = net.backward(tape, dv);
  }
  return t;
}

RoaLossTerms RoaLoss::value(const PDLyapunovNet& net) const { return evaluate(net, nullptr); }

RoaLossTerms RoaLoss::value_and_grad(const PDLyapunovNet& net, ParamGrad& grad) const {
  return evaluate(net, &grad);
}

RoaLossTerms roa_loss(const PDLyapunovNet& net, const LabeledBatch& batch, const DiscreteMap& f_pi,
                      const LevelSetEstimate& prev, const DiscreteMap& prev_f, const RoaEstHyper& hyper) {
  return RoaLoss(batch, f_pi, prev.net, prev_f, hyper).value(net);
}

GridField decrease_field(const LyapunovCandidate& v, const DiscreteMap& f, const GridDomain& grid) {
  const Eigen::Matrix2Xd xs = grid.centers();
  Eigen::Matrix2Xd next(2, xs.cols());
  for (Eigen::Index j = 0; j < xs.cols(); ++j) next.col(j) = f(StateVec::from(xs.col(j))).vec();
  const Eigen::VectorXd dv = v.values(next) - v.values(xs);
  return {grid, std::vector<double>(dv.data(), dv.data() + dv.size())};
}

double line_search_level(const GridField& v_field, const GridField& dv_field) {
  const GridDomain& grid = v_field.grid;
  if (!(grid == dv_field.grid) || v_field.values.size() != dv_field.values.size() ||
      v_field.values.size() != static_cast<std::size_t>(grid.size())) {
    throw GridMismatch("line_search_level: V and dV fields are on different grids");
  }
  const auto& v = v_field.values;
  const auto [min_it, max_it] = std::minmax_element(v.begin(), v.end());
  if (!(std::isfinite(*min_it) && std::isfinite(*max_it)) || !(*max_it - *min_it > 0.0)) {
    throw NumericalError("line_search_level: V is constant or non-finite on the grid (min " +
                         format_double(*min_it) + ", max " + format_double(*max_it) + ")");
  }
  double smallest_positive = std::numeric_limits<double>::infinity();
  for (double x : v) {
    if (x > 0.0) smallest_positive = std::min(smallest_positive, x);
  }

  std::vector<int> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&v](int a, int b) { return v[a] < v[b]; });
  const std::vector<int> exempt = grid.origin_cells();

  double level = *max_it;
  for (int idx : order) {
    if (std::find(exempt.begin(), exempt.end(), idx) != exempt.end()) continue;
    const double dv = dv_field.values[static_cast<std::size_t>(idx)];
    if (grid.is_boundary(idx) || !(dv < 0.0)) {
      level = v[static_cast<std::size_t>(idx)];
      break;
    }
  }
  return std::max(level, smallest_positive);
}

double sublevel_fraction(const GridField& v_field, double c) {
  const auto n = std::count_if(v_field.values.begin(), v_field.values.end(), [c](double x) { return x < c; });
  return v_field.values.empty() ? 0.0 : static_cast<double>(n) / static_cast<double>(v_field.values.size());
}

LevelSetEstimate initial_estimate(const PDLyapunovNet& net, const DiscreteMap& f, const GridDomain& grid) {
  return {net, line_search_level(evaluate_on_grid(net, grid), decrease_field(net, f, grid))};
}

RoaEstimateResult estimate_roa(const LevelSetEstimate& prev, const DiscreteMap& prev_f, const DiscreteMap& f_pi,
                               const RoaEstHyper& hyper, const GridDomain& grid, std::mt19937_64& rng,
                               const GrowthObserver& observer) {
  hyper.validate();
  RoaEstimateResult res{prev, {}};
  const SafetyBox box = grid.safety_box(hyper.safety_factor);
  GridField v_field = evaluate_on_grid(res.estimate.net, grid);

  for (int m = 1; m <= hyper.iterations; ++m) {
    LevelSetEstimate& cur = res.estimate;
    const GapSample sample =
        sample_mixture(cur.net, v_field, cur.c, hyper.gamma, hyper.beta, hyper.n_samples, rng);
    const LabeledBatch batch =
        label_batch(sample.states, f_pi, cur.net, cur.c, hyper.rollout_steps, box);
    const RoaLoss loss(batch, f_pi, prev.net, prev_f, hyper);

    GrowthIteration it;
    it.iteration = m;
    it.n_in = static_cast<int>(batch.x_in.size());
    it.n_out = static_cast<int>(batch.x_out.size());
    it.gap_empty = sample.gap_empty;
    it.initial_loss = loss.value(cur.net);

    PDLyapunovNet net = cur.net;
    ParamGrad grad;
    for (int step = 1; step <= hyper.sgd_steps; ++step) {
      const RoaLossTerms terms = loss.value_and_grad(net, grad);
      if (!std::isfinite(terms.total()) || !grad.all_finite()) {
        throw TrainingDivergence("estimate_roa: non-finite loss at growth iteration " + std::to_string(m) +
                                 ", sgd step " + std::to_string(step) + " (inside " +
                                 format_double(terms.inside) + ", outside " + format_double(terms.outside) +
                                 ", decrease " + format_double(terms.decrease) + ", monot " +
                                 format_double(terms.monot) + ", n_in " + std::to_string(it.n_in) +
                                 ", n_out " + std::to_string(it.n_out) + ")");
      }
      net.sgd_step(grad, hyper.lr);
    }
    it.final_loss = loss.value(net);

    v_field = evaluate_on_grid(net, grid);
    cur.c = line_search_level(v_field, decrease_field(net, f_pi, grid));
    cur.net = std::move(net);
    it.c = cur.c;
    it.estimated_fraction = sublevel_fraction(v_field, cur.c);
    res.iterations.push_back(it);
    if (observer) observer(it, cur);
  }
  return res;
}

}  // namespace roa
