#pragma once

#include <functional>
#include <random>
#include <vector>

#include "roa/dynamics.hpp"
#include "roa/grid.hpp"
#include "roa/lyapunov_net.hpp"

namespace roa {

/// Inner estimate of a region of attraction: the sublevel set {x : V(x) < c}.
struct LevelSetEstimate {
  PDLyapunovNet net;
  double c = 1.0;
};

struct LabeledBatch {
  std::vector<StateVec> x_in;   ///< rollout ends inside the current sublevel set
  std::vector<StateVec> x_out;  ///< the rest, including divergent rollouts
};

struct RoaEstHyper {
  double gamma = 4.0;         ///< gap multiplier, > 1
  double beta = 0.6;          ///< weight of gap samples in the mixture
  int n_samples = 10;         ///< batch size N
  int iterations = 20;        ///< growth iterations M
  int rollout_steps = 10;     ///< L_r
  double lambda_roa = 1000.0;
  double lambda_monot = 0.01;
  double lr = 0.01;
  int sgd_steps = 10000;
  double c_bar = 1.0;         ///< target level used inside the loss
  double safety_factor = 10.0;

  void validate() const;
};

struct GapSample {
  std::vector<StateVec> states;
  bool gap_empty = false;  ///< the gap had no grid cells; all states were drawn from the domain
};

/// Mixture beta * U(gap) + (1 - beta) * U(domain), where gap = {c < V < gamma c} on the grid.
/// `v_field` must hold the values of `v` on `grid`.
GapSample sample_mixture(const LyapunovCandidate& v, const GridField& v_field, double c, double gamma,
                         double beta, int n, std::mt19937_64& rng);
GapSample sample_mixture(const LevelSetEstimate& est, double gamma, double beta, int n, const GridDomain& grid,
                         std::mt19937_64& rng);

/// x goes in x_in iff V(Phi(x, L_r)) < c; rollouts that leave `box` always go to x_out.
LabeledBatch label_batch(const std::vector<StateVec>& x0s, const DiscreteMap& f, const LyapunovCandidate& v,
                         double c, int rollout_steps, const SafetyBox& box);

struct RoaLossTerms {
  double inside = 0.0;    ///< sum_in (V - c_bar)
  double outside = 0.0;   ///< -sum_out (V - c_bar)
  double decrease = 0.0;  ///< lambda_roa * sum_in (V(f(x)) - V(x))
  double monot = 0.0;     ///< lambda_monot * sum_in (V(x) - V_prev(f_prev(x)))^2

  double total() const { return inside + outside + decrease + monot; }
};

/// The four-term classifier loss over a labeled batch, with the previous estimate frozen.
/// Precomputes everything that does not depend on the trainable net.
class RoaLoss {
 public:
  RoaLoss(const LabeledBatch& batch, const DiscreteMap& f_pi, const LyapunovCandidate& prev_v,
          const DiscreteMap& prev_f, const RoaEstHyper& hyper);

  RoaLossTerms value(const PDLyapunovNet& net) const;
  RoaLossTerms value_and_grad(const PDLyapunovNet& net, ParamGrad& grad) const;

 private:
  RoaLossTerms evaluate(const PDLyapunovNet& net, ParamGrad* grad) const;

  Eigen::Matrix2Xd xs_;                 ///< [x_in | x_out | f(x_in)]
  Eigen::VectorXd prev_targets_;        ///< V_prev(f_prev(x)) for x_in
  Eigen::Index n_in_ = 0;
  Eigen::Index n_out_ = 0;
  double c_bar_;
  double lambda_roa_;
  double lambda_monot_;
};

RoaLossTerms roa_loss(const PDLyapunovNet& net, const LabeledBatch& batch, const DiscreteMap& f_pi,
                      const LevelSetEstimate& prev, const DiscreteMap& prev_f, const RoaEstHyper& hyper);

/// V(f(x)) - V(x) at every cell center.
GridField decrease_field(const LyapunovCandidate& v, const DiscreteMap& f, const GridDomain& grid);

/// Largest level c, taken from the sorted grid values of V, such that every cell with
/// V < c other than the origin cells has dV < 0 and no boundary cell has V < c. Returns the
/// smallest positive grid value of V when no larger level qualifies. Throws NumericalError
/// when V is constant over the grid.
double line_search_level(const GridField& v_field, const GridField& dv_field);

/// Fraction of grid cells with V < c.
double sublevel_fraction(const GridField& v_field, double c);

struct GrowthIteration {
  int iteration = 0;
  double c = 0.0;
  double estimated_fraction = 0.0;
  int n_in = 0;
  int n_out = 0;
  bool gap_empty = false;
  RoaLossTerms initial_loss;
  RoaLossTerms final_loss;
};

struct RoaEstimateResult {
  LevelSetEstimate estimate;
  std::vector<GrowthIteration> iterations;
};

using GrowthObserver = std::function<void(const GrowthIteration&, const LevelSetEstimate&)>;

/// Grows the inner estimate for the closed loop f_pi over `hyper.iterations` rounds of
/// gap sampling, labeling, SGD on the four-term loss and level line search. `prev` and
/// `prev_f` are the previous phase's estimate and closed loop and stay frozen. Throws
/// TrainingDivergence if an SGD step produces a non-finite loss or gradient.
RoaEstimateResult estimate_roa(const LevelSetEstimate& prev, const DiscreteMap& prev_f, const DiscreteMap& f_pi,
                               const RoaEstHyper& hyper, const GridDomain& grid, std::mt19937_64& rng,
                               const GrowthObserver& observer = {});

/// Estimate whose level comes from a line search of `net` under f.
LevelSetEstimate initial_estimate(const PDLyapunovNet& net, const DiscreteMap& f, const GridDomain& grid);

}  // namespace roa
