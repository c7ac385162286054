#pragma once

#include <vector>

#include "roa/dynamics.hpp"
#include "roa/grid.hpp"

namespace roa {

struct OracleOptions {
  int k_max = 2000;            ///< steps allowed to reach the ball
  double ball_radius = 0.1;    ///< Euclidean radius around the origin
  int confirm_steps = 100;     ///< subsequent steps that must stay within 2 * ball_radius
  double safety_factor = 10.0; ///< divergence box, in multiples of the grid half-extent
};

/// True iff the rollout from x reaches the ball within k_max steps and then stays within
/// twice the ball radius for confirm_steps more steps without leaving the safety box.
bool converges(const DiscreteMap& f, const StateVec& x, const OracleOptions& opts, const SafetyBox& box);

/// Brute-force region of attraction: classifies every cell center by forward integration.
RoaMask true_roa(const DiscreteMap& f, const GridDomain& grid, const OracleOptions& opts = {});

double mask_measure(const RoaMask& mask);
/// |a XOR b| / total cells. Throws GridMismatch if the grids differ.
double sym_diff_measure(const RoaMask& a, const RoaMask& b);
/// Cells set in `a` but not in `b`, as a fraction of all cells.
double difference_measure(const RoaMask& a, const RoaMask& b);

struct GapGrowthSample {
  double alpha = 1.0;
  double predicted = 0.0;  ///< c (alpha - 1) * perimeter / G
  double counted = 0.0;    ///< grid-cell area of {c < V < alpha c}
  double rel_error = 0.0;
};

/// Sublevel-set growth-rate check for V = |x|^2: S_c is the disk of radius sqrt(c), the
/// gradient norm on its boundary is G = 2 sqrt(c), so the gap measure is predicted as
/// c (alpha - 1) 2 pi sqrt(c) / (2 sqrt(c)) = pi c (alpha - 1).
/// Throws std::invalid_argument if the largest level set leaves the grid.
std::vector<GapGrowthSample> gap_growth_check(double c, const std::vector<double>& alphas,
                                              const GridDomain& grid);

}  // namespace roa
