#include "roa/roa_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace roa {

bool converges(const DiscreteMap& f, const StateVec& x0, const OracleOptions& opts, const SafetyBox& box) {
  StateVec x = x0;
  if (!box.contains(x)) return false;
  int k = 0;
  while (x.norm() >= opts.ball_radius) {
    if (k == opts.k_max) return false;
    x = f(x);
    ++k;
    if (!box.contains(x)) return false;
  }
  const double confirm_radius = 2.0 * opts.ball_radius;
  for (int j = 0; j < opts.confirm_steps; ++j) {
    x = f(x);
    if (!(x.norm() < confirm_radius)) return false;
  }
  return true;
}

RoaMask true_roa(const DiscreteMap& f, const GridDomain& grid, const OracleOptions& opts) {
  if (opts.k_max < 1) throw std::invalid_argument("true_roa: k_max must be >= 1");
  grid.validate();
  const SafetyBox box = grid.safety_box(opts.safety_factor);
  RoaMask mask(grid);
  parallel_for(grid.size(), [&](int i) { mask.cells[static_cast<std::size_t>(i)] =
                                             converges(f, grid.cell_center(i), opts, box) ? 1 : 0; });
  return mask;
}

double mask_measure(const RoaMask& mask) { return mask.fraction(); }

double sym_diff_measure(const RoaMask& a, const RoaMask& b) {
  if (!(a.grid == b.grid) || a.cells.size() != b.cells.size()) {
    throw GridMismatch("sym_diff_measure: masks live on different grids");
  }
  int diff = 0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) diff += (a.cells[i] != 0) != (b.cells[i] != 0);
  return a.cells.empty() ? 0.0 : static_cast<double>(diff) / static_cast<double>(a.cells.size());
}

double difference_measure(const RoaMask& a, const RoaMask& b) {
  if (!(a.grid == b.grid) || a.cells.size() != b.cells.size()) {
    throw GridMismatch("difference_measure: masks live on different grids");
  }
  int diff = 0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) diff += (a.cells[i] != 0) && (b.cells[i] == 0);
  return a.cells.empty() ? 0.0 : static_cast<double>(diff) / static_cast<double>(a.cells.size());
}

std::vector<GapGrowthSample> gap_growth_check(double c, const std::vector<double>& alphas, const GridDomain& grid) {
  if (!(c > 0.0)) throw std::invalid_argument("gap_growth_check: c must be > 0");
  grid.validate();
  const double max_alpha = alphas.empty() ? 1.0 : *std::max_element(alphas.begin(), alphas.end());
  const double r = std::sqrt(max_alpha * c);
  if (-r <= grid.theta_min || r >= grid.theta_max || -r <= grid.omega_min || r >= grid.omega_max) {
    throw std::invalid_argument("gap_growth_check: level set touches the grid boundary");
  }
  const QuadraticLyapunov v;
  const GridField field = evaluate_on_grid(v, grid);
  const double G = 2.0 * std::sqrt(c);
  const double perimeter = 2.0 * std::numbers::pi * std::sqrt(c);
  std::vector<GapGrowthSample> out;
  for (double alpha : alphas) {
    if (alpha < 1.0) throw std::invalid_argument("gap_growth_check: alpha must be >= 1");
    GapGrowthSample s;
    s.alpha = alpha;
    s.predicted = c * (alpha - 1.0) * perimeter / G;
    s.counted = band_mask(field, c, alpha * c).count() * grid.cell_area();
    s.rel_error = s.predicted > 0.0 ? std::abs(s.counted - s.predicted) / s.predicted : s.counted;
    out.push_back(s);
  }
  return out;
}

}  // namespace roa
