#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "roa/dynamics.hpp"
#include "roa/lyapunov_net.hpp"
#include "roa/state.hpp"

namespace roa {

class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform rectangular grid over [theta_min, theta_max] x [omega_min, omega_max].
/// Cells are evaluated at their centers and indexed row-major with theta fastest:
/// index = i_omega * n_theta + i_theta.
struct GridDomain {
  double theta_min = -1.5707963267948966;
  double theta_max = 1.5707963267948966;
  double omega_min = -6.283185307179586;
  double omega_max = 6.283185307179586;
  int n_theta = 100;
  int n_omega = 100;

  void validate() const;

  int size() const { return n_theta * n_omega; }
  double theta_step() const { return (theta_max - theta_min) / n_theta; }
  double omega_step() const { return (omega_max - omega_min) / n_omega; }
  double cell_area() const { return theta_step() * omega_step(); }
  double area() const { return (theta_max - theta_min) * (omega_max - omega_min); }

  int index(int i_theta, int i_omega) const { return i_omega * n_theta + i_theta; }
  int i_theta(int idx) const { return idx % n_theta; }
  int i_omega(int idx) const { return idx / n_theta; }

  StateVec cell_center(int idx) const;
  /// Cell containing x, or -1 if x lies outside the domain.
  int cell_of(const StateVec& x) const;
  bool is_boundary(int idx) const;
  /// Cells whose centers are (jointly) nearest to the origin; four cells on an even grid.
  std::vector<int> origin_cells() const;

  /// All cell centers as columns.
  Eigen::Matrix2Xd centers() const;

  /// Box `factor` times the domain's half-extent.
  SafetyBox safety_box(double factor = 10.0) const;

  bool operator==(const GridDomain&) const = default;
};

/// Boolean per-cell mask over a grid.
struct RoaMask {
  GridDomain grid;
  std::vector<std::uint8_t> cells;

  RoaMask() = default;
  explicit RoaMask(const GridDomain& g, bool fill = false)
      : grid(g), cells(static_cast<std::size_t>(g.size()), fill ? 1 : 0) {}

  bool at(int idx) const { return cells[static_cast<std::size_t>(idx)] != 0; }
  void set(int idx, bool v) { cells[static_cast<std::size_t>(idx)] = v ? 1 : 0; }
  int count() const;
  double fraction() const;
};

/// Scalar value per cell.
struct GridField {
  GridDomain grid;
  std::vector<double> values;
};

/// Runs fn(i) for i in [0, n) across hardware threads. Results must not depend on order.
void parallel_for(int n, const std::function<void(int)>& fn);

GridField evaluate_on_grid(const LyapunovCandidate& v, const GridDomain& grid);

/// Cells with lo < field < hi (open band; lo = -inf gives a sublevel set).
RoaMask band_mask(const GridField& field, double lo, double hi);

/// Portable graymap (P5), one byte per cell, 255 = true, row-major with theta fastest.
void write_mask_pgm(const RoaMask& mask, const std::string& path);
/// CSV with columns index,theta,omega,value.
void write_mask_csv(const RoaMask& mask, const std::string& path);

}  // namespace roa
