#include "roa/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include "roa/text_io.hpp"

namespace roa {

void GridDomain::validate() const {
  if (!(theta_max > theta_min) || !(omega_max > omega_min)) {
    throw std::invalid_argument("grid ranges must be non-empty");
  }
  if (n_theta < 1 || n_omega < 1) throw std::invalid_argument("grid needs at least one cell per axis");
}

StateVec GridDomain::cell_center(int idx) const {
  return {theta_min + (i_theta(idx) + 0.5) * theta_step(), omega_min + (i_omega(idx) + 0.5) * omega_step()};
}

int GridDomain::cell_of(const StateVec& x) const {
  if (!(x.theta >= theta_min && x.theta <= theta_max && x.omega >= omega_min && x.omega <= omega_max)) {
    return -1;
  }
  const int it = std::min(n_theta - 1, static_cast<int>((x.theta - theta_min) / theta_step()));
  const int io = std::min(n_omega - 1, static_cast<int>((x.omega - omega_min) / omega_step()));
  return index(it, io);
}

bool GridDomain::is_boundary(int idx) const {
  const int it = i_theta(idx);
  const int io = i_omega(idx);
  return it == 0 || io == 0 || it == n_theta - 1 || io == n_omega - 1;
}

std::vector<int> GridDomain::origin_cells() const {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < size(); ++i) best = std::min(best, cell_center(i).norm());
  std::vector<int> out;
  const double tol = 1e-12 * std::max(1.0, best);
  for (int i = 0; i < size(); ++i) {
    if (cell_center(i).norm() <= best + tol) out.push_back(i);
  }
  return out;
}

Eigen::Matrix2Xd GridDomain::centers() const {
  Eigen::Matrix2Xd xs(2, size());
  for (int i = 0; i < size(); ++i) xs.col(i) = cell_center(i).vec();
  return xs;
}

SafetyBox GridDomain::safety_box(double factor) const {
  const double half_theta = std::max(std::abs(theta_min), std::abs(theta_max));
  const double half_omega = std::max(std::abs(omega_min), std::abs(omega_max));
  return {factor * half_theta, factor * half_omega};
}

int RoaMask::count() const {
  return static_cast<int>(std::count_if(cells.begin(), cells.end(), [](std::uint8_t c) { return c != 0; }));
}

double RoaMask::fraction() const {
  if (cells.empty()) return 0.0;
  return static_cast<double>(count()) / static_cast<double>(cells.size());
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(n, static_cast<int>(std::thread::hardware_concurrency())));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&fn, n, w, workers] {
      for (int i = w; i < n; i += workers) fn(i);
    });
  }
}

GridField evaluate_on_grid(const LyapunovCandidate& v, const GridDomain& grid) {
  const Eigen::VectorXd vals = v.values(grid.centers());
  return {grid, std::vector<double>(vals.data(), vals.data() + vals.size())};
}

RoaMask band_mask(const GridField& field, double lo, double hi) {
  RoaMask mask(field.grid);
  for (int i = 0; i < field.grid.size(); ++i) {
    const double v = field.values[static_cast<std::size_t>(i)];
    mask.set(i, v > lo && v < hi);
  }
  return mask;
}

void write_mask_pgm(const RoaMask& mask, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "P5\n" << mask.grid.n_theta << ' ' << mask.grid.n_omega << "\n255\n";
  for (std::uint8_t c : mask.cells) out.put(static_cast<char>(c != 0 ? 255 : 0));
}

void write_mask_csv(const RoaMask& mask, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "index,theta,omega,value\n";
  for (int i = 0; i < mask.grid.size(); ++i) {
    const StateVec x = mask.grid.cell_center(i);
    out << i << ',' << format_double(x.theta) << ',' << format_double(x.omega) << ',' << (mask.at(i) ? 1 : 0)
        << '\n';
  }
}

}  // namespace roa
