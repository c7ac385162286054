#include "roa/sampling.hpp"

#include <numeric>
#include <stdexcept>

namespace roa {

CellSampler::CellSampler(const GridDomain& grid, std::vector<int> cells, Predicate accept, int max_tries)
    : grid_(grid), cells_(std::move(cells)), accept_(std::move(accept)), max_tries_(max_tries) {}

StateVec CellSampler::draw(std::mt19937_64& rng) const {
  if (cells_.empty()) throw std::logic_error("CellSampler::draw on an empty cell set");
  std::uniform_int_distribution<std::size_t> pick(0, cells_.size() - 1);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  const int cell = cells_[pick(rng)];
  const StateVec center = grid_.cell_center(cell);
  for (int t = 0; t < max_tries_; ++t) {
    const StateVec x{center.theta + unit(rng) * grid_.theta_step(), center.omega + unit(rng) * grid_.omega_step()};
    if (!accept_ || accept_(x)) return x;
  }
  return center;
}

std::vector<int> cells_of(const RoaMask& mask) {
  std::vector<int> out;
  for (int i = 0; i < mask.grid.size(); ++i) {
    if (mask.at(i)) out.push_back(i);
  }
  return out;
}

std::vector<int> all_cells(const GridDomain& grid) {
  std::vector<int> out(static_cast<std::size_t>(grid.size()));
  std::iota(out.begin(), out.end(), 0);
  return out;
}

std::vector<StateVec> draw_mixture(const CellSampler& first, const CellSampler& second, double beta, int n,
                                   std::mt19937_64& rng) {
  std::bernoulli_distribution coin(beta);
  std::vector<StateVec> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(coin(rng) ? first.draw(rng) : second.draw(rng));
  return out;
}

}  // namespace roa
