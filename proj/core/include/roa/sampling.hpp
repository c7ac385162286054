#pragma once

#include <functional>
#include <random>
#include <vector>

#include "roa/grid.hpp"

namespace roa {

/// Draws states uniformly from a union of grid cells: a cell is picked uniformly, then the
/// state is jittered uniformly inside it. When `accept` is given, the jitter is redrawn until
/// the state satisfies it (the cell center is used after max_tries failures).
class CellSampler {
 public:
  using Predicate = std::function<bool(const StateVec&)>;

  CellSampler(const GridDomain& grid, std::vector<int> cells, Predicate accept = {}, int max_tries = 16);

  bool empty() const { return cells_.empty(); }
  const std::vector<int>& cells() const { return cells_; }
  StateVec draw(std::mt19937_64& rng) const;

 private:
  GridDomain grid_;
  std::vector<int> cells_;
  Predicate accept_;
  int max_tries_;
};

std::vector<int> cells_of(const RoaMask& mask);
std::vector<int> all_cells(const GridDomain& grid);

/// Draws n states from the mixture beta * first + (1 - beta) * second.
std::vector<StateVec> draw_mixture(const CellSampler& first, const CellSampler& second, double beta, int n,
                                   std::mt19937_64& rng);

}  // namespace roa
