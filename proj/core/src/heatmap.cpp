#include "roa/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace roa {

namespace {

const GridDomain& common_grid(const RoaMask& a, const RoaMask& b, const RoaMask& c) {
  const RoaMask* ref = nullptr;
  for (const RoaMask* m : {&a, &b, &c}) {
    if (m->cells.empty()) continue;
    if (ref == nullptr) {
      ref = m;
    } else if (!(ref->grid == m->grid) || ref->cells.size() != m->cells.size()) {
      throw GridMismatch("overlay_pixels: masks on different grids");
    }
  }
  if (ref == nullptr) throw std::invalid_argument("overlay_pixels: all layers are empty");
  return ref->grid;
}

}  // namespace

RoaMask mask_boundary(const RoaMask& mask) {
  const GridDomain& g = mask.grid;
  RoaMask out(g);
  for (int idx = 0; idx < g.size(); ++idx) {
    if (!mask.at(idx)) continue;
    const int it = g.i_theta(idx);
    const int io = g.i_omega(idx);
    const bool edge = it == 0 || io == 0 || it == g.n_theta - 1 || io == g.n_omega - 1;
    const bool open = edge || !mask.at(g.index(it - 1, io)) || !mask.at(g.index(it + 1, io)) ||
                      !mask.at(g.index(it, io - 1)) || !mask.at(g.index(it, io + 1));
    out.set(idx, open);
  }
  return out;
}

std::vector<Rgb> overlay_pixels(const RoaMask& oracle_boundary, const RoaMask& estimate, const RoaMask& gap) {
  const GridDomain& g = common_grid(oracle_boundary, estimate, gap);
  const auto has = [](const RoaMask& m, int i) { return !m.cells.empty() && m.at(i); };
  std::vector<Rgb> px(static_cast<std::size_t>(g.size()), kBackground);
  for (int i = 0; i < g.size(); ++i) {
    Rgb& p = px[static_cast<std::size_t>(i)];
    if (has(oracle_boundary, i)) {
      p = kOracleBoundary;
    } else if (has(estimate, i)) {
      p = kEstimate;
    } else if (has(gap, i)) {
      p = kGap;
    }
  }
  return px;
}

void write_ppm(const GridDomain& grid, const std::vector<Rgb>& pixels, const std::string& path) {
  if (pixels.size() != static_cast<std::size_t>(grid.size())) {
    throw GridMismatch("write_ppm: pixel count does not match the grid");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "P6\n" << grid.n_theta << ' ' << grid.n_omega << "\n255\n";
  for (const Rgb& p : pixels) out.write(reinterpret_cast<const char*>(p.data()), 3);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void write_overlay_ppm(const RoaMask& oracle, const RoaMask& estimate, const RoaMask& gap, const std::string& path) {
  const RoaMask boundary = oracle.cells.empty() ? RoaMask{} : mask_boundary(oracle);
  write_ppm(common_grid(oracle, estimate, gap), overlay_pixels(boundary, estimate, gap), path);
}

void write_field_ppm(const GridField& field, const std::string& path) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : field.values) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double span = hi > lo ? hi - lo : 1.0;
  std::vector<Rgb> px;
  px.reserve(field.values.size());
  for (double v : field.values) {
    if (!std::isfinite(v)) {
      px.push_back({0, 0, 0});
      continue;
    }
    const double t = std::clamp((v - lo) / span, 0.0, 1.0);
    const auto mix = [t](double from, double to) {
      return static_cast<std::uint8_t>(std::lround(from + t * (to - from)));
    };
    px.push_back({mix(255, 8), mix(255, 48), mix(255, 107)});
  }
  write_ppm(field.grid, px, path);
}

}  // namespace roa
