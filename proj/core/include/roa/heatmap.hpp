#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "roa/grid.hpp"

namespace roa {

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kBackground{255, 255, 255};
inline constexpr Rgb kOracleBoundary{0, 160, 0};
inline constexpr Rgb kEstimate{40, 90, 220};
inline constexpr Rgb kGap{255, 150, 200};

/// Cells of `mask` with a 4-neighbour outside it; set cells on the grid edge also count.
RoaMask mask_boundary(const RoaMask& mask);

/// One pixel per cell, pixel (x, y) = (i_theta, i_omega) in the file's row-major order.
/// Precedence: oracle boundary over estimate over gap over background. Any input may be empty
/// (no cells), which leaves that layer out. Throws GridMismatch for masks on different grids.
std::vector<Rgb> overlay_pixels(const RoaMask& oracle_boundary, const RoaMask& estimate, const RoaMask& gap);

/// Binary P6 pixmap.
void write_ppm(const GridDomain& grid, const std::vector<Rgb>& pixels, const std::string& path);

void write_overlay_ppm(const RoaMask& oracle, const RoaMask& estimate, const RoaMask& gap, const std::string& path);

/// Scalar field rendered on a white-to-blue ramp between its finite min and max.
void write_field_ppm(const GridField& field, const std::string& path);

}  // namespace roa
