#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace reachguard {

/// Boolean grid over the plane. Cell (ix, iy) covers
/// [origin_x + ix * cell, origin_x + (ix + 1) * cell) x [origin_y + iy * cell, ...).
struct OccupancyGrid2D {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell = 0.5;
  int nx = 0;
  int ny = 0;
  std::vector<std::uint8_t> cells;  // x-major: index = ix * ny + iy

  static OccupancyGrid2D empty(double origin_x, double origin_y, double cell, int nx, int ny);

  std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(ix) * ny + iy; }
  bool at(int ix, int iy) const { return cells[index(ix, iy)] != 0; }
  void set(int ix, int iy, bool occupied = true) { cells[index(ix, iy)] = occupied ? 1 : 0; }

  std::size_t count() const;
  bool any() const { return count() > 0; }
  std::pair<double, double> center(int ix, int iy) const;
  std::optional<std::pair<int, int>> cell_of(double x, double y) const;
  /// Points outside the grid are free.
  bool occupied_at(double x, double y) const;

  bool operator==(const OccupancyGrid2D&) const = default;
};

}  // namespace reachguard
