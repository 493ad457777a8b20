#include "reachguard/occupancy.hpp"

#include <algorithm>
#include <cmath>

#include "reachguard/errors.hpp"

namespace reachguard {

OccupancyGrid2D OccupancyGrid2D::empty(double origin_x, double origin_y, double cell, int nx,
                                       int ny) {
  if (!(cell > 0.0) || nx < 0 || ny < 0) {
    throw Error(ErrorKind::kArgument, "occupancy grid needs a positive cell size");
  }
  OccupancyGrid2D g;
  g.origin_x = origin_x;
  g.origin_y = origin_y;
  g.cell = cell;
  g.nx = nx;
  g.ny = ny;
  g.cells.assign(static_cast<std::size_t>(nx) * ny, 0);
  return g;
}

std::size_t OccupancyGrid2D::count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

std::pair<double, double> OccupancyGrid2D::center(int ix, int iy) const {
  return {origin_x + (ix + 0.5) * cell, origin_y + (iy + 0.5) * cell};
}

std::optional<std::pair<int, int>> OccupancyGrid2D::cell_of(double x, double y) const {
  const double fx = std::floor((x - origin_x) / cell);
  const double fy = std::floor((y - origin_y) / cell);
  if (!(fx >= 0.0 && fx < nx && fy >= 0.0 && fy < ny)) return std::nullopt;
  return std::pair{static_cast<int>(fx), static_cast<int>(fy)};
}

bool OccupancyGrid2D::occupied_at(double x, double y) const {
  const auto c = cell_of(x, y);
  return c && at(c->first, c->second);
}

}  // namespace reachguard
