#pragma once

#include <array>
#include <cstddef>
#include <string>

namespace reachguard {

enum Dim : int { kDimX = 0, kDimY = 1, kDimTheta = 2, kDimV = 3 };
inline constexpr int kStateDims = 4;

const char* dim_name(int d);

/// One grid axis. Non-periodic axes place nodes on both bounds,
/// periodic axes are cell-centred on [lo, hi).
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  int n = 3;
  bool periodic = false;

  double spacing() const { return periodic ? (hi - lo) / n : (hi - lo) / (n - 1); }
  // Written as a ratio so that nodes like v = 0 come out exact, with or without FMA.
  double node(int i) const {
    return periodic ? lo + (hi - lo) * (2.0 * i + 1.0) / (2.0 * n) : lo + (hi - lo) * i / (n - 1);
  }
  /// Continuous index of a coordinate (periodic axes are not wrapped here).
  double position(double value) const {
    return periodic ? (value - lo) / spacing() - 0.5 : (value - lo) / spacing();
  }

  bool operator==(const Axis&) const = default;
};

/// Dense 4-D grid over (x, y, theta, v). Storage is x-major: x varies slowest, v fastest.
struct GridSpec {
  std::array<Axis, kStateDims> axes;

  /// x in [-10, 45] m, y in [-25, 25] m, theta periodic, v in [-2, 20] m/s; 111x101x61x45.
  static GridSpec default_grid();

  /// Throws kConfiguration on fewer than 3 cells, empty ranges, or a non-periodic theta.
  void validate() const;

  std::size_t size() const;
  std::array<std::size_t, kStateDims> strides() const;
  std::size_t index(int ix, int iy, int ith, int iv) const {
    return ((static_cast<std::size_t>(ix) * axes[1].n + iy) * axes[2].n + ith) * axes[3].n + iv;
  }
  double spacing(int d) const { return axes[d].spacing(); }
  double max_spacing() const;
  std::string describe() const;

  bool operator==(const GridSpec&) const = default;
};

}  // namespace reachguard
