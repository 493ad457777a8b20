#include "reachguard/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "reachguard/errors.hpp"

namespace reachguard {

const char* dim_name(int d) {
  static constexpr const char* kNames[] = {"x", "y", "theta", "v"};
  return (d >= 0 && d < kStateDims) ? kNames[d] : "?";
}

GridSpec GridSpec::default_grid() {
  constexpr double pi = std::numbers::pi;
  return GridSpec{{Axis{-10.0, 45.0, 111, false}, Axis{-25.0, 25.0, 101, false},
                   Axis{-pi, pi, 61, true}, Axis{-2.0, 20.0, 45, false}}};
}

void GridSpec::validate() const {
  for (int d = 0; d < kStateDims; ++d) {
    const Axis& a = axes[d];
    std::ostringstream msg;
    msg << "grid axis " << dim_name(d) << ": ";
    if (a.n < 3) throw Error(ErrorKind::kConfiguration, msg.str() + "needs at least 3 cells");
    if (!(a.hi > a.lo) || !std::isfinite(a.lo) || !std::isfinite(a.hi)) {
      throw Error(ErrorKind::kConfiguration, msg.str() + "upper bound must exceed lower bound");
    }
    if ((d == kDimTheta) != a.periodic) {
      throw Error(ErrorKind::kConfiguration, msg.str() + "only theta is periodic");
    }
  }
  const Axis& th = axes[kDimTheta];
  if (std::abs((th.hi - th.lo) - 2.0 * std::numbers::pi) > 1e-9) {
    throw Error(ErrorKind::kConfiguration, "grid axis theta must span exactly 2*pi");
  }
}

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (const Axis& a : axes) s *= static_cast<std::size_t>(a.n);
  return s;
}

std::array<std::size_t, kStateDims> GridSpec::strides() const {
  std::array<std::size_t, kStateDims> s{};
  s[kDimV] = 1;
  for (int d = kStateDims - 2; d >= 0; --d) s[d] = s[d + 1] * static_cast<std::size_t>(axes[d + 1].n);
  return s;
}

double GridSpec::max_spacing() const {
  double m = 0.0;
  for (const Axis& a : axes) m = std::max(m, a.spacing());
  return m;
}

std::string GridSpec::describe() const {
  std::ostringstream os;
  for (int d = 0; d < kStateDims; ++d) {
    if (d) os << " x ";
    os << dim_name(d) << "[" << axes[d].lo << "," << axes[d].hi << "]:" << axes[d].n;
  }
  return os.str();
}

}  // namespace reachguard
