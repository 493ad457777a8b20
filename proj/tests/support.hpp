#pragma once

#include <cmath>
#include <random>

#include "reachguard/grid.hpp"

namespace testing {

// Grid small enough for sub-second solves, fine enough for the default initial-set margins.
inline reachguard::GridSpec small_grid() {
  reachguard::GridSpec g;
  g.axes[reachguard::kDimX] = {-4.0, 12.0, 17, false};
  g.axes[reachguard::kDimY] = {-6.0, 6.0, 13, false};
  g.axes[reachguard::kDimTheta] = {-M_PI, M_PI, 33, true};
  g.axes[reachguard::kDimV] = {-2.0, 8.0, 21, false};
  return g;
}

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine); }
  bool coin() { return integer(0, 1) == 1; }
};

// Composite Simpson rule on [a, b] with n (even) panels.
template <class F>
double simpson(F&& f, double a, double b, int n = 2000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace testing
