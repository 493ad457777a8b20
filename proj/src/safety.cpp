#include "reachguard/safety.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "reachguard/errors.hpp"

namespace reachguard {

namespace {

using Corners = std::array<std::array<double, 2>, 4>;

// Overlap of an axis-aligned box with a convex quad, by separating axes. Touching counts as
// separate so exactly aligned grids do not grow.
bool overlaps(double x0, double y0, double x1, double y1, const Corners& q, double tol) {
  auto separated = [&](double ax, double ay) {
    double qmin = std::numeric_limits<double>::infinity();
    double qmax = -qmin;
    for (const auto& p : q) {
      const double d = p[0] * ax + p[1] * ay;
      qmin = std::min(qmin, d);
      qmax = std::max(qmax, d);
    }
    const std::array<std::array<double, 2>, 4> box{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
    double bmin = std::numeric_limits<double>::infinity();
    double bmax = -bmin;
    for (const auto& p : box) {
      const double d = p[0] * ax + p[1] * ay;
      bmin = std::min(bmin, d);
      bmax = std::max(bmax, d);
    }
    return qmax <= bmin + tol || bmax <= qmin + tol;
  };
  if (separated(1.0, 0.0) || separated(0.0, 1.0)) return false;
  for (int i = 0; i < 2; ++i) {
    const double ex = q[i + 1][0] - q[i][0];
    const double ey = q[i + 1][1] - q[i][1];
    const double len = std::hypot(ex, ey);
    if (separated(-ey / len, ex / len)) return false;
  }
  return true;
}

// One-dimensional squared distance transform (lower envelope of parabolas).
void edt_1d(const double* f, int n, double* d, std::vector<int>& v, std::vector<double>& z) {
  const double inf = std::numeric_limits<double>::infinity();
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    double s = 0.0;
    for (;;) {
      const int p = v[k];
      s = ((f[q] + q * static_cast<double>(q)) - (f[p] + p * static_cast<double>(p))) / (2.0 * (q - p));
      if (s > z[k] || k == 0) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  if (k < 0) {
    std::fill(d, d + n, inf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    d[q] = dq * dq + f[v[j]];
  }
}

}  // namespace

OccupancyGrid2D world_occupancy(const OccupancyGrid2D& local, const Pose2D& pose, double anchor_x,
                                double anchor_y) {
  if (!std::isfinite(pose.x) || !std::isfinite(pose.y) || !std::isfinite(pose.theta)) {
    throw Error(ErrorKind::kArgument, "world_occupancy: pose must be finite");
  }
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  auto to_world = [&](double x, double y) {
    return std::array<double, 2>{pose.x + c * x - s * y, pose.y + s * x + c * y};
  };
  std::vector<Corners> quads;
  double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
  double xmax = -xmin, ymax = -xmin;
  for (int ix = 0; ix < local.nx; ++ix) {
    for (int iy = 0; iy < local.ny; ++iy) {
      if (!local.at(ix, iy)) continue;
      const double x0 = local.origin_x + ix * local.cell, x1 = x0 + local.cell;
      const double y0 = local.origin_y + iy * local.cell, y1 = y0 + local.cell;
      Corners q{to_world(x0, y0), to_world(x1, y0), to_world(x1, y1), to_world(x0, y1)};
      for (const auto& p : q) {
        xmin = std::min(xmin, p[0]);
        xmax = std::max(xmax, p[0]);
        ymin = std::min(ymin, p[1]);
        ymax = std::max(ymax, p[1]);
      }
      quads.push_back(q);
    }
  }
  const double cell = local.cell;
  if (quads.empty()) {
    const double ox = anchor_x + std::floor((pose.x - anchor_x) / cell) * cell;
    const double oy = anchor_y + std::floor((pose.y - anchor_y) / cell) * cell;
    return OccupancyGrid2D::empty(ox, oy, cell, 0, 0);
  }
  const double tol = 1e-9 * cell;
  const double gx0 = std::floor((xmin - anchor_x) / cell + 1e-9);
  const double gy0 = std::floor((ymin - anchor_y) / cell + 1e-9);
  const int nx = static_cast<int>(std::ceil((xmax - anchor_x) / cell - 1e-9) - gx0);
  const int ny = static_cast<int>(std::ceil((ymax - anchor_y) / cell - 1e-9) - gy0);
  OccupancyGrid2D out = OccupancyGrid2D::empty(anchor_x + gx0 * cell, anchor_y + gy0 * cell, cell,
                                               std::max(nx, 1), std::max(ny, 1));
  for (const auto& q : quads) {
    double qx0 = q[0][0], qx1 = q[0][0], qy0 = q[0][1], qy1 = q[0][1];
    for (const auto& p : q) {
      qx0 = std::min(qx0, p[0]);
      qx1 = std::max(qx1, p[0]);
      qy0 = std::min(qy0, p[1]);
      qy1 = std::max(qy1, p[1]);
    }
    const int i0 = std::max(0, static_cast<int>(std::floor((qx0 - out.origin_x) / cell)));
    const int i1 = std::min(out.nx - 1, static_cast<int>(std::floor((qx1 - out.origin_x) / cell)));
    const int j0 = std::max(0, static_cast<int>(std::floor((qy0 - out.origin_y) / cell)));
    const int j1 = std::min(out.ny - 1, static_cast<int>(std::floor((qy1 - out.origin_y) / cell)));
    for (int i = i0; i <= i1; ++i) {
      for (int j = j0; j <= j1; ++j) {
        if (out.at(i, j)) continue;
        const double bx = out.origin_x + i * cell, by = out.origin_y + j * cell;
        if (overlaps(bx, by, bx + cell, by + cell, q, tol)) out.set(i, j);
      }
    }
  }
  return out;
}

OccupancyGrid2D refine(const OccupancyGrid2D& k, int factor) {
  if (factor < 1) throw Error(ErrorKind::kArgument, "refine: factor must be >= 1");
  OccupancyGrid2D out = OccupancyGrid2D::empty(k.origin_x, k.origin_y, k.cell / factor,
                                               k.nx * factor, k.ny * factor);
  for (int ix = 0; ix < out.nx; ++ix) {
    for (int iy = 0; iy < out.ny; ++iy) {
      if (k.at(ix / factor, iy / factor)) out.set(ix, iy);
    }
  }
  return out;
}

CollisionSet minkowski_dilate(const OccupancyGrid2D& k, double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw Error(ErrorKind::kArgument, "minkowski_dilate: r must be >= 0");
  const int pad = static_cast<int>(std::ceil(r / k.cell - 1e-12));
  const int nx = k.nx + 2 * pad, ny = k.ny + 2 * pad;
  CollisionSet out{OccupancyGrid2D::empty(k.origin_x - pad * k.cell, k.origin_y - pad * k.cell,
                                          k.cell, nx, ny),
                   r};
  if (nx == 0 || ny == 0 || !k.any()) return out;

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> f(static_cast<std::size_t>(nx) * ny, inf);
  for (int ix = 0; ix < k.nx; ++ix) {
    for (int iy = 0; iy < k.ny; ++iy) {
      if (k.at(ix, iy)) f[out.grid.index(ix + pad, iy + pad)] = 0.0;
    }
  }
  std::vector<int> v;
  std::vector<double> z;
  std::vector<double> col(std::max(nx, ny)), res(std::max(nx, ny));
  for (int ix = 0; ix < nx; ++ix) {  // along y: contiguous
    double* row = &f[out.grid.index(ix, 0)];
    edt_1d(row, ny, res.data(), v, z);
    std::copy(res.begin(), res.begin() + ny, row);
  }
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) col[ix] = f[out.grid.index(ix, iy)];
    edt_1d(col.data(), nx, res.data(), v, z);
    for (int ix = 0; ix < nx; ++ix) f[out.grid.index(ix, iy)] = res[ix];
  }
  const double rc = r / k.cell;
  const double limit = rc * rc * (1.0 + 1e-12) + 1e-12;
  for (std::size_t i = 0; i < f.size(); ++i) out.grid.cells[i] = f[i] <= limit ? 1 : 0;
  return out;
}

std::optional<double> collision_check(const Trajectory& nominal, const CollisionSet& c) {
  for (std::size_t i = 0; i < nominal.size(); ++i) {
    const auto& s = nominal.states[i];
    if (c.grid.occupied_at(s.x, s.y)) return nominal.time(i);
  }
  return std::nullopt;
}

const char* to_string(PlanReason reason) {
  switch (reason) {
    case PlanReason::kNominal: return "nominal";
    case PlanReason::kBrakeToLine: return "brake-to-line";
    case PlanReason::kMaxBrake: return "max-brake";
  }
  return "?";
}

PlanCommand plan(const AgentState& ego, std::optional<double> hit, double dist_to_line,
                 double a_max) {
  if (!(a_max > 0.0)) throw Error(ErrorKind::kArgument, "plan: a_max must be positive");
  if (!(ego.v >= 0.0)) throw Error(ErrorKind::kInvalidState, "plan: ego speed must be >= 0");
  if (!hit) return {0.0, PlanReason::kNominal};
  if (!(dist_to_line > 0.0)) return {-a_max, PlanReason::kMaxBrake};
  const double needed = ego.v * ego.v / (2.0 * dist_to_line);
  if (needed <= a_max) return {-needed, PlanReason::kBrakeToLine};
  return {-a_max, PlanReason::kMaxBrake};
}

PlanCommand Planner::decide(const AgentState& ego, std::optional<double> hit, double dist_to_line) {
  if (latched_ && ego.v > 0.0) return *latched_;
  latched_.reset();
  const PlanCommand cmd = plan(ego, hit, dist_to_line, a_max_);
  if (cmd.reason != PlanReason::kNominal && ego.v > 0.0) latched_ = cmd;
  return cmd;
}

double Lane::arc_length(double x, double y) const {
  return (x - origin_x) * std::cos(heading) + (y - origin_y) * std::sin(heading);
}

Trajectory nominal_trajectory(const AgentState& ego, const Lane& lane, double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon >= 0.0)) throw Error(ErrorKind::kArgument, "nominal_trajectory: bad timing");
  const int n = static_cast<int>(std::llround(horizon / dt));
  Trajectory t{0.0, dt, {}};
  t.states.reserve(n + 1);
  const double cx = std::cos(lane.heading), cy = std::sin(lane.heading);
  for (int i = 0; i <= n; ++i) {
    const double d = ego.v * i * dt;
    t.states.push_back({ego.x + d * cx, ego.y + d * cy, lane.heading, ego.v});
  }
  return t;
}

AgentState step_ego(const AgentState& ego, double acceleration, double dt, double max_substep) {
  if (!(dt > 0.0) || !(max_substep > 0.0)) throw Error(ErrorKind::kArgument, "step_ego: dt must be positive");
  const int n = static_cast<int>(std::ceil(dt / max_substep - 1e-9));
  const double h = dt / n;
  AgentState s = ego;
  for (int i = 0; i < n; ++i) {
    const double a = std::max(acceleration, -s.v / h);
    s = rk4_step(s, {0.0, a}, h);
    if (std::abs(s.v) < 1e-12) s.v = 0.0;
  }
  return s;
}

}  // namespace reachguard
