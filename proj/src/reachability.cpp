#include "reachguard/reachability.hpp"

#include <algorithm>
#include <atomic>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "reachguard/errors.hpp"
#include "reachguard/parallel.hpp"

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

namespace reachguard {

double interpolate_values(const GridSpec& grid, std::span<const float> values, const AgentState& s) {
  const std::array<double, 4> coord{s.x, s.y, normalize_angle(s.theta), s.v};
  std::array<int, 4> lo{};
  std::array<int, 4> hi{};
  std::array<double, 4> frac{};
  for (int d = 0; d < kStateDims; ++d) {
    const Axis& a = grid.axes[d];
    double pos = a.position(coord[d]);
    if (a.periodic) {
      const double f = std::floor(pos);
      frac[d] = pos - f;
      lo[d] = ((static_cast<int>(f) % a.n) + a.n) % a.n;
      hi[d] = (lo[d] + 1) % a.n;
    } else {
      const double tol = 1e-9;
      if (!(pos >= -tol && pos <= a.n - 1 + tol)) return std::numeric_limits<double>::infinity();
      pos = std::clamp(pos, 0.0, static_cast<double>(a.n - 1));
      lo[d] = std::min(static_cast<int>(pos), a.n - 2);
      hi[d] = lo[d] + 1;
      frac[d] = pos - lo[d];
    }
  }
  double acc = 0.0;
  for (int corner = 0; corner < 16; ++corner) {
    double w = 1.0;
    std::array<int, 4> idx{};
    for (int d = 0; d < kStateDims; ++d) {
      const bool up = (corner >> d) & 1;
      idx[d] = up ? hi[d] : lo[d];
      w *= up ? frac[d] : 1.0 - frac[d];
    }
    if (w == 0.0) continue;
    acc += w * values[grid.index(idx[0], idx[1], idx[2], idx[3])];
  }
  return acc;
}

double ValueFunction::interpolate(const AgentState& s) const {
  return interpolate_values(grid, values, s);
}

std::array<double, 2> initial_value_scales(const GridSpec& grid) {
  const double dp = std::min(grid.spacing(kDimX), grid.spacing(kDimY));
  return {dp / grid.spacing(kDimTheta), dp / grid.spacing(kDimV)};
}

std::vector<float> initial_value(const GridSpec& grid, double v_start,
                                 const InitialSetMargins& margins, bool grid_scaled) {
  grid.validate();
  const double dx = grid.spacing(kDimX);
  const double dy = grid.spacing(kDimY);
  const double min_pos = 0.5 * std::hypot(dx, dy);
  const double min_speed = 0.5 * grid.spacing(kDimV);
  const double min_heading = 0.5 * grid.spacing(kDimTheta);
  auto check = [](double eps, double minimum, const char* what) {
    if (!(eps > minimum)) {
      std::ostringstream msg;
      msg << "initial set margin '" << what << "' = " << eps << " is below the grid resolution"
          << " (must exceed " << minimum << "); the discrete initial set could be empty";
      throw Error(ErrorKind::kConfiguration, msg.str());
    }
  };
  check(margins.position, min_pos, "position");
  check(margins.speed, min_speed, "speed");
  check(margins.heading, min_heading, "heading");
  if (!std::isfinite(v_start)) throw Error(ErrorKind::kArgument, "initial_value: v_start not finite");

  const auto scale = grid_scaled ? initial_value_scales(grid) : std::array<double, 2>{1.0, 1.0};
  const auto& ax = grid.axes;
  std::vector<float> l(grid.size());
  std::size_t i = 0;
  for (int ix = 0; ix < ax[0].n; ++ix) {
    const double x = ax[0].node(ix);
    for (int iy = 0; iy < ax[1].n; ++iy) {
      const double pos_term = std::hypot(x, ax[1].node(iy)) - margins.position;
      for (int ith = 0; ith < ax[2].n; ++ith) {
        const double head_term =
            scale[0] * (std::abs(normalize_angle(ax[2].node(ith))) - margins.heading);
        const double ph = std::max(pos_term, head_term);
        for (int iv = 0; iv < ax[3].n; ++iv) {
          const double speed_term = scale[1] * (std::abs(ax[3].node(iv) - v_start) - margins.speed);
          l[i++] = static_cast<float>(std::max(ph, speed_term));
        }
      }
    }
  }
  return l;
}

double hamiltonian(const std::array<double, 4>& grad, const AgentState& state, const Vec2& u_min,
                   const Vec2& u_max) {
  const double drift =
      grad[0] * state.v * std::cos(state.theta) + grad[1] * state.v * std::sin(state.theta);
  const double steer = grad[2] > 0.0 ? grad[2] * u_max[0] : grad[2] * u_min[0];
  const double accel = grad[3] > 0.0 ? grad[3] * u_max[1] : grad[3] * u_min[1];
  return drift + steer + accel;
}

std::array<double, 4> dissipation_speeds(const GridSpec& grid, const HardCaps& caps) {
  const Axis& v = grid.axes[kDimV];
  const double vmax = std::max(std::abs(v.lo), std::abs(v.hi));
  return {vmax, vmax, caps.steering_rate, caps.acceleration};
}

double max_stable_dtau(const GridSpec& grid, const HardCaps& caps, NumericalHamiltonian scheme) {
  const auto alpha = dissipation_speeds(grid, caps);
  double per_axis = std::numeric_limits<double>::infinity();
  for (int d = 0; d < kStateDims; ++d) {
    if (alpha[d] > 0.0) per_axis = std::min(per_axis, grid.spacing(d) / alpha[d]);
  }
  // Sum over axes of |dH/dp_d| / dx_d, maximized over the grid.
  double drift = alpha[0] / grid.spacing(kDimX) + alpha[1] / grid.spacing(kDimY);
  if (scheme == NumericalHamiltonian::kGodunov) {
    // The upwind flux only sees the actual drift v (cos, sin), so take the worst heading node.
    drift = 0.0;
    const Axis& th = grid.axes[kDimTheta];
    for (int i = 0; i < th.n; ++i) {
      drift = std::max(drift, alpha[0] * std::abs(std::cos(th.node(i))) / grid.spacing(kDimX) +
                                  alpha[1] * std::abs(std::sin(th.node(i))) / grid.spacing(kDimY));
    }
  }
  const double rate = drift + alpha[2] / grid.spacing(kDimTheta) + alpha[3] / grid.spacing(kDimV);
  if (rate == 0.0) return std::numeric_limits<double>::infinity();
  return std::min(0.5 * per_axis, 1.0 / rate);
}

namespace {

// Godunov flux of h(p) = max(a p, b p), a <= b. Written with selects so the v loop vectorizes.
inline float control_flux(float pm, float pp, float a, float b) {
  const float hm = (pm >= 0.0f ? b : a) * pm;
  const float hp = (pp >= 0.0f ? b : a) * pp;
  const float lo = std::min(hm, hp);
  const float lo_straddle = (pm < 0.0f && pp > 0.0f) ? std::min(lo, 0.0f) : lo;
  return pm <= pp ? lo_straddle : std::max(hm, hp);
}

// Upwind flux of the linear term c p.
inline float drift_flux(float pm, float pp, float c) { return c * (c >= 0.0f ? pm : pp); }

struct StepInputs {
  const GridSpec* grid;
  const float* cur;
  float* next;
  const float* l;
  const float* cx;  // v cos(theta) per (theta, v)
  const float* cy;  // v sin(theta) per (theta, v)
  float dt;
  float u1_lo, u1_hi, u2_lo, u2_hi;
  std::array<float, 4> inv_d;
  std::array<float, 4> alpha;
  NumericalHamiltonian scheme;
};

// Loop-invariant scalars of one time step, passed by value so the v loop keeps them in registers.
struct StepScalars {
  float dt;
  float u1_lo, u1_hi, u2_lo, u2_hi;
  float idx, idy, idt, idv;
  float ax, ay, at, av;
};

template <NumericalHamiltonian Scheme>
inline float numerical_hamiltonian(const StepScalars& p, float cx, float cy, float pxm, float pxp,
                                   float pym, float pyp, float ptm, float ptp, float pvm,
                                   float pvp) {
  if constexpr (Scheme == NumericalHamiltonian::kGodunov) {
    return drift_flux(pxm, pxp, cx) + drift_flux(pym, pyp, cy) +
           control_flux(ptm, ptp, p.u1_lo, p.u1_hi) + control_flux(pvm, pvp, p.u2_lo, p.u2_hi);
  } else {
    const float px = 0.5f * (pxm + pxp);
    const float py = 0.5f * (pym + pyp);
    const float pt = 0.5f * (ptm + ptp);
    const float pv = 0.5f * (pvm + pvp);
    const float h = cx * px + cy * py + (pt >= 0.0f ? p.u1_hi : p.u1_lo) * pt +
                    (pv >= 0.0f ? p.u2_hi : p.u2_lo) * pv;
    return h - 0.5f * (p.ax * (pxp - pxm) + p.ay * (pyp - pym) + p.at * (ptp - ptm) +
                       p.av * (pvp - pvm));
  }
}

// Flushes denormals for the lifetime of the guard on the calling thread. Values that small
// sit far below the grid resolution and only slow the update down.
class DenormalGuard {
 public:
#if defined(__SSE2__)
  DenormalGuard() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040); }
  ~DenormalGuard() { _mm_setcsr(saved_); }

 private:
  unsigned saved_;
#endif
};

// Ghost value beyond a non-periodic face: extrapolated away from zero so that nothing
// outside the domain can pull the tube in.
inline float ghost(float boundary, float inner) {
  const float step = std::abs(boundary - inner);
  return boundary >= 0.0f ? boundary + step : boundary - step;
}

template <NumericalHamiltonian Scheme>
inline float node_update(const StepScalars& p, float v, float pxm, float pxp, float pym,
                         float pyp, float ptm, float ptp, float pvm, float pvp, float cx, float cy,
                         float l) {
  const float h = numerical_hamiltonian<Scheme>(p, cx, cy, pxm, pxp, pym, pyp, ptm, ptp, pvm, pvp);
  return std::min(v - p.dt * std::max(h, 0.0f), l);
}

// Second difference of the smaller magnitude.
inline float smaller(float a, float b) { return std::abs(a) <= std::abs(b) ? a : b; }

// One-sided differences (scaled by the spacing) from a five-point stencil.
template <int Order>
inline void differences(float m2, float m1, float c, float p1, float p2, float& dm, float& dp) {
  dm = c - m1;
  dp = p1 - c;
  if constexpr (Order == 2) {
    const float d2c = m1 - 2.0f * c + p1;
    dm += 0.5f * smaller(m2 - 2.0f * m1 + c, d2c);
    dp -= 0.5f * smaller(d2c, c - 2.0f * p1 + p2);
  }
}

struct Stencil {
  const float* m2;
  const float* m1;
  const float* p1;
  const float* p2;
};

// One (x, y, theta) row along v. `c` is padded with two ghost nodes on each side.
// With `blend` set the result is averaged with it (second Heun stage).
template <NumericalHamiltonian Scheme, int Order>
unsigned update_row(const StepScalars p, int nv, const float* __restrict c, Stencil sx,
                    Stencil sy, Stencil st, const float* __restrict cx,
                    const float* __restrict cy, const float* __restrict l,
                    const float* __restrict blend, float* __restrict out) {
  unsigned bad = 0;
  const float* __restrict xm2 = sx.m2;
  const float* __restrict xm1 = sx.m1;
  const float* __restrict xp1 = sx.p1;
  const float* __restrict xp2 = sx.p2;
  const float* __restrict ym2 = sy.m2;
  const float* __restrict ym1 = sy.m1;
  const float* __restrict yp1 = sy.p1;
  const float* __restrict yp2 = sy.p2;
  const float* __restrict tm2 = st.m2;
  const float* __restrict tm1 = st.m1;
  const float* __restrict tp1 = st.p1;
  const float* __restrict tp2 = st.p2;
  for (int k = 0; k < nv; ++k) {
    const float v = c[k + 2];
    float pxm, pxp, pym, pyp, ptm, ptp, pvm, pvp;
    differences<Order>(xm2[k], xm1[k], v, xp1[k], xp2[k], pxm, pxp);
    differences<Order>(ym2[k], ym1[k], v, yp1[k], yp2[k], pym, pyp);
    differences<Order>(tm2[k], tm1[k], v, tp1[k], tp2[k], ptm, ptp);
    differences<Order>(c[k], c[k + 1], v, c[k + 3], c[k + 4], pvm, pvp);
    float r = node_update<Scheme>(p, v, pxm * p.idx, pxp * p.idx, pym * p.idy, pyp * p.idy,
                                  ptm * p.idt, ptp * p.idt, pvm * p.idv, pvp * p.idv, cx[k], cy[k],
                                  l[k]);
    if constexpr (Order == 2) {
      // Never undershoot the upwind neighbours; the first-order update obeys the same bound.
      float floor_v = v;
      floor_v = std::min(floor_v, cx[k] > 0.0f ? xm1[k] : (cx[k] < 0.0f ? xp1[k] : v));
      floor_v = std::min(floor_v, cy[k] > 0.0f ? ym1[k] : (cy[k] < 0.0f ? yp1[k] : v));
      floor_v = std::min(floor_v, p.u1_hi > 0.0f ? tm1[k] : v);
      floor_v = std::min(floor_v, p.u1_lo < 0.0f ? tp1[k] : v);
      floor_v = std::min(floor_v, p.u2_hi > 0.0f ? c[k + 1] : v);
      floor_v = std::min(floor_v, p.u2_lo < 0.0f ? c[k + 3] : v);
      r = std::min(std::max(r, floor_v), l[k]);
    }
    if (blend) r = 0.5f * (blend[k] + r);
    out[k] = r;
    bad |= !(std::abs(r) <= FLT_MAX);
  }
  return bad;
}

// Fills the two ghost nodes beyond each end of a padded row of n interior values.
inline void pad_row(float* row, int n) {
  float* v = row + 2;
  row[1] = ghost(v[0], v[1]);
  row[0] = 2.0f * row[1] - v[0];
  v[n] = ghost(v[n - 1], v[n - 2]);
  v[n + 1] = 2.0f * v[n] - v[n - 1];
}

// Ghost rows beyond a non-periodic face, built the same way as pad_row.
struct FaceGhosts {
  std::vector<float> near, far;
  explicit FaceGhosts(int nv) : near(nv), far(nv) {}
  void build(const float* face, const float* inner, int nv) {
    for (int k = 0; k < nv; ++k) {
      near[k] = ghost(face[k], inner[k]);
      far[k] = 2.0f * near[k] - face[k];
    }
  }
};

// Neighbour rows at offsets -2..2 along a non-periodic axis with stride `s`.
inline Stencil axis_stencil(const float* c, std::size_t s, int i, int n, int nv, FaceGhosts& lo,
                            FaceGhosts& hi) {
  Stencil r{};
  if (i == 0 || i == 1) lo.build(c - i * s, c - i * s + s, nv);
  if (i == n - 1 || i == n - 2) {
    const float* face = c + (n - 1 - i) * s;
    hi.build(face, face - s, nv);
  }
  r.m1 = i >= 1 ? c - s : lo.near.data();
  r.m2 = i >= 2 ? c - 2 * s : (i == 1 ? lo.near.data() : lo.far.data());
  r.p1 = i <= n - 2 ? c + s : hi.near.data();
  r.p2 = i <= n - 3 ? c + 2 * s : (i == n - 2 ? hi.near.data() : hi.far.data());
  return r;
}

// Updates x-slabs [ix_begin, ix_end). Returns false if a non-finite value appeared.
template <NumericalHamiltonian Scheme, int Order>
bool update_slabs(const StepInputs& in, const float* blend, int ix_begin, int ix_end) {
  const GridSpec& g = *in.grid;
  const int nx = g.axes[0].n, ny = g.axes[1].n, nt = g.axes[2].n, nv = g.axes[3].n;
  const auto st = g.strides();
  FaceGhosts x_lo(nv), x_hi(nv), y_lo(nv), y_hi(nv);
  std::vector<float> padded(static_cast<std::size_t>(nv) + 4);
  const StepScalars scalars{in.dt, in.u1_lo, in.u1_hi, in.u2_lo, in.u2_hi,
                            in.inv_d[0], in.inv_d[1], in.inv_d[2], in.inv_d[3],
                            in.alpha[0], in.alpha[1], in.alpha[2], in.alpha[3]};
  unsigned bad = 0;
  for (int ix = ix_begin; ix < ix_end; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      for (int it = 0; it < nt; ++it) {
        const std::size_t base = g.index(ix, iy, it, 0);
        const float* c = in.cur + base;
        const Stencil sx = axis_stencil(c, st[0], ix, nx, nv, x_lo, x_hi);
        const Stencil sy = axis_stencil(c, st[1], iy, ny, nv, y_lo, y_hi);
        auto theta_row = [&](int off) { return in.cur + g.index(ix, iy, (it + off + 2 * nt) % nt, 0); };
        const Stencil sth{theta_row(-2), theta_row(-1), theta_row(1), theta_row(2)};
        std::copy(c, c + nv, padded.begin() + 2);
        pad_row(padded.data(), nv);
        const std::size_t row = static_cast<std::size_t>(it) * nv;
        bad |= update_row<Scheme, Order>(scalars, nv, padded.data(), sx, sy, sth, in.cx + row,
                                         in.cy + row, in.l + base, blend ? blend + base : nullptr,
                                         in.next + base);
      }
    }
  }
  return bad == 0;
}

template <NumericalHamiltonian Scheme>
bool update_slabs(const StepInputs& in, int order, const float* blend, int lo, int hi) {
  return order == 2 ? update_slabs<Scheme, 2>(in, blend, lo, hi)
                    : update_slabs<Scheme, 1>(in, blend, lo, hi);
}

bool update_slabs(const StepInputs& in, int order, const float* blend, int lo, int hi) {
  return in.scheme == NumericalHamiltonian::kGodunov
             ? update_slabs<NumericalHamiltonian::kGodunov>(in, order, blend, lo, hi)
             : update_slabs<NumericalHamiltonian::kLaxFriedrichs>(in, order, blend, lo, hi);
}

void check_endpoints(const ControlBoundsEndpoints& ep) {
  const auto a = ep.to_array();
  for (double x : a) {
    if (!std::isfinite(x)) throw Error(ErrorKind::kArgument, "solve_frt: control bounds must be finite");
  }
  if ((ep.min_start.array() > ep.max_start.array()).any() ||
      (ep.min_end.array() > ep.max_end.array()).any()) {
    throw Error(ErrorKind::kArgument, "solve_frt: lower control bound exceeds upper bound");
  }
}

void check_boundary_faces(const GridSpec& g, std::span<const float> values) {
  const auto& ax = g.axes;
  for (int ix = 0; ix < ax[0].n; ++ix) {
    for (int iy = 0; iy < ax[1].n; ++iy) {
      for (int it = 0; it < ax[2].n; ++it) {
        for (int iv = 0; iv < ax[3].n; ++iv) {
          const bool on_face = ix == 0 || ix == ax[0].n - 1 || iy == 0 || iy == ax[1].n - 1 ||
                               iv == 0 || iv == ax[3].n - 1;
          if (!on_face) {
            iv = ax[3].n - 2;  // only the last v node of this row is on a face
            continue;
          }
          if (values[g.index(ix, iy, it, iv)] < 0.0f) {
            std::ostringstream msg;
            msg << "tube reaches the grid boundary at node (" << ax[0].node(ix) << ", "
                << ax[1].node(iy) << ", " << ax[2].node(it) << ", " << ax[3].node(iv)
                << "); enlarge the domain (" << g.describe() << ")";
            throw Error(ErrorKind::kConfiguration, msg.str());
          }
        }
      }
    }
  }
}

}  // namespace

ValueFunction solve_frt(const FrtKey& key, const GridSpec& grid, double horizon,
                        const SolverOptions& options) {
  const auto& ep = key.endpoints;
  grid.validate();
  check_endpoints(ep);
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorKind::kArgument, "solve_frt: horizon must be positive");
  }

  const double dt_max = max_stable_dtau(grid, options.caps, options.scheme);
  int steps = 0;
  if (options.dtau > 0.0) {
    if (options.dtau > dt_max * (1.0 + 1e-9)) {
      std::ostringstream msg;
      msg << "CFL violation: dtau=" << options.dtau << " exceeds the stable limit " << dt_max
          << " for grid " << grid.describe();
      throw Error(ErrorKind::kConfiguration, msg.str());
    }
    steps = static_cast<int>(std::ceil(horizon / options.dtau - 1e-9));
  } else {
    steps = static_cast<int>(std::ceil(horizon / dt_max));
  }
  int snapshot_every = 0;
  if (options.snapshot_interval > 0.0) {
    const int count = std::max(1, static_cast<int>(std::llround(horizon / options.snapshot_interval)));
    steps = ((steps + count - 1) / count) * count;
    snapshot_every = steps / count;
  }
  const double dt = horizon / steps;

  ValueFunction vf;
  vf.grid = grid;
  vf.horizon = horizon;
  vf.key = key;
  vf.margins = options.margins;
  vf.grid_scaled_l = options.grid_scaled_l;
  vf.l_values = initial_value(grid, key.v_start, options.margins, options.grid_scaled_l);
  vf.values = vf.l_values;

  const auto& ax = grid.axes;
  const int nt = ax[2].n, nv = ax[3].n;
  std::vector<float> cx(static_cast<std::size_t>(nt) * nv), cy(cx.size());
  for (int it = 0; it < nt; ++it) {
    const double th = ax[2].node(it);
    for (int iv = 0; iv < nv; ++iv) {
      const double v = ax[3].node(iv);
      cx[static_cast<std::size_t>(it) * nv + iv] = static_cast<float>(v * std::cos(th));
      cy[static_cast<std::size_t>(it) * nv + iv] = static_cast<float>(v * std::sin(th));
    }
  }
  const auto alpha = dissipation_speeds(grid, options.caps);

  if (options.order != 1 && options.order != 2) {
    throw Error(ErrorKind::kArgument, "solve_frt: order must be 1 or 2");
  }
  std::vector<float> next(vf.values.size());
  std::vector<float> stage(options.order == 2 ? vf.values.size() : 0);
  StepInputs in{};
  in.grid = &grid;
  in.l = vf.l_values.data();
  in.cx = cx.data();
  in.cy = cy.data();
  in.dt = static_cast<float>(dt);
  for (int d = 0; d < kStateDims; ++d) {
    in.inv_d[d] = static_cast<float>(1.0 / grid.spacing(d));
    in.alpha[d] = static_cast<float>(alpha[d]);
  }
  in.scheme = options.scheme;

  for (int k = 0; k < steps; ++k) {
    // Control box over [tau_k, tau_k+1]: the hull of the interpolated boxes at both ends.
    const auto [lo0, hi0] = interp_bounds(ep, k * dt, 0.0, horizon);
    const auto [lo1, hi1] = interp_bounds(ep, std::min((k + 1) * dt, horizon), 0.0, horizon);
    in.u1_lo = static_cast<float>(std::min(lo0[0], lo1[0]));
    in.u2_lo = static_cast<float>(std::min(lo0[1], lo1[1]));
    in.u1_hi = static_cast<float>(std::max(hi0[0], hi1[0]));
    in.u2_hi = static_cast<float>(std::max(hi0[1], hi1[1]));
    std::atomic<bool> finite{true};
    auto sweep = [&](const float* cur, float* out, const float* blend) {
      in.cur = cur;
      in.next = out;
      parallel_for(0, ax[0].n, options.jobs, [&](int lo, int hi) {
        DenormalGuard guard;
        if (!update_slabs(in, options.order, blend, lo, hi)) finite = false;
      });
    };
    if (options.order == 2) {
      // Heun: average of the old value and two chained Euler steps.
      sweep(vf.values.data(), stage.data(), nullptr);
      sweep(stage.data(), next.data(), vf.values.data());
    } else {
      sweep(vf.values.data(), next.data(), nullptr);
    }
    if (!finite) {
      std::ostringstream msg;
      msg << "non-finite value in FRT solve at step " << k + 1 << " of " << steps
          << " (tau=" << (k + 1) * dt << " s)";
      throw Error(ErrorKind::kNumerical, msg.str());
    }
    vf.values.swap(next);
    if (snapshot_every > 0 && (k + 1) % snapshot_every == 0) {
      vf.snapshots.push_back({(k + 1) * dt, vf.values});
    }
  }
  if (options.check_boundary) check_boundary_faces(grid, vf.values);
  return vf;
}

std::size_t TubeMask::count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

TubeMask frt_set(const GridSpec& grid, std::span<const float> values, double threshold) {
  if (values.size() != grid.size()) throw Error(ErrorKind::kArgument, "frt_set: size mismatch");
  TubeMask m{grid, std::vector<std::uint8_t>(values.size())};
  for (std::size_t i = 0; i < values.size(); ++i) m.cells[i] = values[i] < threshold ? 1 : 0;
  return m;
}

OccupancyGrid2D project_positions(const TubeMask& mask) {
  const auto& ax = mask.grid.axes;
  const double dx = ax[0].spacing();
  const double dy = ax[1].spacing();
  if (std::abs(dx - dy) > 1e-9 * std::max(dx, dy)) {
    throw Error(ErrorKind::kConfiguration, "project_positions: x and y spacing must match");
  }
  OccupancyGrid2D k = OccupancyGrid2D::empty(ax[0].lo - 0.5 * dx, ax[1].lo - 0.5 * dy, dx, ax[0].n,
                                             ax[1].n);
  const std::size_t inner = static_cast<std::size_t>(ax[2].n) * ax[3].n;
  for (int ix = 0; ix < ax[0].n; ++ix) {
    for (int iy = 0; iy < ax[1].n; ++iy) {
      const auto first = mask.cells.begin() + static_cast<std::ptrdiff_t>(mask.grid.index(ix, iy, 0, 0));
      if (std::find(first, first + static_cast<std::ptrdiff_t>(inner), std::uint8_t{1}) !=
          first + static_cast<std::ptrdiff_t>(inner)) {
        k.set(ix, iy);
      }
    }
  }
  return k;
}

}  // namespace reachguard
