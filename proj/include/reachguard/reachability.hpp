#pragma once

// Forward reachable tubes of the human vehicle on a dense 4-D grid.
//
// The tube value V(x, tau) solves
//   min{ dV/dtau + H(x, tau, grad V), l(x) - V } = 0,   V(x, t) = l(x),
// with H = max_u grad V . f(x, u) over the time-interpolated control box.
// The tube is the strict sub-zero level set of V at t + T.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "reachguard/dynamics.hpp"
#include "reachguard/grid.hpp"
#include "reachguard/occupancy.hpp"
#include "reachguard/prediction.hpp"

namespace reachguard {

/// Half-widths of the initial set around (origin, zero heading, v_start).
struct InitialSetMargins {
  double position = 1.0;  // m
  double speed = 0.5;     // m/s
  double heading = 0.1;   // rad

  bool operator==(const InitialSetMargins&) const = default;
};

/// Parameters that select one member of the tube family.
struct FrtKey {
  double v_start = 0.0;
  ControlBoundsEndpoints endpoints;

  bool operator==(const FrtKey&) const = default;
};

struct ValueSnapshot {
  double time = 0.0;  // seconds since the start of the horizon
  std::vector<float> values;
};

struct ValueFunction {
  GridSpec grid;
  double horizon = 3.0;
  FrtKey key;
  InitialSetMargins margins;
  bool grid_scaled_l = true;
  std::vector<float> values;    // V at the end of the horizon
  std::vector<float> l_values;  // initial condition
  std::vector<ValueSnapshot> snapshots;

  /// Multilinear interpolation of the final values; +inf outside the grid.
  double interpolate(const AgentState& s) const;
};

/// Multilinear interpolation with theta wrapped; +inf outside the non-periodic bounds.
double interpolate_values(const GridSpec& grid, std::span<const float> values, const AgentState& s);

/// l(x) = max(|(x, y)| - eps_pos, a (|theta| - eps_heading), b (|v - v_start| - eps_speed)).
/// With grid_scaled, a and b convert one heading / speed cell into one position cell so the
/// set is equally deep in every direction; otherwise a = b = 1. The zero level set is the same.
/// Throws kConfiguration if a margin is too small for the grid to resolve the set.
std::vector<float> initial_value(const GridSpec& grid, double v_start,
                                 const InitialSetMargins& margins = {}, bool grid_scaled = true);

/// The factors a and b used by initial_value.
std::array<double, 2> initial_value_scales(const GridSpec& grid);

/// max over the control box of grad . f(state, u). The control part is bang-bang.
double hamiltonian(const std::array<double, 4>& grad, const AgentState& state, const Vec2& u_min,
                   const Vec2& u_max);

enum class NumericalHamiltonian {
  kGodunov,        // dimension-wise upwind (exact Godunov flux for this separable Hamiltonian)
  kLaxFriedrichs,  // central gradient plus global Lax-Friedrichs dissipation
};

struct SolverOptions {
  double dtau = 0.0;               // 0 picks the largest step allowed by the CFL bound
  double snapshot_interval = 0.0;  // 0 keeps no snapshots
  int jobs = 0;                    // worker threads, 0 = hardware concurrency
  InitialSetMargins margins;
  HardCaps caps;  // sets the dissipation / CFL speeds on the control axes
  NumericalHamiltonian scheme = NumericalHamiltonian::kGodunov;
  int order = 2;  // 1: first-order upwind, forward Euler. 2: ENO2 differences, Heun steps
  bool grid_scaled_l = true;   // see initial_value
  bool check_boundary = true;  // fail if the tube touches a non-periodic face
};

/// Per-axis characteristic speed bounds used for dissipation and the CFL limit.
std::array<double, 4> dissipation_speeds(const GridSpec& grid, const HardCaps& caps);

/// Largest stable time step: min(0.5 min_d dx_d / a_d, 1 / max sum_d |dH/dp_d| / dx_d).
/// Lax-Friedrichs bounds the drift terms by a_x / dx + a_y / dy; Godunov uses
/// max over heading nodes of a_x |cos| / dx + a_y |sin| / dy.
double max_stable_dtau(const GridSpec& grid, const HardCaps& caps,
                       NumericalHamiltonian scheme = NumericalHamiltonian::kGodunov);

ValueFunction solve_frt(const FrtKey& key, const GridSpec& grid, double horizon,
                        const SolverOptions& options = {});

inline ValueFunction solve_frt(double v_start, const ControlBoundsEndpoints& ep,
                               const GridSpec& grid, double horizon,
                               const SolverOptions& options = {}) {
  return solve_frt(FrtKey{v_start, ep}, grid, horizon, options);
}

struct TubeMask {
  GridSpec grid;
  std::vector<std::uint8_t> cells;

  std::size_t count() const;
  bool at(std::size_t i) const { return cells[i] != 0; }
};

TubeMask frt_set(const GridSpec& grid, std::span<const float> values, double threshold = 0.0);

/// { x : V(x, t + T) < threshold }
inline TubeMask frt_set(const ValueFunction& vf, double threshold = 0.0) {
  return frt_set(vf.grid, vf.values, threshold);
}

/// OR-reduction over heading and speed. Cell (ix, iy) is centred on grid node (ix, iy).
OccupancyGrid2D project_positions(const TubeMask& mask);

}  // namespace reachguard
