#pragma once

// Extended unicycle model shared by the ego and the human vehicle:
//   x' = v cos(theta), y' = v sin(theta), theta' = u1, v' = u2

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace reachguard {

struct AgentState {
  double x = 0.0;      // m
  double y = 0.0;      // m
  double theta = 0.0;  // rad, kept in (-pi, pi]
  double v = 0.0;      // m/s, may go negative

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

struct ControlInput {
  double u1 = 0.0;  // steering rate, rad/s
  double u2 = 0.0;  // acceleration, m/s^2

  friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

using StateDerivative = std::array<double, 4>;

/// Default RK4 sub-step used by step() and the simulator.
inline constexpr double kSubStep = 0.05;

/// Wraps an angle into (-pi, pi].
double normalize_angle(double theta);

bool is_finite(const AgentState& s);

/// Time derivative of the state. Throws kInvalidState on non-finite input.
StateDerivative flow(const AgentState& state, const ControlInput& u);

/// One classical RK4 step of size h with the heading re-normalized afterwards.
AgentState rk4_step(const AgentState& state, const ControlInput& u, double h);

/// Advances by dt holding u constant, sub-stepping RK4 at no more than max_substep.
AgentState step(const AgentState& state, const ControlInput& u, double dt,
                double max_substep = kSubStep);

/// Uniformly sampled state sequence; states[i] is at t0 + i * dt.
struct Trajectory {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<AgentState> states;

  std::size_t size() const { return states.size(); }
  double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
};

/// Applies controls[k] over [t0 + k dt, t0 + (k+1) dt]; returns len(controls)+1 states.
Trajectory rollout(const AgentState& state, std::span<const ControlInput> controls, double dt,
                   double t0 = 0.0);

}  // namespace reachguard
