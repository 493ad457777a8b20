#include "reachguard/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "reachguard/errors.hpp"

namespace reachguard {

double normalize_angle(double theta) {
  double a = std::remainder(theta, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

bool is_finite(const AgentState& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.theta) &&
         std::isfinite(s.v);
}

StateDerivative flow(const AgentState& state, const ControlInput& u) {
  if (!is_finite(state) || !std::isfinite(u.u1) || !std::isfinite(u.u2)) {
    std::ostringstream msg;
    msg << "non-finite state or control (x=" << state.x << ", y=" << state.y
        << ", theta=" << state.theta << ", v=" << state.v << ", u1=" << u.u1 << ", u2=" << u.u2
        << ")";
    throw Error(ErrorKind::kInvalidState, msg.str());
  }
  return {state.v * std::cos(state.theta), state.v * std::sin(state.theta), u.u1, u.u2};
}

namespace {

AgentState advance(const AgentState& s, const StateDerivative& d, double h) {
  return {s.x + h * d[0], s.y + h * d[1], s.theta + h * d[2], s.v + h * d[3]};
}

}  // namespace

AgentState rk4_step(const AgentState& state, const ControlInput& u, double h) {
  const StateDerivative k1 = flow(state, u);
  const StateDerivative k2 = flow(advance(state, k1, 0.5 * h), u);
  const StateDerivative k3 = flow(advance(state, k2, 0.5 * h), u);
  const StateDerivative k4 = flow(advance(state, k3, h), u);
  StateDerivative d;
  for (int i = 0; i < 4; ++i) d[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
  AgentState next = advance(state, d, h);
  next.theta = normalize_angle(next.theta);
  return next;
}

AgentState step(const AgentState& state, const ControlInput& u, double dt, double max_substep) {
  if (!(dt > 0.0)) throw Error(ErrorKind::kArgument, "step: dt must be positive");
  if (!(max_substep > 0.0)) throw Error(ErrorKind::kArgument, "step: max_substep must be positive");
  const auto n = static_cast<int>(std::ceil(dt / max_substep - 1e-9));
  const double h = dt / n;
  AgentState s = state;
  for (int i = 0; i < n; ++i) s = rk4_step(s, u, h);
  return s;
}

Trajectory rollout(const AgentState& state, std::span<const ControlInput> controls, double dt,
                   double t0) {
  if (controls.empty()) throw Error(ErrorKind::kArgument, "rollout: empty control sequence");
  Trajectory traj{t0, dt, {}};
  traj.states.reserve(controls.size() + 1);
  traj.states.push_back(state);
  for (const ControlInput& u : controls) traj.states.push_back(step(traj.states.back(), u, dt));
  return traj;
}

}  // namespace reachguard
