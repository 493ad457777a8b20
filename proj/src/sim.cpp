#include "reachguard/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "reachguard/errors.hpp"

namespace reachguard {

namespace {

template <class F>
auto stage(std::size_t k, const char* name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), "step " + std::to_string(k) + ", stage '" + name + "': " + e.what());
  }
}

AgentState to_body(const AgentState& s, const AgentState& origin) {
  const double c = std::cos(origin.theta), sn = std::sin(origin.theta);
  const double dx = s.x - origin.x, dy = s.y - origin.y;
  return {c * dx + sn * dy, -sn * dx + c * dy, normalize_angle(s.theta - origin.theta), s.v};
}

bool inside(const ControlInput& u, const std::pair<Vec2, Vec2>& box) {
  constexpr double tol = 1e-9;
  return u.u1 >= box.first[0] - tol && u.u1 <= box.second[0] + tol && u.u2 >= box.first[1] - tol &&
         u.u2 <= box.second[1] + tol;
}

int substeps(double dt) { return static_cast<int>(std::ceil(dt / kSubStep - 1e-9)); }

// Largest tube value along the human's scripted path over the horizon, and whether every
// scripted control stayed inside the bounds.
std::pair<double, bool> containment(const Scenario& sc, std::size_t k, const AgentState& human,
                                    const ControlBoundsEndpoints& ep, const ValueFunction& vf) {
  const std::size_t horizon_steps = sc.predictions.horizon_steps;
  const std::size_t last = std::min(k + horizon_steps, sc.human_controls.size());
  const int n = substeps(sc.dt);
  const double h = sc.dt / n;
  const double t0 = static_cast<double>(k) * sc.dt;
  const double T = sc.params.horizon;
  bool in_bounds = last > k;
  double worst = vf.interpolate(to_body(human, human));
  AgentState s = human;
  for (std::size_t j = k; j < last; ++j) {
    const ControlInput u = sc.human_controls[j];
    const double ta = static_cast<double>(j) * sc.dt, tb = ta + sc.dt;
    in_bounds = in_bounds && inside(u, interp_bounds(ep, ta, t0, T)) && inside(u, interp_bounds(ep, tb, t0, T));
    for (int i = 0; i < n; ++i) {
      s = rk4_step(s, u, h);
      worst = std::max(worst, vf.interpolate(to_body(s, human)));
    }
  }
  return {worst, in_bounds};
}

nlohmann::json state_json(const AgentState& s) {
  return {{"x", s.x}, {"y", s.y}, {"theta", s.theta}, {"v", s.v}};
}

}  // namespace

SimLog run(const Scenario& sc, const SimOptions& opt) {
  sc.validate();
  TubeCache private_cache(16);
  TubeCache& cache = opt.cache ? *opt.cache : private_cache;
  const auto& p = sc.params;

  SimLog log;
  log.scenario = sc.name;
  log.use_confidence = opt.use_confidence;
  log.dt = sc.dt;
  log.r_col = p.r_col;
  log.stop_line = sc.stop_line;
  log.containment_tolerance = 2.0 * sc.grid.max_spacing();
  log.min_separation = std::numeric_limits<double>::infinity();

  ConfidenceBelief belief = initial_belief(p.beta_low, p.epsilon);
  Planner planner(p.a_max);
  AgentState ego = sc.ego;
  AgentState human = sc.human;
  std::optional<GaussianControlPrediction> previous;
  const int n = substeps(sc.dt);
  const double h = sc.dt / n;

  const std::size_t steps = opt.max_steps > 0 ? std::min(opt.max_steps, sc.steps()) : sc.steps();
  for (std::size_t k = 0; k < steps; ++k) {
    SimStep st;
    st.index = k;
    st.time = static_cast<double>(k) * sc.dt;
    st.ego = ego;
    st.human = human;

    // Observe the previous action and update the belief.
    if (opt.use_confidence && previous) {
      belief = stage(k, "belief", [&] {
        const ControlInput& u = sc.human_controls[k - 1];
        return bayes_update(epsilon_static(belief), u, previous->means.front(), previous->covariances.front());
      });
    }
    st.belief = belief;
    st.beta = opt.use_confidence ? effective_beta(belief) : 1.0;

    const GaussianControlPrediction pred = stage(k, "prediction", [&] {
      auto pr = scripted_prediction(sc.predictions, st.time);
      pr.validate();
      return pr;
    });
    previous = pred;

    st.bounds = stage(k, "bounds", [&] {
      const auto scaled = opt.use_confidence ? scale_covariance(pred, st.beta) : pred;
      return endpoints(apply_hard_caps(bounds_from_gamma(scaled, p.gamma), opt.solver.caps));
    });

    const FrtKey key{human.v, st.bounds};
    std::shared_ptr<const ValueFunction> tube = stage(k, "tube", [&] {
      if (opt.family) {
        try {
          auto vf = family_query(*opt.family, key);
          st.key = key;
          st.tube_origin = TubeOrigin::kFamily;
          return vf;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kOutOfRange) throw;
        }
      }
      TubeLookup found = cache.get(key, sc.grid, p.horizon, opt.solver);
      st.key = found.key;
      st.tube_origin = found.origin;
      return found.tube;
    });

    OccupancyGrid2D k_world;
    CollisionSet coll = stage(k, "collision-set", [&] {
      const OccupancyGrid2D local = project_positions(frt_set(*tube, p.tube_threshold));
      const int factor = std::max(1, static_cast<int>(std::lround(local.cell / opt.world_cell)));
      k_world = world_occupancy(refine(local, factor), {human.x, human.y, human.theta});
      return minkowski_dilate(k_world, p.r_col);
    });
    st.tube_cells = k_world.count();

    const Trajectory nominal = nominal_trajectory(ego, sc.lane, p.horizon, opt.nominal_dt);
    st.hit_time = collision_check(nominal, coll);
    st.detection = st.hit_time.has_value();
    st.dist_to_line = sc.stop_line - sc.lane.arc_length(ego.x, ego.y);
    st.command = stage(k, "plan", [&] { return planner.decide(ego, st.hit_time, st.dist_to_line); });

    const auto [worst, in_bounds] = stage(k, "containment", [&] { return containment(sc, k, human, st.bounds, *tube); });
    st.containment_value = worst;
    st.containment_checked = in_bounds;
    st.violation = in_bounds && !(worst <= log.containment_tolerance);
    if (st.violation) ++log.violations;

    if (opt.on_frame) opt.on_frame(SimFrame{sc, st, k_world, coll, nominal});

    // Advance both vehicles on the shared sub-step grid.
    stage(k, "step", [&] {
      const ControlInput u = sc.human_controls[k];
      double sep = std::hypot(ego.x - human.x, ego.y - human.y);
      for (int i = 0; i < n; ++i) {
        if (st.command.acceleration < 0.0 && ego.v > 0.0) {
          st.brake_time += std::min(h, ego.v / -st.command.acceleration);
        }
        ego = step_ego(ego, st.command.acceleration, h, h);
        human = rk4_step(human, u, h);
        sep = std::min(sep, std::hypot(ego.x - human.x, ego.y - human.y));
      }
      st.separation = sep;
      return 0;
    });
    log.min_separation = std::min(log.min_separation, st.separation);
    log.steps.push_back(std::move(st));
  }
  log.final_ego = ego;
  log.final_human = human;
  log.final_arc = sc.lane.arc_length(ego.x, ego.y);
  log.collision = log.min_separation < p.r_col;
  return log;
}

SimMetrics metrics(const SimLog& log) {
  SimMetrics m;
  for (const auto& st : log.steps) {
    if (st.detection && !m.detection_time) {
      m.detection_time = st.time;
      m.detection_distance = st.dist_to_line;
    }
    if (st.command.reason != PlanReason::kNominal && !m.first_brake && st.ego.v > 0.0) {
      m.first_brake = st.command.reason;
    }
    m.braking_duration += st.brake_time;
  }
  m.stop_offset = log.final_arc - log.stop_line;
  m.stopped = log.final_ego.v == 0.0;
  m.min_separation = log.min_separation;
  m.collision = log.collision;
  m.violations = log.violations;
  return m;
}

void write_log_json(const std::filesystem::path& path, const SimLog& log, const SimMetrics& m) {
  using nlohmann::json;
  json steps = json::array();
  for (const auto& st : log.steps) {
    const auto ep = st.bounds.to_array();
    const auto key = st.key.endpoints.to_array();
    steps.push_back({{"index", st.index},
                     {"time", st.time},
                     {"b_low", st.belief.b_low},
                     {"b_high", st.belief.b_high},
                     {"beta", st.beta},
                     {"bounds", ep},
                     {"key", {{"v_start", st.key.v_start}, {"endpoints", key}}},
                     {"tube_origin", to_string(st.tube_origin)},
                     {"tube_cells", st.tube_cells},
                     {"detection", st.detection},
                     {"hit_time", st.hit_time ? json(*st.hit_time) : json(nullptr)},
                     {"command", {{"acceleration", st.command.acceleration}, {"reason", to_string(st.command.reason)}}},
                     {"ego", state_json(st.ego)},
                     {"human", state_json(st.human)},
                     {"dist_to_line", st.dist_to_line},
                     {"separation", st.separation},
                     {"brake_time", st.brake_time},
                     {"containment_checked", st.containment_checked},
                     {"containment_value", st.containment_value},
                     {"violation", st.violation}});
  }
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json doc = {{"scenario", log.scenario},
              {"use_confidence", log.use_confidence},
              {"dt", log.dt},
              {"r_col", log.r_col},
              {"stop_line", log.stop_line},
              {"containment_tolerance", log.containment_tolerance},
              {"steps", steps},
              {"final_ego", state_json(log.final_ego)},
              {"final_human", state_json(log.final_human)},
              {"metrics",
               {{"detection_time", opt(m.detection_time)},
                {"detection_distance", opt(m.detection_distance)},
                {"first_brake", m.first_brake ? json(to_string(*m.first_brake)) : json(nullptr)},
                {"braking_duration", m.braking_duration},
                {"stop_offset", m.stop_offset},
                {"stopped", m.stopped},
                {"min_separation", m.min_separation},
                {"collision", m.collision},
                {"violations", m.violations}}}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

void write_log_csv(const std::filesystem::path& path, const SimLog& log) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.precision(10);
  out << "step,time,beta,detection,hit_time,reason,acceleration,ego_x,ego_y,ego_v,human_x,human_y,"
         "human_theta,human_v,dist_to_line,separation,tube_cells,tube_origin,containment_value,violation\n";
  for (const auto& st : log.steps) {
    out << st.index << ',' << st.time << ',' << st.beta << ',' << st.detection << ',';
    if (st.hit_time) out << *st.hit_time;
    out << ',' << to_string(st.command.reason) << ',' << st.command.acceleration << ',' << st.ego.x << ','
        << st.ego.y << ',' << st.ego.v << ',' << st.human.x << ',' << st.human.y << ',' << st.human.theta << ','
        << st.human.v << ',' << st.dist_to_line << ',' << st.separation << ',' << st.tube_cells << ','
        << to_string(st.tube_origin) << ',' << st.containment_value << ',' << st.violation << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

void write_belief_csv(const std::filesystem::path& path, const SimLog& log) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.precision(12);
  out << "step,time,b_low,b_high,beta\n";
  for (const auto& st : log.steps) {
    out << st.index << ',' << st.time << ',' << st.belief.b_low << ',' << st.belief.b_high << ',' << st.beta << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

}  // namespace reachguard
