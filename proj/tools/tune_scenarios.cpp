// Builds the bundled scenarios and calibrates their prediction spreads.
//
// Each scenario scripts the human's true controls and a predictor that is wrong during the
// manoeuvre onset. Spreads grow linearly over the horizon from sigma_start to sigma_end.
// The sweep looks for sigma_end values where the confidence-aware run first detects at
// `detect_on` and the plain run one macro-step later, then checks the collision outcomes.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "reachguard/errors.hpp"
#include "reachguard/scenario.hpp"
#include "reachguard/sim.hpp"

using namespace reachguard;

namespace {

struct Design {
  std::string name;
  double duration = 8.0;
  AgentState ego;
  double stop_line = 0.0;
  AgentState human;
  std::vector<ControlInput> controls;
  std::size_t catch_up = 0;  // first prediction whose means follow the script
  // Means of the wrong predictor for horizon step i, given the human's state when predicting.
  std::function<Vec2(const AgentState&, std::size_t)> naive;
  Vec2 sigma_start{0.2, 0.5};
  Vec2 sigma_end{3.0, 3.0};
  std::size_t detect_on = 0;
  bool collide_off = true;
};

std::vector<ControlInput> repeat(std::vector<ControlInput> out, ControlInput u, std::size_t n) {
  out.insert(out.end(), n, u);
  return out;
}

Design uturn() {
  Design d;
  d.name = "uturn";
  d.duration = 8.0;
  d.ego = {-65.0, 0.0, 0.0, 26.0};
  d.human = {11.0, 7.0, M_PI, 0.0};
  std::vector<ControlInput> c{{0.0, 0.0}};
  c = repeat(c, {0.3, 2.0}, 2);
  c = repeat(c, {0.57, 0.0}, 10);
  c = repeat(c, {0.0, 0.5}, 3);
  d.controls = c;
  d.catch_up = 6;
  d.naive = [](const AgentState&, std::size_t) { return Vec2(0.0, 0.0); };
  d.sigma_end = Vec2(0.5, 1.0);
  d.detect_on = 2;
  return d;
}

Design stop_sign(double accel = 3.0) {
  Design d;
  d.name = "stop_sign";
  d.duration = 8.0;
  d.ego = {-88.5, 0.0, 0.0, 23.0};
  d.human = {16.0, -13.0, M_PI / 2, 0.0};
  std::vector<ControlInput> c;
  c = repeat(c, {0.0, 0.0}, 4);
  c = repeat(c, {0.0, accel}, 4);
  c = repeat(c, {0.0, 0.0}, 8);
  d.controls = c;
  d.catch_up = 9;
  // Predicted to brake to a stop at up to 2 m/s^2.
  d.naive = [](const AgentState& s, std::size_t i) {
    double v = s.v;
    double a = 0.0;
    for (std::size_t j = 0; j <= i; ++j) {
      a = -std::min(2.0, std::max(v, 0.0) / 0.5);
      v += a * 0.5;
    }
    return Vec2(0.0, a);
  };
  d.sigma_start = Vec2(0.2, 1.0);
  d.sigma_end = Vec2(0.5, 3.0);
  d.detect_on = 6;
  return d;
}

Scenario build(const Design& d) {
  Scenario s;
  s.name = d.name;
  s.dt = 0.5;
  s.duration = d.duration;
  s.ego = d.ego;
  s.lane = {0.0, 0.0, 0.0};
  s.stop_line = d.stop_line;
  s.human = d.human;
  s.human_controls = d.controls;
  s.grid = default_scenario_grid();
  s.predictions.dt = s.dt;
  const std::size_t n = static_cast<std::size_t>(std::llround(s.params.horizon / s.dt));
  s.predictions.horizon_steps = n;
  AgentState h = d.human;
  for (std::size_t k = 0; k < s.steps(); ++k) {
    GaussianControlPrediction p;
    p.dt = s.dt;
    for (std::size_t i = 0; i < n; ++i) {
      Vec2 mu;
      if (k >= d.catch_up) {
        const auto& u = d.controls[std::min(k + i, d.controls.size() - 1)];
        mu = Vec2(u.u1, u.u2);
      } else {
        mu = d.naive(h, i);
      }
      const double f = static_cast<double>(i) / static_cast<double>(n - 1);
      const Vec2 sg = d.sigma_start + f * (d.sigma_end - d.sigma_start);
      // Rounded so the written file reproduces the run exactly.
      p.means.push_back(mu.unaryExpr([](double x) { return std::round(x * 1e6) / 1e6; }));
      p.covariances.push_back(sg.cwiseAbs2().unaryExpr([](double x) { return std::round(x * 1e6) / 1e6; }).asDiagonal());
    }
    s.predictions.table.push_back(std::move(p));
    h = step(h, d.controls[k], s.dt);
  }
  s.validate();
  return s;
}

std::optional<std::size_t> first_detection(const SimLog& log) {
  for (const auto& st : log.steps) {
    if (st.detection) return st.index;
  }
  return std::nullopt;
}

void print_log(const SimLog& log) {
  std::printf("%s confidence=%s\n", log.scenario.c_str(), log.use_confidence ? "on" : "off");
  std::printf("  t     beta   u1[lo,hi]end     u2[lo,hi]end     cells det  cmd            dist    sep    cval  in\n");
  for (const auto& st : log.steps) {
    const auto& b = st.bounds;
    std::printf("  %4.1f  %.3f  [%5.2f,%5.2f]  [%5.2f,%5.2f]  %5zu  %d  %-13s %7.2f %6.2f %7.3f %d%s\n", st.time,
                st.beta, b.min_end[0], b.max_end[0], b.min_end[1], b.max_end[1], st.tube_cells, st.detection,
                to_string(st.command.reason), st.dist_to_line, st.separation, st.containment_value,
                st.containment_checked, st.violation ? " VIOLATION" : "");
  }
  const SimMetrics m = metrics(log);
  std::printf("  detection %s, braking %.2f s, stop offset %.2f m, min sep %.2f m, collision %d, violations %zu\n",
              m.detection_distance ? std::to_string(*m.detection_distance).c_str() : "none", m.braking_duration,
              m.stop_offset, m.min_separation, m.collision, m.violations);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build and calibrate the bundled scenarios"};
  std::string which = "uturn";
  std::vector<double> sigma;
  std::string out;
  bool sweep = false;
  int jobs = 0;
  std::size_t max_steps = 0;
  std::vector<double> s1_grid{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  std::vector<double> s2_grid{1.0, 2.0, 4.0};
  app.add_option("--s1", s1_grid, "sigma_end candidates for u1");
  app.add_option("--s2", s2_grid, "sigma_end candidates for u2");
  double accel = 3.0;
  app.add_option("--accel", accel, "stop_sign: the human's acceleration through the junction");
  std::vector<double> sigma0;
  app.add_option("--sigma-start", sigma0, "sigma_start for (u1, u2)")->expected(2);
  std::vector<double> human_xy;
  app.add_option("--human", human_xy, "override the human's start position")->expected(2);
  app.add_option("--max-steps", max_steps, "stop the report runs early");
  app.add_option("scenario", which, "uturn or stop_sign")->check(CLI::IsMember({"uturn", "stop_sign"}));
  app.add_option("--sigma-end", sigma, "sigma_end for (u1, u2)")->expected(2);
  app.add_flag("--sweep", sweep, "search sigma_end for the detection targets");
  app.add_option("--write", out, "write the scenario JSON here");
  app.add_option("--jobs", jobs, "solver threads");
  CLI11_PARSE(app, argc, argv);

  try {
    Design d = which == "uturn" ? uturn() : stop_sign(accel);
    if (!sigma0.empty()) d.sigma_start = Vec2(sigma0[0], sigma0[1]);
    if (!human_xy.empty()) {
      d.human.x = human_xy[0];
      d.human.y = human_xy[1];
    }
    TubeCache cache = TubeCache::from_environment(256);
    SimOptions opt;
    opt.cache = &cache;
    opt.solver.jobs = jobs;

    if (sweep) {
      std::vector<Vec2> ok;
      for (double s1 : s1_grid) {
        for (double s2 : s2_grid) {
          d.sigma_end = Vec2(s1, s2);
          const Scenario sc = build(d);
          opt.max_steps = d.detect_on + 2;
          opt.use_confidence = true;
          const auto on = first_detection(run(sc, opt));
          opt.use_confidence = false;
          const auto off = first_detection(run(sc, opt));
          const bool good = on == d.detect_on && off == d.detect_on + 1;
          std::printf("sigma_end (%4.1f, %4.1f): on %s off %s%s\n", s1, s2,
                      on ? std::to_string(*on).c_str() : "-", off ? std::to_string(*off).c_str() : "-",
                      good ? "  ok" : "");
          std::fflush(stdout);
          if (good) ok.push_back(d.sigma_end);
        }
      }
      if (ok.empty()) {
        std::printf("no sigma_end meets the detection targets\n");
        return 1;
      }
      d.sigma_end = ok[ok.size() / 2];
      std::printf("chosen sigma_end (%g, %g)\n", d.sigma_end[0], d.sigma_end[1]);
    } else if (!sigma.empty()) {
      d.sigma_end = Vec2(sigma[0], sigma[1]);
    }

    const Scenario sc = build(d);
    opt.max_steps = max_steps;
    opt.use_confidence = true;
    const SimLog on = run(sc, opt);
    print_log(on);
    opt.use_confidence = false;
    const SimLog off = run(sc, opt);
    print_log(off);
    const bool targets = first_detection(on) == d.detect_on && first_detection(off) == d.detect_on + 1 &&
                         !on.collision && off.collision == d.collide_off && on.violations == 0;
    std::printf("targets %s\n", targets ? "met" : "NOT met");
    if (!out.empty()) {
      std::ofstream f(out);
      f << scenario_to_json(sc);
      std::printf("wrote %s\n", out.c_str());
    }
    return targets ? 0 : 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
