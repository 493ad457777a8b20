// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero
// if any fails.

#include <chrono>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "reachguard/confidence.hpp"
#include "reachguard/errors.hpp"
#include "reachguard/family.hpp"
#include "reachguard/prediction.hpp"
#include "reachguard/reachability.hpp"
#include "reachguard/safety.hpp"
#include "reachguard/scenario.hpp"
#include "reachguard/sim.hpp"
#include "support.hpp"

using namespace reachguard;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SolverOptions serial() {
  SolverOptions o;
  o.jobs = 1;
  return o;
}

std::size_t cells_missing(const TubeMask& a, const TubeMask& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) n += a.at(i) && !b.at(i);
  return n;
}

// Criterion 1 ---------------------------------------------------------------------------

// Endpoint bounds drawn within the caps, limited so the speed stays on the grid for T seconds.
ControlBoundsEndpoints random_bounds(testing::Rng& rng, double v0, double T, const GridSpec& g) {
  const Axis& va = g.axes[kDimV];
  const double room = 0.5 + 2.0 * va.spacing();
  const double up = std::min(10.0, (va.hi - room - v0) / T);
  const double down = std::max(-10.0, (va.lo + room - v0) / T);
  std::array<double, 8> a{};
  for (int end = 0; end < 2; ++end) {
    const double u1a = rng.uniform(-1.0, 1.0), u1b = rng.uniform(-1.0, 1.0);
    const double u2a = rng.uniform(std::max(down, -3.0), std::min(up, 3.0));
    const double u2b = rng.uniform(std::max(down, -3.0), std::min(up, 3.0));
    a[4 * end + 0] = std::min(u1a, u1b);
    a[4 * end + 1] = std::min(u2a, u2b);
    a[4 * end + 2] = std::max(u1a, u1b);
    a[4 * end + 3] = std::max(u2a, u2b);
  }
  return ControlBoundsEndpoints::from_array(a);
}

// True when extreme-control paths from the initial set stay `room` metres inside the domain.
bool fits_domain(double v0, const ControlBoundsEndpoints& ep, double T, const GridSpec& g, double room) {
  const InitialSetMargins m;
  for (int c = 0; c < 16; ++c) {
    AgentState s{0.0, 0.0, (c & 4 ? 1 : -1) * m.heading, v0 + (c & 8 ? 1 : -1) * m.speed};
    for (double t = 0.0; t < T - 1e-9; t += 0.05) {
      const auto [lo, hi] = interp_bounds(ep, t, 0.0, T);
      s = step(s, {c & 1 ? hi[0] : lo[0], c & 2 ? hi[1] : lo[1]}, 0.05);
      const double r = m.position + room;
      if (s.x - r < g.axes[kDimX].lo || s.x + r > g.axes[kDimX].hi || s.y - r < g.axes[kDimY].lo ||
          s.y + r > g.axes[kDimY].hi) {
        return false;
      }
    }
  }
  return true;
}

Outcome monte_carlo_containment() {
  const GridSpec g = GridSpec::default_grid();
  const double T = 3.0, dt = 0.1, tol = 2.0 * g.max_spacing();
  const InitialSetMargins m;
  testing::Rng rng(20240601);
  const auto t0 = Clock::now();
  std::size_t violations = 0, samples = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int config = 0; config < 5; ++config) {
    double v0 = 0.0;
    ControlBoundsEndpoints ep;
    do {
      v0 = rng.uniform(0.0, 13.0);
      ep = random_bounds(rng, v0, T, g);
    } while (!fits_domain(v0, ep, T, g, 5.0));
    const ValueFunction vf = solve_frt(v0, ep, g, T);
    for (int n = 0; n < 10000; ++n) {
      const double r = m.position * std::sqrt(rng.uniform(0.0, 1.0)), phi = rng.uniform(-M_PI, M_PI);
      AgentState s{r * std::cos(phi), r * std::sin(phi), rng.uniform(-m.heading, m.heading),
                   v0 + rng.uniform(-m.speed, m.speed)};
      for (double t = 0.0; t < T - 1e-9; t += dt) {
        // Piecewise-constant control inside the bounds over the whole interval.
        const auto [lo, hi] = interp_bounds(ep, t, 0.0, T);
        const auto [lo2, hi2] = interp_bounds(ep, t + dt, 0.0, T);
        const Vec2 a = lo.cwiseMax(lo2), b = hi.cwiseMin(hi2);
        ControlInput u{rng.uniform(a[0], b[0]), rng.uniform(a[1], b[1])};
        if (rng.coin()) u = {rng.coin() ? a[0] : b[0], rng.coin() ? a[1] : b[1]};
        s = step(s, u, dt);
        const double v = vf.interpolate(s);
        worst = std::max(worst, v);
        ++samples;
        if (!(v <= tol)) ++violations;
      }
    }
  }
  const double elapsed = seconds_since(t0);
  return {violations == 0 && elapsed <= 900.0,
          fmt("%zu violations in %zu states, max V %.3f (tol %.3f), %.0f s", violations, samples, worst, tol,
              elapsed)};
}

// Criterion 2 ---------------------------------------------------------------------------

Outcome beta_nesting() {
  const GridSpec g = default_scenario_grid();
  GaussianControlPrediction p;
  p.dt = 0.5;
  for (int i = 0; i < 6; ++i) {
    p.means.push_back(Vec2::Zero());
    p.covariances.push_back(Vec2(0.04, 1.0).asDiagonal());
  }
  std::vector<TubeMask> masks;
  for (double beta : {0.2, 0.5, 1.0}) {
    const auto ep = endpoints(apply_hard_caps(bounds_from_gamma(scale_covariance(p, beta), 0.1)));
    masks.push_back(frt_set(solve_frt(5.0, ep, g, 3.0)));
  }
  const std::size_t bad = cells_missing(masks[1], masks[0]) + cells_missing(masks[2], masks[1]);
  return {bad == 0 && masks[2].count() > 0 && masks[0].count() > masks[2].count(),
          fmt("cells %zu / %zu / %zu for beta 0.2 / 0.5 / 1, %zu violating", masks[0].count(), masks[1].count(),
              masks[2].count(), bad)};
}

// Criterion 3 ---------------------------------------------------------------------------

Outcome analytic_solves() {
  const GridSpec g = GridSpec::default_grid();
  const auto zero = ControlBoundsEndpoints::constant(Vec2::Zero(), Vec2::Zero());

  const ValueFunction still = solve_frt(0.0, zero, g, 3.0);
  std::size_t mismatched = 0;
  for (std::size_t i = 0; i < still.values.size(); ++i) {
    mismatched += (still.values[i] < 0.0f) != (still.l_values[i] < 0.0f);
  }

  const ValueFunction line = solve_frt(5.0, zero, g, 3.0);
  const OccupancyGrid2D k = project_positions(frt_set(line));
  const double cell = g.spacing(kDimX);
  std::size_t uncovered = 0;
  for (double x = 0.0; x <= 15.0 + 1e-9; x += 0.1) {
    bool near = false;
    for (int ix = 0; ix < k.nx && !near; ++ix) {
      for (int iy = 0; iy < k.ny && !near; ++iy) {
        const auto [cx, cy] = k.center(ix, iy);
        near = k.at(ix, iy) && std::abs(cx - x) <= cell + 1e-9 && std::abs(cy) <= cell + 1e-9;
      }
    }
    uncovered += !near;
  }
  std::size_t wide = 0;
  for (int ix = 0; ix < k.nx; ++ix) {
    for (int iy = 0; iy < k.ny; ++iy) {
      if (k.at(ix, iy) && std::abs(k.center(ix, iy).second) > 2.0 + cell + 1e-9) ++wide;
    }
  }
  return {mismatched == 0 && uncovered == 0 && wide == 0,
          fmt("still tube differs from {l<0} at %zu nodes; line: %zu uncovered samples, %zu cells beyond |y|=%.1f",
              mismatched, uncovered, wide, 2.0 + cell)};
}

// Criterion 4 ---------------------------------------------------------------------------

Outcome bayes_closed_forms() {
  const ConfidenceBelief prior = initial_belief(0.2, 0.05);
  const Mat2 sigma = Vec2(0.3, 1.7).asDiagonal();
  const Vec2 mu(0.4, -1.1);
  const ConfidenceBelief post = bayes_update(prior, {mu[0], mu[1]}, mu, sigma);
  const double err_b = std::abs(post.b_high - 1.0 / 1.2);
  // Independent value: (0.2 + 1 / 1.2 * 0.8) = 0.2 * (1 - 1/1.2) + 1 / 1.2.
  const double err_beta = std::abs(effective_beta(post) - (0.2 / 6.0 + 5.0 / 6.0));

  testing::Rng rng(99);
  ConfidenceBelief b = prior;
  std::size_t bad = 0;
  for (int n = 0; n < 1000000; ++n) {
    if (n % 1000 == 0) b = prior;
    const Vec2 m(rng.uniform(-2, 2), rng.uniform(-5, 5));
    const double s1 = rng.uniform(0.01, 4.0), s2 = rng.uniform(0.01, 4.0), c = rng.uniform(-0.9, 0.9);
    Mat2 s;
    s << s1 * s1, c * s1 * s2, c * s1 * s2, s2 * s2;
    const ControlInput u{rng.uniform(-20, 20), rng.uniform(-20, 20)};
    b = bayes_update(rng.coin() ? epsilon_static(b) : b, u, m, s);
    const bool ok = std::isfinite(b.b_low) && std::isfinite(b.b_high) && b.b_low >= 0.0 && b.b_high >= 0.0 &&
                    std::abs(b.b_low + b.b_high - 1.0) <= 1e-12;
    bad += !ok;
  }
  return {err_b <= 1e-9 && err_beta <= 1e-9 && bad == 0,
          fmt("posterior %.12f (err %.1e), effective beta %.12f (err %.1e), %zu off-simplex in 1e6 updates",
              post.b_high, err_b, effective_beta(post), err_beta, bad)};
}

// Criterion 5 ---------------------------------------------------------------------------

double normal_pdf(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

Outcome gamma_trimming() {
  testing::Rng rng(5);
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const Vec2 mu(rng.uniform(-2, 2), rng.uniform(-6, 6));
    const Vec2 sd(rng.uniform(0.05, 3.0), rng.uniform(0.05, 3.0));
    const double beta = rng.uniform(0.05, 1.0), gamma = rng.uniform(0.01, 0.99);
    GaussianControlPrediction p;
    p.means = {mu};
    p.covariances = {Mat2(sd.cwiseAbs2().asDiagonal())};
    const ControlBounds cb = bounds_from_gamma(scale_covariance(p, beta), gamma);
    for (int d = 0; d < 2; ++d) {
      const double s = sd[d] / std::sqrt(beta);
      const double mass = testing::simpson([&](double x) { return normal_pdf(x, mu[d], s); }, cb.lower[0][d],
                                           cb.upper[0][d], 4000);
      worst = std::max(worst, std::abs(mass - gamma));
    }
  }
  GaussianControlPrediction unit;
  unit.means = {Vec2::Zero()};
  unit.covariances = {Mat2::Identity()};
  const double delta = bounds_from_gamma(unit, 0.1).upper[0][0];
  return {worst <= 1e-6 && std::abs(delta - 0.12566) <= 1e-4,
          fmt("max |mass - gamma| %.1e over 100 cases, delta(0.1, 1) = %.6f", worst, delta)};
}

// Criteria 6 and 7 ----------------------------------------------------------------------

struct Braking {
  PlanCommand first;
  double detection_distance = 0.0;
  double overshoot = 0.0;  // stop position minus the line
  double duration = 0.0;
};

// Ego on the x axis approaching a line at x = 0, with a hazard reported from detect_step on.
Braking brake_after(double v0, double start, int detect_step, double a_max) {
  AgentState ego{-start, 0.0, 0.0, v0};
  Planner planner(a_max);
  Braking out;
  for (int k = 0; k < 40; ++k) {
    const bool hazard = k >= detect_step;
    const PlanCommand cmd = planner.decide(ego, hazard ? std::optional<double>(1.0) : std::nullopt, -ego.x);
    if (k == detect_step) {
      out.first = cmd;
      out.detection_distance = -ego.x;
    }
    for (int j = 0; j < 10; ++j) {
      if (cmd.acceleration < 0.0 && ego.v > 0.0) {
        out.duration += std::min(kSubStep, ego.v / -cmd.acceleration);
      }
      ego = step_ego(ego, cmd.acceleration, kSubStep);
    }
    if (hazard && ego.v == 0.0) break;
  }
  out.overshoot = ego.x;
  return out;
}

Outcome stop_sign_kinematics() {
  const Braking a = brake_after(23.0, 88.5, 6, 10.0);
  const Braking b = brake_after(23.0, 88.5, 7, 10.0);
  const bool ok = std::abs(a.detection_distance - 19.5) < 1e-9 && std::abs(a.overshoot - 6.9) <= 0.15 &&
                  std::abs(a.duration - 2.3) <= 0.25 && std::abs(b.detection_distance - 8.0) < 1e-9 &&
                  std::abs(b.overshoot - 18.4) <= 0.15;
  return {ok, fmt("detect at %.1f m: %s, %.2f m past the line after %.2f s; detect at %.1f m: %.2f m past",
                  a.detection_distance, to_string(a.first.reason), a.overshoot, a.duration, b.detection_distance,
                  b.overshoot)};
}

// Criteria 7 and 8 share the bundled runs.
struct BundledRuns {
  SimLog uturn_on, uturn_off, stop_on, stop_off;
  bool deterministic = false;
  std::string error;
};

std::string log_text(const SimLog& log) {
  const fs::path p = fs::temp_directory_path() / "reachguard_acceptance_log.json";
  write_log_json(p, log, metrics(log));
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  fs::remove(p);
  return s.str();
}

const BundledRuns& bundled() {
  static const BundledRuns runs = [] {
    BundledRuns r;
    try {
      const Scenario uturn = load_scenario(fs::path(REACHGUARD_SCENARIOS) / "uturn.json");
      const Scenario stop = load_scenario(fs::path(REACHGUARD_SCENARIOS) / "stop_sign.json");
      auto pass = [&](SimLog& u_on, SimLog& u_off, SimLog& s_on, SimLog& s_off) {
        TubeCache cache(256);
        SimOptions opt;
        opt.cache = &cache;
        opt.use_confidence = true;
        u_on = run(uturn, opt);
        s_on = run(stop, opt);
        opt.use_confidence = false;
        u_off = run(uturn, opt);
        s_off = run(stop, opt);
      };
      pass(r.uturn_on, r.uturn_off, r.stop_on, r.stop_off);
      SimLog a, b, c, d;
      pass(a, b, c, d);  // fresh cache: every tube solved again
      r.deterministic = log_text(a) == log_text(r.uturn_on) && log_text(b) == log_text(r.uturn_off) &&
                        log_text(c) == log_text(r.stop_on) && log_text(d) == log_text(r.stop_off);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    return r;
  }();
  return runs;
}

Outcome uturn_kinematics() {
  const Braking a = brake_after(26.0, 65.0, 2, 10.0);
  const Braking b = brake_after(26.0, 65.0, 3, 10.0);
  const BundledRuns& r = bundled();
  const bool ok = std::abs(a.detection_distance - 39.0) < 1e-9 && a.first.reason == PlanReason::kBrakeToLine &&
                  std::abs(-a.first.acceleration - 8.67) <= 0.1 && a.overshoot <= 1e-9 &&
                  std::abs(b.detection_distance - 26.0) < 1e-9 && b.first.reason == PlanReason::kMaxBrake &&
                  std::abs(b.duration - 2.6) <= 0.25 && b.overshoot > 0.0 && r.error.empty() &&
                  r.uturn_off.collision;
  return {ok, fmt("detect at %.0f m: %s at %.2f m/s^2, stops %.2f m before; detect at %.0f m: %s for %.2f s, "
                  "stops %.2f m past; bundled run without confidence collides: %s",
                  a.detection_distance, to_string(a.first.reason), -a.first.acceleration, -a.overshoot,
                  b.detection_distance, to_string(b.first.reason), b.duration, b.overshoot,
                  r.error.empty() ? (r.uturn_off.collision ? "yes" : "no") : r.error.c_str())};
}

Outcome bundled_scenarios() {
  const BundledRuns& r = bundled();
  if (!r.error.empty()) return {false, r.error};
  auto detect = [](const SimLog& l) {
    const auto t = metrics(l).detection_time;
    return t ? *t : std::numeric_limits<double>::infinity();
  };
  const double u_on = detect(r.uturn_on), u_off = detect(r.uturn_off);
  const double s_on = detect(r.stop_on), s_off = detect(r.stop_off);
  const bool earlier = u_on + 0.5 <= u_off + 1e-9 && s_on + 0.5 <= s_off + 1e-9;
  const bool ok = earlier && !r.uturn_on.collision && !r.stop_on.collision && r.uturn_off.collision &&
                  r.stop_off.collision && r.deterministic && r.uturn_on.violations == 0 && r.stop_on.violations == 0;
  return {ok, fmt("uturn detect %.1f vs %.1f s, collision %d/%d; stop_sign detect %.1f vs %.1f s, collision %d/%d; "
                  "violations %zu/%zu; deterministic %s",
                  u_on, u_off, r.uturn_on.collision, r.uturn_off.collision, s_on, s_off, r.stop_on.collision,
                  r.stop_off.collision, r.uturn_on.violations, r.stop_on.violations,
                  r.deterministic ? "yes" : "no")};
}

// Criterion 9 ---------------------------------------------------------------------------

Outcome family_correctness() {
  const GridSpec g = testing::small_grid();
  FamilyLattice l;
  l.knots = {{{1.0, 2.0, 3.0}, {-0.2, 0.0}, {-0.6, -0.3}, {0.0, 0.2}, {0.3, 0.6}, {-0.2}, {-0.6}, {0.2}, {0.6}}};
  const FrtFamily f = family_precompute(l, g, 2.0, serial());

  std::size_t differing = 0;
  const auto points = l.admissible_points();
  for (std::size_t i = 0; i < points.size(); i += 7) {
    const FrtKey key = l.key_at(l.unravel(points[i]));
    differing += family_query(f, key)->values != solve_frt(key, g, 2.0, serial()).values;
  }

  testing::Rng rng(909);
  std::size_t not_superset = 0;
  for (int n = 0; n < 20; ++n) {
    const FrtKey key{rng.uniform(1.0, 3.0),
                     ControlBoundsEndpoints::from_array({rng.uniform(-0.2, 0.0), rng.uniform(-0.6, -0.3),
                                                         rng.uniform(0.0, 0.2), rng.uniform(0.3, 0.6), -0.2, -0.6,
                                                         0.2, 0.6})};
    const TubeMask q = frt_set(*family_query(f, key));
    const TubeMask direct = frt_set(solve_frt(key, g, 2.0, serial()));
    not_superset += cells_missing(direct, q) != 0;
  }
  const std::size_t checked = (points.size() + 6) / 7;
  return {differing == 0 && not_superset == 0,
          fmt("%zu of %zu lattice keys differ from the direct solve; %zu of 20 off-lattice answers miss cells",
              differing, checked, not_superset)};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> check;
};

}  // namespace

// With arguments, runs only the listed criteria (1-based).
int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"Monte Carlo tube containment", monte_carlo_containment},
      {"confidence nesting of tubes", beta_nesting},
      {"analytic tubes", analytic_solves},
      {"Bayes filter closed forms", bayes_closed_forms},
      {"gamma trimming", gamma_trimming},
      {"stop-sign braking kinematics", stop_sign_kinematics},
      {"U-turn braking kinematics", uturn_kinematics},
      {"bundled scenarios end to end", bundled_scenarios},
      {"tube family correctness", family_correctness},
  };
  std::vector<bool> selected(criteria.size(), argc == 1);
  for (int a = 1; a < argc; ++a) {
    const int i = std::atoi(argv[a]);
    if (i < 1 || i > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "no criterion %s\n", argv[a]);
      return 2;
    }
    selected[i - 1] = true;
  }
  int failed = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    ++ran;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s  %zu  %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
