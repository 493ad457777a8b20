// reachguard: solve tubes, precompute families, replay scenarios, export results.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "reachguard/errors.hpp"
#include "reachguard/family_io.hpp"
#include "reachguard/render.hpp"
#include "reachguard/scenario.hpp"
#include "reachguard/sim.hpp"
#include "reachguard/tube_cache.hpp"
#include "reachguard/value_io.hpp"

namespace fs = std::filesystem;
using namespace reachguard;

namespace {

enum Exit { kOk = 0, kUsage = 2, kNumericalFailure = 3, kIoFailure = 4 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNumerical: return kNumericalFailure;
    case ErrorKind::kIo: return kIoFailure;
    default: return kUsage;
  }
}

struct GridFlags {
  std::string base = "default";
  std::vector<double> x, y, v;
  int theta = 0;

  void add(CLI::App* app) {
    app->add_option("--grid", base, "base grid: default or scenario")->check(CLI::IsMember({"default", "scenario"}));
    app->add_option("--grid-x", x, "x axis: lo hi nodes")->expected(3);
    app->add_option("--grid-y", y, "y axis: lo hi nodes")->expected(3);
    app->add_option("--grid-theta", theta, "heading nodes");
    app->add_option("--grid-v", v, "speed axis: lo hi nodes")->expected(3);
  }

  GridSpec resolve() const {
    GridSpec g = base == "scenario" ? default_scenario_grid() : GridSpec::default_grid();
    auto set = [](Axis& a, const std::vector<double>& f) {
      if (f.empty()) return;
      a.lo = f[0];
      a.hi = f[1];
      a.n = static_cast<int>(f[2]);
      if (a.n != f[2]) throw Error(ErrorKind::kArgument, "grid node counts must be integers");
    };
    set(g.axes[kDimX], x);
    set(g.axes[kDimY], y);
    set(g.axes[kDimV], v);
    if (theta > 0) g.axes[kDimTheta].n = theta;
    g.validate();
    return g;
  }
};

struct SolverFlags {
  int order = 2;
  std::string scheme = "godunov";
  double horizon = 3.0;
  int jobs = 0;

  void add(CLI::App* app) {
    app->add_option("--order", order, "1 or 2")->check(CLI::IsMember({1, 2}));
    app->add_option("--scheme", scheme, "godunov or lax-friedrichs")
        ->check(CLI::IsMember({"godunov", "lax-friedrichs"}));
    app->add_option("--horizon", horizon, "tube horizon, s");
    app->add_option("--jobs", jobs, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  }

  SolverOptions resolve() const {
    SolverOptions o;
    o.order = order;
    o.scheme = scheme == "godunov" ? NumericalHamiltonian::kGodunov : NumericalHamiltonian::kLaxFriedrichs;
    o.jobs = jobs;
    return o;
  }
};

void check_caps(const char* name, const std::vector<double>& b, double cap, const char* cap_name) {
  if (b[0] > b[1]) throw Error(ErrorKind::kArgument, std::string(name) + ": lower bound exceeds upper bound");
  for (double x : b) {
    if (std::abs(x) > cap) {
      throw Error(ErrorKind::kArgument, std::string(name) + " bound " + std::to_string(x) + " exceeds the " +
                                            cap_name + " cap of " + std::to_string(cap));
    }
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
}

// ---- solve ----

struct SolveCmd {
  double v_start = 0.0;
  std::vector<double> u1, u2, u1_end, u2_end;
  double threshold = 0.0;
  std::string out = "out/solve";
  GridFlags grid;
  SolverFlags solver;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("solve", "solve one forward reachable tube");
    c->add_option("--v-start", v_start, "initial speed, m/s")->required();
    c->add_option("--u1", u1, "steering-rate bounds at the start: lo hi")->expected(2)->required();
    c->add_option("--u2", u2, "acceleration bounds at the start: lo hi")->expected(2)->required();
    c->add_option("--u1-end", u1_end, "steering-rate bounds at the end (default: same as start)")->expected(2);
    c->add_option("--u2-end", u2_end, "acceleration bounds at the end (default: same as start)")->expected(2);
    c->add_option("--threshold", threshold, "level for the tube, m");
    c->add_option("--out", out, "output directory");
    grid.add(c);
    solver.add(c);
    c->callback([this] { run(); });
  }

  void run() {
    const HardCaps caps;
    if (u1_end.empty()) u1_end = u1;
    if (u2_end.empty()) u2_end = u2;
    check_caps("--u1", u1, caps.steering_rate, "steering-rate");
    check_caps("--u2", u2, caps.acceleration, "acceleration");
    check_caps("--u1-end", u1_end, caps.steering_rate, "steering-rate");
    check_caps("--u2-end", u2_end, caps.acceleration, "acceleration");
    const GridSpec g = grid.resolve();
    const SolverOptions opt = solver.resolve();
    const FrtKey key{v_start, ControlBoundsEndpoints::from_array(
                                  {u1[0], u2[0], u1[1], u2[1], u1_end[0], u2_end[0], u1_end[1], u2_end[1]})};
    ensure_dir(out);
    const auto t0 = std::chrono::steady_clock::now();
    const ValueFunction vf = solve_frt(key, g, solver.horizon, opt);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const TubeMask mask = frt_set(vf, threshold);
    const OccupancyGrid2D k = project_positions(mask);
    write_value_function(fs::path(out) / "value.frtv", vf);
    write_mask_csv(fs::path(out) / "k.csv", k);
    write_text(fs::path(out) / "k.svg", mask_svg(k, describe_key(key)));
    std::printf("key          %s\n", describe_key(key).c_str());
    std::printf("grid         %s\n", g.describe().c_str());
    std::printf("tube cells   %zu (of %zu)\n", mask.count(), g.size());
    std::printf("position     %zu cells\n", k.count());
    std::printf("runtime      %.2f s\n", secs);
    std::printf("wrote        %s/{value.frtv,k.csv,k.svg}\n", out.c_str());
  }
};

// ---- simulate ----

struct SimulateCmd {
  std::string scenario;
  bool confidence = true;
  std::string out;
  std::optional<double> threshold, beta_low, gamma, epsilon, r_col, a_max;
  std::string family;
  int jobs = 0;
  int seed = 0;
  bool frames = true;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("simulate", "replay a scenario in closed loop");
    c->add_option("scenario", scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
    c->add_flag("--confidence,!--no-confidence", confidence, "use the confidence-aware predictor (default on)");
    c->add_option("--out", out, "output directory (default out/<scenario>-<on|off>)");
    c->add_option("--threshold", threshold, "tube level, m");
    c->add_option("--beta-low", beta_low, "low confidence value");
    c->add_option("--gamma", gamma, "probability mass kept by the bounds");
    c->add_option("--epsilon", epsilon, "belief mixing rate");
    c->add_option("--r-col", r_col, "collision radius, m");
    c->add_option("--a-max", a_max, "ego braking limit, m/s^2");
    c->add_option("--family", family, "family manifest to query before solving")->check(CLI::ExistingFile);
    c->add_option("--jobs", jobs, "solver threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    c->add_option("--seed", seed, "seed (the replay itself draws no random numbers)");
    c->add_flag("!--no-frames", frames, "skip the per-step SVG frames");
    c->callback([this] { run(); });
  }

  void run() {
    Scenario sc = load_scenario(scenario);
    auto& p = sc.params;
    if (threshold) p.tube_threshold = *threshold;
    if (beta_low) p.beta_low = *beta_low;
    if (gamma) p.gamma = *gamma;
    if (epsilon) p.epsilon = *epsilon;
    if (r_col) p.r_col = *r_col;
    if (a_max) p.a_max = *a_max;
    sc.validate();

    const fs::path dir = out.empty() ? fs::path("out") / (sc.name + (confidence ? "-on" : "-off")) : fs::path(out);
    ensure_dir(dir);
    if (frames) ensure_dir(dir / "frames");

    std::optional<FrtFamily> fam;
    if (!family.empty()) fam = load_family(family);
    TubeCache cache = TubeCache::from_environment();
    SimOptions opt;
    opt.use_confidence = confidence;
    opt.cache = &cache;
    opt.family = fam ? &*fam : nullptr;
    opt.solver.jobs = jobs;
    if (frames) {
      opt.on_frame = [&](const SimFrame& f) {
        char name[32];
        std::snprintf(name, sizeof name, "step_%03zu.svg", f.step.index);
        write_text(dir / "frames" / name, frame_svg(f));
      };
    }
    const SimLog log = run_sim(sc, opt);
    const SimMetrics m = metrics(log);
    write_log_json(dir / "log.json", log, m);
    write_log_csv(dir / "log.csv", log);
    write_belief_csv(dir / "belief.csv", log);

    auto opt_num = [](const std::optional<double>& v, const char* unit) {
      char buf[48];
      if (!v) return std::string("none");
      std::snprintf(buf, sizeof buf, "%.2f %s", *v, unit);
      return std::string(buf);
    };
    std::printf("scenario            %s (confidence %s)\n", sc.name.c_str(), confidence ? "on" : "off");
    std::printf("detection time      %s\n", opt_num(m.detection_time, "s").c_str());
    std::printf("detection distance  %s\n", opt_num(m.detection_distance, "m").c_str());
    std::printf("first command       %s\n", m.first_brake ? to_string(*m.first_brake) : "nominal");
    std::printf("braking duration    %.2f s\n", m.braking_duration);
    std::printf("stop offset         %.2f m (%s the line)\n", m.stop_offset, m.stop_offset > 0.0 ? "past" : "before");
    std::printf("min separation      %.2f m\n", m.min_separation);
    std::printf("collision           %s\n", m.collision ? "yes" : "no");
    std::printf("containment misses  %zu\n", m.violations);
    std::printf("tube cache          %zu hits, %zu misses\n", cache.hits(), cache.misses());
    std::printf("wrote               %s\n", dir.string().c_str());
  }

  static SimLog run_sim(const Scenario& sc, const SimOptions& opt) { return reachguard::run(sc, opt); }
};

// ---- precompute ----

struct PrecomputeCmd {
  std::string out = "out/family";
  std::vector<double> v, u1_lo, u1_hi, u2_lo, u2_hi, u1_lo_end, u1_hi_end, u2_lo_end, u2_hi_end;
  GridFlags grid;
  SolverFlags solver;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("precompute", "solve a lattice of tubes into a directory (resumable)");
    c->add_option("--out", out, "family directory");
    c->add_option("--v-knots", v, "start-speed knots")->required();
    c->add_option("--u1-lo-knots", u1_lo, "steering-rate lower-bound knots")->required();
    c->add_option("--u1-hi-knots", u1_hi, "steering-rate upper-bound knots")->required();
    c->add_option("--u2-lo-knots", u2_lo, "acceleration lower-bound knots")->required();
    c->add_option("--u2-hi-knots", u2_hi, "acceleration upper-bound knots")->required();
    c->add_option("--u1-lo-end-knots", u1_lo_end, "end-of-horizon knots (default: the start knots)");
    c->add_option("--u1-hi-end-knots", u1_hi_end, "");
    c->add_option("--u2-lo-end-knots", u2_lo_end, "");
    c->add_option("--u2-hi-end-knots", u2_hi_end, "");
    grid.add(c);
    solver.add(c);
    c->callback([this] { run(); });
  }

  void run() {
    FamilyLattice lat;
    auto pick = [](const std::vector<double>& end, const std::vector<double>& start) { return end.empty() ? start : end; };
    lat.knots = {v, u1_lo, u2_lo, u1_hi, u2_hi, pick(u1_lo_end, u1_lo), pick(u2_lo_end, u2_lo), pick(u1_hi_end, u1_hi),
                 pick(u2_hi_end, u2_hi)};
    lat.validate();
    const HardCaps caps;
    for (int d = 1; d < kFamilyAxes; ++d) {
      const bool steering = (d - 1) % 2 == 0;
      check_caps("lattice knot", {lat.knots[d].front(), lat.knots[d].front()},
                 steering ? caps.steering_rate : caps.acceleration, steering ? "steering-rate" : "acceleration");
      check_caps("lattice knot", {lat.knots[d].back(), lat.knots[d].back()},
                 steering ? caps.steering_rate : caps.acceleration, steering ? "steering-rate" : "acceleration");
    }
    const GridSpec g = grid.resolve();
    const SolverOptions opt = solver.resolve();
    const auto t0 = std::chrono::steady_clock::now();
    const PrecomputeReport r = precompute_to_directory(lat, g, solver.horizon, opt, out,
                                                       [](std::size_t done, std::size_t total, const FrtKey& key) {
                                                         std::fprintf(stderr, "[%zu/%zu] %s\n", done, total,
                                                                      describe_key(key).c_str());
                                                       });
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("lattice points  %zu admissible of %zu\n", r.total, lat.size());
    std::printf("solved          %zu\n", r.solved);
    std::printf("already present %zu\n", r.skipped);
    std::printf("runtime         %.1f s\n", secs);
    std::printf("manifest        %s\n", (fs::path(out) / "manifest.json").string().c_str());
  }
};

// ---- export ----

struct ExportCmd {
  std::string value;
  std::string slice_csv, mask_csv, svg;
  double theta = 0.0, v = 0.0, threshold = 0.0;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("export", "convert a value file to CSV / SVG");
    c->add_option("value", value, "value file written by solve or precompute")->required()->check(CLI::ExistingFile);
    c->add_option("--slice-csv", slice_csv, "write the (theta, v) slice as x,y,value rows");
    c->add_option("--theta", theta, "slice heading, rad");
    c->add_option("--v", v, "slice speed, m/s");
    c->add_option("--mask-csv", mask_csv, "write the position projection of the tube");
    c->add_option("--svg", svg, "draw the position projection");
    c->add_option("--threshold", threshold, "tube level, m");
    c->callback([this] { run(); });
  }

  void run() {
    const ValueFunction vf = read_value_function(value);
    const OccupancyGrid2D k = project_positions(frt_set(vf, threshold));
    if (!slice_csv.empty()) write_slice_csv(slice_csv, vf, theta, v);
    if (!mask_csv.empty()) write_mask_csv(mask_csv, k);
    if (!svg.empty()) write_text(svg, mask_svg(k, describe_key(vf.key)));
    std::printf("key        %s\n", describe_key(vf.key).c_str());
    std::printf("grid       %s\n", vf.grid.describe().c_str());
    std::printf("position   %zu cells\n", k.count());
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confidence-aware reachability for safe driving"};
  app.require_subcommand(1);
  SolveCmd solve;
  SimulateCmd simulate;
  PrecomputeCmd precompute;
  ExportCmd exporter;
  solve.add(app);
  simulate.add(app);
  precompute.add(app);
  exporter.add(app);
  set_warning_sink([](std::string_view msg) { std::fprintf(stderr, "warning: %.*s\n", static_cast<int>(msg.size()), msg.data()); });
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIoFailure;
  }
  return kOk;
}
