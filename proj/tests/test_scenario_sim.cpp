#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "reachguard/errors.hpp"
#include "reachguard/scenario.hpp"
#include "reachguard/sim.hpp"
#include "support.hpp"

using namespace reachguard;

namespace {

// Ego heading for a line at x = 0; the human sits in a side street.
const char* kScenario = R"({
  "name": "side_street",
  "dt": 0.5,
  "duration": 2.0,
  "ego": {"state": {"x": -40, "y": 0, "theta": 0, "v": 10}, "lane": {"origin": [0, 0], "heading": 0}, "stop_line": 0},
  "human": {"state": {"x": 5, "y": -30, "theta": 1.5707963267948966, "v": 0}, "controls": [[0, 0], [0, 0], [0, 0], [0, 0]]},
  "predictor": {"type": "synthetic", "sigma": [0.2, 0.5]},
  "params": {"beta_low": 0.2, "gamma": 0.1, "epsilon": 0.05, "r_col": 4.5, "a_max": 10, "horizon": 1.0},
  "grid": {"x": [-4, 12, 17], "y": [-6, 6, 13], "theta": 33, "v": [-2, 8, 21]}
})";

Scenario with_human(double x, double y, double theta) {
  Scenario s = parse_scenario(kScenario);
  s.human = {x, y, theta, 0.0};
  return s;
}

std::string error_of(const std::string& text) {
  try {
    parse_scenario(text, "test");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kScenarioFormat);
    return e.what();
  }
  return "";
}

SimOptions serial() {
  SimOptions o;
  o.solver.jobs = 1;
  return o;
}

}  // namespace

TEST_CASE("scenario parsing and round trip") {
  const Scenario s = parse_scenario(kScenario);
  CHECK(s.name == "side_street");
  CHECK(s.steps() == 4);
  CHECK(s.predictions.horizon_steps == 2);
  CHECK(s.grid.axes[kDimX].n == 17);
  const Scenario back = parse_scenario(scenario_to_json(s));
  CHECK(back.human_controls == s.human_controls);
  CHECK(back.grid == s.grid);
  CHECK(back.ego == s.ego);
  CHECK(back.params.horizon == s.params.horizon);
}

TEST_CASE("schema errors name the JSON pointer") {
  std::string t = kScenario;
  CHECK(error_of(t.replace(t.find("\"v\": 10"), 7, "\"v\": \"x\"")).find("/ego/state/v") != std::string::npos);
  t = kScenario;
  CHECK(error_of(t.replace(t.find("[0, 0], [0, 0], [0, 0], [0, 0]"), 30, "[0, 0], [0, 0]")).find("/human/controls") !=
        std::string::npos);
  t = kScenario;
  CHECK(error_of(t.replace(t.find("[0, 0], [0, 0], [0, 0], [0, 0]"), 30, "[0, 0], [0], [0, 0], [0, 0]"))
            .find("/human/controls/1") != std::string::npos);
  t = kScenario;
  CHECK(error_of(t.replace(t.find("\"gamma\": 0.1"), 12, "\"gamma\": 1.5")).find("/params/gamma") != std::string::npos);
  CHECK(error_of("{oops").find("malformed JSON") != std::string::npos);
  CHECK(error_of(R"({"name": "x"})").find("/dt") != std::string::npos);
}

TEST_CASE("a distant human triggers nothing") {
  const SimLog log = run(parse_scenario(kScenario), serial());
  const SimMetrics m = metrics(log);
  CHECK_FALSE(m.detection_distance);
  CHECK(m.braking_duration == 0.0);
  CHECK_FALSE(m.collision);
  CHECK(log.final_ego.x == doctest::Approx(-20.0));
  for (const auto& st : log.steps) CHECK(st.command.reason == PlanReason::kNominal);
}

TEST_CASE("a human in the lane ahead forces braking to the line") {
  const SimLog log = run(with_human(-24.0, 0.0, M_PI), serial());
  const SimMetrics m = metrics(log);
  REQUIRE(m.detection_distance);
  CHECK(*m.detection_distance == doctest::Approx(40.0));
  CHECK(*m.first_brake == PlanReason::kBrakeToLine);
  CHECK(log.steps[0].command.acceleration == doctest::Approx(-100.0 / 80.0));
}

TEST_CASE("replays are deterministic") {
  const Scenario s = with_human(12.0, -6.0, M_PI / 2);
  std::stringstream a, b;
  const SimLog l1 = run(s, serial()), l2 = run(s, serial());
  REQUIRE(l1.steps.size() == l2.steps.size());
  for (std::size_t k = 0; k < l1.steps.size(); ++k) {
    CHECK(l1.steps[k].beta == l2.steps[k].beta);
    CHECK(l1.steps[k].ego == l2.steps[k].ego);
    CHECK(l1.steps[k].tube_cells == l2.steps[k].tube_cells);
    CHECK(l1.steps[k].containment_value == l2.steps[k].containment_value);
  }
}

TEST_CASE("without confidence the belief machinery is bypassed") {
  Scenario s = parse_scenario(kScenario);
  s.human_controls = {{0.5, 1.0}, {0.5, 1.0}, {0.5, 1.0}, {0.5, 1.0}};
  SimOptions o = serial();
  o.use_confidence = false;
  const SimLog off = run(s, o);
  for (const auto& st : off.steps) {
    CHECK(st.beta == 1.0);
    CHECK(st.belief.b_low == 0.5);
  }
  o.use_confidence = true;
  const SimLog on = run(s, o);
  CHECK(on.steps.back().beta < 0.5);  // controls far from the zero-mean prediction
  CHECK(on.steps.back().tube_cells >= off.steps.back().tube_cells);
}

TEST_CASE("following the predicted mean keeps confidence high") {
  const SimLog log = run(parse_scenario(kScenario), serial());
  CHECK(log.steps[1].beta > log.steps[0].beta);
  CHECK(log.steps.back().beta > 0.85);
  CHECK(log.violations == 0);
}

TEST_CASE("stage errors carry the step index") {
  Scenario s = parse_scenario(kScenario);
  s.grid.axes[kDimV] = {-2.0, 8.0, 11, false};  // speed cells too coarse for the initial set
  try {
    run(s, serial());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("step 0, stage 'tube'") != std::string::npos);
  }
}

TEST_CASE("log exports") {
  const SimLog log = run(parse_scenario(kScenario), serial());
  const auto dir = std::filesystem::temp_directory_path();
  write_log_json(dir / "rg_log.json", log, metrics(log));
  write_log_csv(dir / "rg_log.csv", log);
  write_belief_csv(dir / "rg_belief.csv", log);
  std::ifstream csv(dir / "rg_belief.csv");
  std::string line;
  int rows = -1;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 4);
  CHECK(std::filesystem::file_size(dir / "rg_log.json") > 100);
}

TEST_CASE("tube cache quantizes outward and reuses solves") {
  const FrtKey key{1.0, ControlBoundsEndpoints::from_array({-0.123, -0.5, 0.121, 0.5, -0.2, -0.5, 0.2, 0.5})};
  const FrtKey q = quantize_key(key, 0.01);
  CHECK(q.endpoints.min_start[0] == doctest::Approx(-0.13));
  CHECK(q.endpoints.max_start[0] == doctest::Approx(0.13));
  CHECK(q.endpoints.max_end[0] == doctest::Approx(0.2));
  CHECK(q.v_start == 1.0);
  TubeCache cache(2);
  SolverOptions o;
  o.jobs = 1;
  const auto a = cache.get(key, testing::small_grid(), 1.0, o);
  const auto b = cache.get(key, testing::small_grid(), 1.0, o);
  CHECK(a.origin == TubeOrigin::kSolve);
  CHECK(b.origin == TubeOrigin::kMemory);
  CHECK(a.tube == b.tube);
  const auto dir = std::filesystem::temp_directory_path() / "rg_cache_test";
  std::filesystem::remove_all(dir);
  TubeCache disk(2, dir);
  disk.get(key, testing::small_grid(), 1.0, o);
  TubeCache fresh(2, dir);
  const auto c = fresh.get(key, testing::small_grid(), 1.0, o);
  CHECK(c.origin == TubeOrigin::kDisk);
  CHECK(c.tube->values == a.tube->values);
  std::filesystem::remove_all(dir);
}
