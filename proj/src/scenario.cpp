#include "reachguard/scenario.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "reachguard/errors.hpp"

namespace reachguard {

using nlohmann::json;

namespace {

// A JSON value together with its pointer, so errors can name the location.
class Node {
 public:
  Node(const json& j, std::string ptr, const std::string& source) : j_(j), ptr_(std::move(ptr)), source_(source) {}

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorKind::kScenarioFormat,
                source_ + ": " + (ptr_.empty() ? std::string("/") : ptr_) + ": " + why);
  }

  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  Node operator[](const std::string& key) const {
    if (!j_.is_object()) fail("expected an object");
    if (!j_.contains(key)) Node(j_, ptr_ + "/" + key, source_).fail("missing required field");
    return Node(j_.at(key), ptr_ + "/" + key, source_);
  }

  Node operator[](std::size_t i) const {
    if (!j_.is_array()) fail("expected an array");
    if (i >= j_.size()) Node(j_, ptr_ + "/" + std::to_string(i), source_).fail("missing element");
    return Node(j_.at(i), ptr_ + "/" + std::to_string(i), source_);
  }

  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  double number_or(const std::string& key, double fallback) const {
    return has(key) ? (*this)[key].number() : fallback;
  }

  int integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<int>();
  }

  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  Vec2 vec2() const {
    if (size() != 2) fail("expected 2 numbers");
    return Vec2((*this)[0].number(), (*this)[1].number());
  }

  Mat2 mat2() const {
    if (size() != 2) fail("expected a 2x2 matrix");
    Mat2 m;
    for (std::size_t r = 0; r < 2; ++r) {
      const Node row = (*this)[r];
      if (row.size() != 2) row.fail("expected 2 numbers");
      m(r, 0) = row[0].number();
      m(r, 1) = row[1].number();
    }
    return m;
  }

  AgentState state() const {
    return {(*this)["x"].number(), (*this)["y"].number(), (*this)["theta"].number(),
            (*this)["v"].number()};
  }

  const std::string& ptr() const { return ptr_; }

 private:
  const json& j_;
  std::string ptr_;
  const std::string& source_;
};

Axis parse_axis(const Node& n) {
  if (n.size() != 3) n.fail("expected [lo, hi, nodes]");
  return {n[0].number(), n[1].number(), n[2].integer(), false};
}

json state_json(const AgentState& s) { return {{"x", s.x}, {"y", s.y}, {"theta", s.theta}, {"v", s.v}}; }

}  // namespace

GridSpec default_scenario_grid() {
  GridSpec g;
  g.axes[kDimX] = {-10.0, 30.0, 41, false};
  g.axes[kDimY] = {-20.0, 20.0, 41, false};
  g.axes[kDimTheta] = {-M_PI, M_PI, 33, true};
  g.axes[kDimV] = {-4.0, 16.0, 26, false};
  return g;
}

std::size_t Scenario::steps() const {
  return static_cast<std::size_t>(std::floor(duration / dt + 1e-9));
}

void Scenario::validate() const {
  auto fail = [&](const std::string& where, const std::string& why) {
    throw Error(ErrorKind::kScenarioFormat, "scenario '" + name + "': " + where + ": " + why);
  };
  if (!(dt > 0.0)) fail("/dt", "must be positive");
  if (!(duration > 0.0)) fail("/duration", "must be positive");
  if (!(ego.v >= 0.0)) fail("/ego/state/v", "ego speed must be non-negative");
  if (human_controls.size() < steps()) {
    fail("/human/controls", "covers " + std::to_string(human_controls.size()) + " steps, duration needs " +
                                std::to_string(steps()));
  }
  const auto& p = params;
  if (!(p.beta_low > 0.0 && p.beta_low < 1.0)) fail("/params/beta_low", "must lie in (0, 1)");
  if (!(p.gamma > 0.0 && p.gamma < 1.0)) fail("/params/gamma", "must lie in (0, 1)");
  if (!(p.epsilon >= 0.0 && p.epsilon <= 1.0)) fail("/params/epsilon", "must lie in [0, 1]");
  if (!(p.r_col >= 0.0)) fail("/params/r_col", "must be non-negative");
  if (!(p.a_max > 0.0)) fail("/params/a_max", "must be positive");
  if (!(p.horizon > 0.0)) fail("/params/horizon", "must be positive");
  if (!(p.tube_threshold >= 0.0)) fail("/params/tube_threshold", "must be non-negative");
  const double n = p.horizon / dt;
  if (std::abs(n - std::round(n)) > 1e-9 || std::round(n) < 2) {
    fail("/params/horizon", "must be at least two macro-steps long");
  }
  if (!predictions.synthetic) {
    if (predictions.table.size() < steps()) {
      fail("/predictions", "covers " + std::to_string(predictions.table.size()) + " steps, duration needs " +
                               std::to_string(steps()));
    }
    for (std::size_t k = 0; k < predictions.table.size(); ++k) {
      const auto& pr = predictions.table[k];
      if (pr.steps() != predictions.horizon_steps) {
        fail("/predictions/" + std::to_string(k), "needs " + std::to_string(predictions.horizon_steps) +
                                                      " steps (horizon / dt)");
      }
      try {
        pr.validate();
      } catch (const Error& e) {
        fail("/predictions/" + std::to_string(k), e.what());
      }
    }
  }
  try {
    grid.validate();
  } catch (const Error& e) {
    fail("/grid", e.what());
  }
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kScenarioFormat, source + ": malformed JSON: " + e.what());
  }
  const Node root(doc, "", source);
  Scenario s;
  s.name = root["name"].string();
  s.dt = root["dt"].number();
  if (!(s.dt > 0.0)) root["dt"].fail("must be positive");
  s.duration = root["duration"].number();

  const Node ego = root["ego"];
  s.ego = ego["state"].state();
  if (ego.has("lane")) {
    const Node lane = ego["lane"];
    const Vec2 o = lane["origin"].vec2();
    s.lane = {o[0], o[1], lane["heading"].number()};
  }
  s.stop_line = ego["stop_line"].number();

  const Node human = root["human"];
  s.human = human["state"].state();
  const Node controls = human["controls"];
  for (std::size_t k = 0; k < controls.size(); ++k) {
    const Vec2 u = controls[k].vec2();
    s.human_controls.push_back({u[0], u[1]});
  }

  if (root.has("params")) {
    const Node p = root["params"];
    auto& q = s.params;
    q.beta_low = p.number_or("beta_low", q.beta_low);
    q.gamma = p.number_or("gamma", q.gamma);
    q.epsilon = p.number_or("epsilon", q.epsilon);
    q.r_col = p.number_or("r_col", q.r_col);
    q.a_max = p.number_or("a_max", q.a_max);
    q.horizon = p.number_or("horizon", q.horizon);
    q.tube_threshold = p.number_or("tube_threshold", q.tube_threshold);
  }
  s.predictions.dt = s.dt;
  s.predictions.horizon_steps = static_cast<std::size_t>(std::llround(s.params.horizon / s.dt));

  if (root.has("predictions") == root.has("predictor")) {
    root.fail("exactly one of 'predictions' and 'predictor' is required");
  }
  if (root.has("predictor")) {
    const Node p = root["predictor"];
    if (p["type"].string() != "synthetic") p["type"].fail("only 'synthetic' is supported");
    s.predictions.synthetic = SyntheticPredictor{p["sigma"].vec2()};
  } else {
    const Node preds = root["predictions"];
    for (std::size_t k = 0; k < preds.size(); ++k) {
      const Node pk = preds[k];
      GaussianControlPrediction g;
      g.dt = s.dt;
      const Node means = pk["means"];
      const Node covs = pk["covariances"];
      if (means.size() != covs.size()) covs.fail("length differs from means");
      for (std::size_t i = 0; i < means.size(); ++i) {
        g.means.push_back(means[i].vec2());
        g.covariances.push_back(covs[i].mat2());
      }
      s.predictions.table.push_back(std::move(g));
    }
  }

  s.grid = default_scenario_grid();
  if (root.has("grid")) {
    const Node g = root["grid"];
    if (g.has("x")) s.grid.axes[kDimX] = parse_axis(g["x"]);
    if (g.has("y")) s.grid.axes[kDimY] = parse_axis(g["y"]);
    if (g.has("theta")) s.grid.axes[kDimTheta].n = g["theta"].integer();
    if (g.has("v")) s.grid.axes[kDimV] = parse_axis(g["v"]);
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open scenario " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["dt"] = s.dt;
  j["duration"] = s.duration;
  j["ego"] = {{"state", state_json(s.ego)},
              {"lane", {{"origin", {s.lane.origin_x, s.lane.origin_y}}, {"heading", s.lane.heading}}},
              {"stop_line", s.stop_line}};
  json controls = json::array();
  for (const auto& u : s.human_controls) controls.push_back({u.u1, u.u2});
  j["human"] = {{"state", state_json(s.human)}, {"controls", controls}};
  if (s.predictions.synthetic) {
    const Vec2& sg = s.predictions.synthetic->sigma;
    j["predictor"] = {{"type", "synthetic"}, {"sigma", {sg[0], sg[1]}}};
  } else {
    json preds = json::array();
    for (const auto& p : s.predictions.table) {
      json means = json::array(), covs = json::array();
      for (std::size_t i = 0; i < p.steps(); ++i) {
        means.push_back({p.means[i][0], p.means[i][1]});
        const Mat2& c = p.covariances[i];
        covs.push_back({{c(0, 0), c(0, 1)}, {c(1, 0), c(1, 1)}});
      }
      preds.push_back({{"means", means}, {"covariances", covs}});
    }
    j["predictions"] = preds;
  }
  const auto& p = s.params;
  j["params"] = {{"beta_low", p.beta_low}, {"gamma", p.gamma},   {"epsilon", p.epsilon},
                 {"r_col", p.r_col},       {"a_max", p.a_max},   {"horizon", p.horizon},
                 {"tube_threshold", p.tube_threshold}};
  const auto& ax = s.grid.axes;
  j["grid"] = {{"x", {ax[0].lo, ax[0].hi, ax[0].n}},
               {"y", {ax[1].lo, ax[1].hi, ax[1].n}},
               {"theta", ax[2].n},
               {"v", {ax[3].lo, ax[3].hi, ax[3].n}}};
  return j.dump(2) + "\n";
}

}  // namespace reachguard
