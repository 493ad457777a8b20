#include <cmath>
#include <numbers>

#include "doctest.h"
#include "reachguard/errors.hpp"
#include "reachguard/prediction.hpp"
#include "support.hpp"

using namespace reachguard;

namespace {

GaussianControlPrediction constant_prediction(const Vec2& mu, const Mat2& cov, std::size_t n = 6) {
  GaussianControlPrediction p;
  p.means.assign(n, mu);
  p.covariances.assign(n, cov);
  return p;
}

double normal_pdf(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

TEST_CASE("erfinv inverts erf") {
  testing::Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double y = rng.uniform(-0.999999, 0.999999);
    CHECK(std::erf(erfinv(y)) == doctest::Approx(y).epsilon(1e-14));
  }
  CHECK(erfinv(0.0) == 0.0);
  CHECK(std::isinf(erfinv(1.0)));
  CHECK_THROWS_AS(erfinv(1.5), Error);
}

TEST_CASE("gamma 0.1 with unit spread gives a half-width of 0.12566") {
  const auto b = bounds_from_gamma(constant_prediction(Vec2(0, 0), Mat2::Identity()), 0.1);
  CHECK(b.upper[0][0] == doctest::Approx(0.12566).epsilon(1e-4));
  CHECK(b.lower[0][1] == doctest::Approx(-0.12566).epsilon(1e-4));
}

TEST_CASE("trimmed interval holds mass gamma of the scaled marginal (quadrature oracle)") {
  testing::Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const double mu = rng.uniform(-2.0, 2.0);
    const double sd = rng.uniform(0.05, 3.0);
    const double beta = rng.uniform(0.1, 1.0);
    const double gamma = rng.uniform(0.01, 0.99);
    Mat2 cov = Mat2::Identity();
    cov(0, 0) = sd * sd;
    const auto scaled = scale_covariance(constant_prediction(Vec2(mu, 0.0), cov, 2), beta);
    const auto b = bounds_from_gamma(scaled, gamma);
    const double lo = b.lower[0][0], hi = b.upper[0][0];
    CHECK(0.5 * (lo + hi) == doctest::Approx(mu));
    const double mass = testing::simpson([&](double x) { return normal_pdf(x, mu, sd / std::sqrt(beta)); }, lo, hi);
    CHECK(std::abs(mass - gamma) < 1e-6);
  }
}

TEST_CASE("lower confidence widens the bounds") {
  Mat2 cov;
  cov << 0.04, 0.0, 0.0, 1.0;
  const auto p = constant_prediction(Vec2(0.1, -0.5), cov);
  const auto wide = bounds_from_gamma(scale_covariance(p, 0.2), 0.1);
  const auto mid = bounds_from_gamma(scale_covariance(p, 0.5), 0.1);
  const auto tight = bounds_from_gamma(p, 0.1);
  for (int d = 0; d < 2; ++d) {
    CHECK(wide.lower[0][d] < mid.lower[0][d]);
    CHECK(mid.lower[0][d] < tight.lower[0][d]);
    CHECK(wide.upper[0][d] > mid.upper[0][d]);
    CHECK(mid.upper[0][d] > tight.upper[0][d]);
    // Half-width scales as 1 / sqrt(beta).
    const double w1 = tight.upper[0][d] - tight.lower[0][d];
    const double w02 = wide.upper[0][d] - wide.lower[0][d];
    CHECK(w02 / w1 == doctest::Approx(std::sqrt(5.0)));
  }
}

TEST_CASE("hard caps clip both ends") {
  ControlBounds b;
  b.lower = {Vec2(-5.0, -20.0), Vec2(1.0, 3.0)};
  b.upper = {Vec2(5.0, 20.0), Vec2(3.0, 12.0)};
  const auto c = apply_hard_caps(b);
  CHECK(c.lower[0] == Vec2(-2.0, -10.0));
  CHECK(c.upper[0] == Vec2(2.0, 10.0));
  CHECK(c.lower[1] == Vec2(1.0, 3.0));
  CHECK(c.upper[1] == Vec2(2.0, 10.0));
}

TEST_CASE("endpoints and interpolation") {
  ControlBounds b;
  b.lower = {Vec2(-1, -2), Vec2(0, 0), Vec2(-3, -4)};
  b.upper = {Vec2(1, 2), Vec2(0, 0), Vec2(3, 4)};
  const auto ep = endpoints(b);
  CHECK(ep.min_start == Vec2(-1, -2));
  CHECK(ep.max_end == Vec2(3, 4));
  const auto [lo, hi] = interp_bounds(ep, 11.5, 10.0, 3.0);
  CHECK(lo[0] == doctest::Approx(-2.0));
  CHECK(hi[1] == doctest::Approx(3.0));
  CHECK_THROWS_AS(interp_bounds(ep, 13.5, 10.0, 3.0), Error);
  CHECK(ControlBoundsEndpoints::from_array(ep.to_array()) == ep);
  ControlBounds one;
  one.lower = {Vec2(0, 0)};
  one.upper = {Vec2(0, 0)};
  CHECK_THROWS_AS(endpoints(one), Error);
}

TEST_CASE("validation rejects malformed predictions") {
  auto p = constant_prediction(Vec2(0, 0), Mat2::Identity());
  CHECK_NOTHROW(p.validate());
  p.covariances[2](0, 1) = 0.5;
  CHECK_THROWS_AS(p.validate(), Error);  // asymmetric
  p = constant_prediction(Vec2(0, 0), Mat2::Identity());
  p.covariances[1](1, 1) = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = constant_prediction(Vec2(0, 0), Mat2::Identity());
  p.covariances.pop_back();
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("scripted predictions") {
  PredictionScript s;
  s.dt = 0.5;
  s.horizon_steps = 6;
  s.table = {constant_prediction(Vec2(1, 0), Mat2::Identity()), constant_prediction(Vec2(2, 0), Mat2::Identity())};
  CHECK(scripted_prediction(s, 0.5).means[0][0] == 2.0);
  CHECK_THROWS_AS(scripted_prediction(s, 1.0), Error);
  CHECK_THROWS_AS(scripted_prediction(s, 0.25), Error);
  s.synthetic = SyntheticPredictor{Vec2(0.3, 2.0)};
  const auto p = scripted_prediction(s, 7.0);
  CHECK(p.steps() == 6);
  CHECK(p.covariances[0](1, 1) == doctest::Approx(4.0));
}
