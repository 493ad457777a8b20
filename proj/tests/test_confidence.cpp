#include <cmath>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "doctest.h"
#include "reachguard/confidence.hpp"
#include "reachguard/errors.hpp"
#include "support.hpp"

using namespace reachguard;

TEST_CASE("observing the mean from equal priors gives 1 / 1.2") {
  // Likelihood ratio at the mean is beta^(d/2) = 0.2 for d = 2.
  const auto b = bayes_update(initial_belief(0.2, 0.0), {0.3, -1.0}, Vec2(0.3, -1.0), Mat2::Identity());
  CHECK(std::abs(b.b_high - 1.0 / 1.2) < 1e-9);
  CHECK(std::abs(effective_beta(b) - (0.2 * (1.0 - 1.0 / 1.2) + 1.0 / 1.2)) < 1e-9);
  CHECK(std::abs(effective_beta(b) - 0.8666666666666667) < 1e-9);
}

TEST_CASE("likelihood matches the closed-form Gaussian density") {
  Mat2 s;
  s << 2.0, 0.3, 0.3, 0.5;
  const double beta = 0.4;
  const Vec2 mu(0.1, -0.2);
  const ControlInput u{0.7, 0.4};
  const Mat2 c = s / beta;
  const Eigen::Vector2d r(u.u1 - mu[0], u.u2 - mu[1]);
  const double expected = std::exp(-0.5 * r.dot(c.inverse() * r)) / (2.0 * M_PI * std::sqrt(c.determinant()));
  CHECK(likelihood(u, mu, s, beta) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("far observations favour low confidence without underflow") {
  const auto b = bayes_update(initial_belief(), {40.0, 40.0}, Vec2(0, 0), Mat2::Identity() * 0.01);
  CHECK(b.b_low == doctest::Approx(1.0));
  CHECK(std::isfinite(b.b_high));
  CHECK(b.b_high >= 0.0);
}

TEST_CASE("epsilon-static mixing pulls toward the uniform prior") {
  ConfidenceBelief b = initial_belief(0.2, 0.1);
  b.b_low = 1.0;
  b.b_high = 0.0;
  const auto m = epsilon_static(b);
  CHECK(m.b_low == doctest::Approx(0.95));
  CHECK(m.b_high == doctest::Approx(0.05));
  // Fixed point is the prior.
  const auto u = epsilon_static(initial_belief(0.2, 0.1));
  CHECK(u.b_low == doctest::Approx(0.5));
}

TEST_CASE("belief stays on the simplex over many random updates") {
  testing::Rng rng(2024);
  ConfidenceBelief b = initial_belief(0.2, 0.05);
  for (int i = 0; i < 1000000; ++i) {
    const double sd1 = rng.uniform(0.05, 3.0), sd2 = rng.uniform(0.05, 3.0);
    const double rho = rng.uniform(-0.9, 0.9);
    Mat2 s;
    s << sd1 * sd1, rho * sd1 * sd2, rho * sd1 * sd2, sd2 * sd2;
    const ControlInput u{rng.uniform(-20, 20), rng.uniform(-20, 20)};
    b = epsilon_static(bayes_update(b, u, Vec2(rng.uniform(-2, 2), rng.uniform(-2, 2)), s));
    if (!(b.b_low >= 0.0 && b.b_high >= 0.0 && std::abs(b.b_low + b.b_high - 1.0) <= 1e-12)) {
      FAIL("left the simplex at update " << i);
    }
  }
  const double beta = effective_beta(b);
  CHECK(beta >= 0.2);
  CHECK(beta <= 1.0);
}

TEST_CASE("degenerate observations keep the prior and warn") {
  std::vector<std::string> warnings;
  set_warning_sink([&](std::string_view m) { warnings.emplace_back(m); });
  const ConfidenceBelief prior = initial_belief();
  const auto b = bayes_update(prior, {std::nan(""), 0.0}, Vec2(0, 0), Mat2::Identity());
  set_warning_sink({});
  CHECK(b.b_low == prior.b_low);
  CHECK(warnings.size() == 1);
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(initial_belief(1.5), Error);
  CHECK_THROWS_AS(log_likelihood({0, 0}, Vec2(0, 0), Mat2::Zero(), 1.0), Error);
  CHECK_THROWS_AS(log_likelihood({0, 0}, Vec2(0, 0), Mat2::Identity(), 0.0), Error);
}
