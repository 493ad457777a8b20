#include "reachguard/confidence.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "reachguard/errors.hpp"

namespace reachguard {

void ConfidenceBelief::validate() const {
  if (!(beta_low > 0.0 && beta_low < beta_high) || beta_high != 1.0) {
    throw Error(ErrorKind::kArgument, "belief requires 0 < beta_low < beta_high = 1");
  }
  if (!(b_low >= 0.0 && b_high >= 0.0) || std::abs(b_low + b_high - 1.0) > 1e-12) {
    throw Error(ErrorKind::kArgument, "belief is not a probability distribution");
  }
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw Error(ErrorKind::kArgument, "epsilon must lie in [0, 1]");
  }
}

ConfidenceBelief initial_belief(double beta_low, double epsilon) {
  ConfidenceBelief b;
  b.beta_low = beta_low;
  b.epsilon = epsilon;
  b.validate();
  return b;
}

double log_likelihood(const ControlInput& u_obs, const Vec2& mu, const Mat2& sigma, double beta) {
  if (!(beta > 0.0)) throw Error(ErrorKind::kArgument, "likelihood: beta must be positive");
  const double a = sigma(0, 0) / beta;
  const double b = sigma(0, 1) / beta;
  const double c = sigma(1, 0) / beta;
  const double d = sigma(1, 1) / beta;
  const double det = a * d - b * c;
  if (!(a > 0.0) || !(det > 1e-14 * a * d) || !std::isfinite(det)) {
    std::ostringstream msg;
    msg << "likelihood: covariance is singular or not positive definite (det=" << det << ")";
    throw Error(ErrorKind::kNumerical, msg.str());
  }
  const double r0 = u_obs.u1 - mu[0];
  const double r1 = u_obs.u2 - mu[1];
  // r^T S^{-1} r for a 2x2 S = [[a, b], [c, d]]
  const double maha = (d * r0 * r0 - (b + c) * r0 * r1 + a * r1 * r1) / det;
  return -0.5 * maha - 0.5 * std::log(det) - std::log(2.0 * std::numbers::pi);
}

double likelihood(const ControlInput& u_obs, const Vec2& mu, const Mat2& sigma, double beta) {
  return std::exp(log_likelihood(u_obs, mu, sigma, beta));
}

ConfidenceBelief bayes_update(const ConfidenceBelief& belief, const ControlInput& u_obs,
                              const Vec2& mu, const Mat2& sigma) {
  belief.validate();
  const double ninf = -std::numeric_limits<double>::infinity();
  const double log_low = belief.b_low > 0.0
                             ? log_likelihood(u_obs, mu, sigma, belief.beta_low) + std::log(belief.b_low)
                             : ninf;
  const double log_high = belief.b_high > 0.0
                              ? log_likelihood(u_obs, mu, sigma, belief.beta_high) + std::log(belief.b_high)
                              : ninf;
  const double top = std::max(log_low, log_high);
  if (!std::isfinite(top)) {
    warn("bayes_update: degenerate observation, keeping prior belief");
    return belief;
  }
  const double w_low = std::exp(log_low - top);
  const double w_high = std::exp(log_high - top);
  ConfidenceBelief out = belief;
  out.b_low = w_low / (w_low + w_high);
  out.b_high = 1.0 - out.b_low;
  return out;
}

ConfidenceBelief epsilon_static(const ConfidenceBelief& belief) {
  belief.validate();
  ConfidenceBelief out = belief;
  out.b_low = (1.0 - belief.epsilon) * belief.b_low + belief.epsilon * 0.5;
  out.b_high = 1.0 - out.b_low;
  return out;
}

double effective_beta(const ConfidenceBelief& belief) {
  return belief.beta_low * belief.b_low + belief.beta_high * belief.b_high;
}

}  // namespace reachguard
