#pragma once

// Two-hypothesis belief over the predictor's confidence parameter.

#include "reachguard/dynamics.hpp"
#include "reachguard/prediction.hpp"

namespace reachguard {

struct ConfidenceBelief {
  double beta_low = 0.2;
  double beta_high = 1.0;
  double b_low = 0.5;
  double b_high = 0.5;
  double epsilon = 0.05;  // epsilon-static mixing rate toward the initial prior

  /// Throws kArgument unless the belief is on the simplex and 0 < beta_low < beta_high = 1.
  void validate() const;
};

/// Uniform prior over {beta_low, 1}.
ConfidenceBelief initial_belief(double beta_low = 0.2, double epsilon = 0.05);

/// log N(u_obs; mu, sigma / beta) with the full covariance.
/// Throws kNumerical if sigma is not positive definite.
double log_likelihood(const ControlInput& u_obs, const Vec2& mu, const Mat2& sigma, double beta);

double likelihood(const ControlInput& u_obs, const Vec2& mu, const Mat2& sigma, double beta);

/// Bayes posterior over {beta_low, beta_high}, normalized with log-sum-exp.
/// A degenerate observation (no finite likelihood) keeps the prior and warns.
ConfidenceBelief bayes_update(const ConfidenceBelief& belief, const ControlInput& u_obs,
                              const Vec2& mu, const Mat2& sigma);

/// Mixes the belief with the uniform initial prior at rate epsilon.
ConfidenceBelief epsilon_static(const ConfidenceBelief& belief);

/// beta_low * b_low + beta_high * b_high
double effective_beta(const ConfidenceBelief& belief);

}  // namespace reachguard
