#pragma once

// Gaussian control predictions and their reduction to deterministic control bounds.

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace reachguard {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Per-step Gaussian over (steering rate, acceleration). Horizon is steps() * dt.
struct GaussianControlPrediction {
  std::vector<Vec2> means;
  std::vector<Mat2> covariances;
  double dt = 0.5;

  std::size_t steps() const { return means.size(); }
  double horizon() const { return static_cast<double>(steps()) * dt; }

  /// Throws kArgument when shapes mismatch or a covariance is not symmetric PSD
  /// with a positive diagonal.
  void validate() const;
};

struct ControlBounds {
  std::vector<Vec2> lower;
  std::vector<Vec2> upper;

  std::size_t steps() const { return lower.size(); }
};

/// Bounds at the first and last step of the horizon.
struct ControlBoundsEndpoints {
  Vec2 min_start = Vec2::Zero();
  Vec2 max_start = Vec2::Zero();
  Vec2 min_end = Vec2::Zero();
  Vec2 max_end = Vec2::Zero();

  /// Flat layout: min_start(u1,u2), max_start(u1,u2), min_end(u1,u2), max_end(u1,u2).
  std::array<double, 8> to_array() const;
  static ControlBoundsEndpoints from_array(const std::array<double, 8>& a);

  /// Constant bounds over the whole horizon.
  static ControlBoundsEndpoints constant(const Vec2& lo, const Vec2& hi);

  bool operator==(const ControlBoundsEndpoints& o) const { return to_array() == o.to_array(); }
};

/// Physical limits on predicted controls.
struct HardCaps {
  double steering_rate = 2.0;  // rad/s
  double acceleration = 10.0;  // m/s^2
};

/// Inverse error function on (-1, 1). Rational initial guess refined by Newton on std::erf.
double erfinv(double y);

/// Replaces every covariance by covariance / beta.
GaussianControlPrediction scale_covariance(const GaussianControlPrediction& pred, double beta);

/// Symmetric per-dimension interval around each mean holding probability mass gamma
/// under the marginal N(mu_i, Sigma_ii). Off-diagonal terms are ignored.
ControlBounds bounds_from_gamma(const GaussianControlPrediction& pred, double gamma);

ControlBounds apply_hard_caps(const ControlBounds& bounds, const HardCaps& caps = {});

ControlBoundsEndpoints endpoints(const ControlBounds& bounds);

/// Linear interpolation of the endpoint bounds at time tau in [t, t + horizon].
std::pair<Vec2, Vec2> interp_bounds(const ControlBoundsEndpoints& ep, double tau, double t,
                                    double horizon);

/// Stand-in predictor: zero-mean controls with a fixed diagonal spread.
struct SyntheticPredictor {
  Vec2 sigma = Vec2::Ones();
};

/// Prediction source of a scenario: a table indexed by macro-step, or a synthetic predictor.
struct PredictionScript {
  double dt = 0.5;
  std::size_t horizon_steps = 6;
  std::vector<GaussianControlPrediction> table;
  std::optional<SyntheticPredictor> synthetic;
};

/// Prediction issued at time t. Throws kScenarioFormat if the script has none.
GaussianControlPrediction scripted_prediction(const PredictionScript& script, double t);

}  // namespace reachguard
