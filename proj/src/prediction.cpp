#include "reachguard/prediction.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "reachguard/errors.hpp"

namespace reachguard {

std::array<double, 8> ControlBoundsEndpoints::to_array() const {
  return {min_start[0], min_start[1], max_start[0], max_start[1],
          min_end[0],   min_end[1],   max_end[0],   max_end[1]};
}

ControlBoundsEndpoints ControlBoundsEndpoints::from_array(const std::array<double, 8>& a) {
  return {Vec2(a[0], a[1]), Vec2(a[2], a[3]), Vec2(a[4], a[5]), Vec2(a[6], a[7])};
}

ControlBoundsEndpoints ControlBoundsEndpoints::constant(const Vec2& lo, const Vec2& hi) {
  return {lo, hi, lo, hi};
}

void GaussianControlPrediction::validate() const {
  if (means.empty()) throw Error(ErrorKind::kArgument, "prediction has no steps");
  if (means.size() != covariances.size()) {
    throw Error(ErrorKind::kArgument, "prediction means/covariances length mismatch");
  }
  if (!(dt > 0.0)) throw Error(ErrorKind::kArgument, "prediction dt must be positive");
  for (std::size_t k = 0; k < covariances.size(); ++k) {
    const Mat2& s = covariances[k];
    std::ostringstream where;
    where << "prediction step " << k << ": ";
    if (!means[k].allFinite() || !s.allFinite()) {
      throw Error(ErrorKind::kArgument, where.str() + "non-finite entry");
    }
    if (std::abs(s(0, 1) - s(1, 0)) > 1e-12 * std::max(1.0, s.cwiseAbs().maxCoeff())) {
      throw Error(ErrorKind::kArgument, where.str() + "covariance not symmetric");
    }
    if (!(s(0, 0) > 0.0) || !(s(1, 1) > 0.0)) {
      throw Error(ErrorKind::kArgument, where.str() + "covariance diagonal must be positive");
    }
    const double min_eig = Eigen::SelfAdjointEigenSolver<Mat2>(s).eigenvalues().minCoeff();
    if (min_eig < -1e-12 * s.trace()) {
      throw Error(ErrorKind::kArgument, where.str() + "covariance not positive semidefinite");
    }
  }
}

double erfinv(double y) {
  if (!(y > -1.0 && y < 1.0)) {
    if (y == 1.0) return std::numeric_limits<double>::infinity();
    if (y == -1.0) return -std::numeric_limits<double>::infinity();
    throw Error(ErrorKind::kArgument, "erfinv: argument outside (-1, 1)");
  }
  if (y == 0.0) return 0.0;
  // Giles (2010) single-precision rational approximation as the starting point.
  double w = -std::log((1.0 - y) * (1.0 + y));
  double x;
  if (w < 5.0) {
    w -= 2.5;
    double p = 2.81022636e-08;
    p = 3.43273939e-07 + p * w;
    p = -3.5233877e-06 + p * w;
    p = -4.39150654e-06 + p * w;
    p = 0.00021858087 + p * w;
    p = -0.00125372503 + p * w;
    p = -0.00417768164 + p * w;
    p = 0.246640727 + p * w;
    p = 1.50140941 + p * w;
    x = p * y;
  } else {
    w = std::sqrt(w) - 3.0;
    double p = -0.000200214257;
    p = 0.000100950558 + p * w;
    p = 0.00134934322 + p * w;
    p = -0.00367342844 + p * w;
    p = 0.00573950773 + p * w;
    p = -0.0076224613 + p * w;
    p = 0.00943887047 + p * w;
    p = 1.00167406 + p * w;
    p = 2.83297682 + p * w;
    x = p * y;
  }
  const double two_over_sqrt_pi = 2.0 / std::sqrt(std::numbers::pi);
  for (int i = 0; i < 2; ++i) {
    const double err = std::erf(x) - y;
    x -= err / (two_over_sqrt_pi * std::exp(-x * x));
  }
  return x;
}

GaussianControlPrediction scale_covariance(const GaussianControlPrediction& pred, double beta) {
  if (!(beta > 0.0) || beta > 1.0) {
    throw Error(ErrorKind::kArgument, "scale_covariance: beta must lie in (0, 1]");
  }
  GaussianControlPrediction out = pred;
  for (Mat2& s : out.covariances) s /= beta;
  return out;
}

ControlBounds bounds_from_gamma(const GaussianControlPrediction& pred, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw Error(ErrorKind::kArgument, "bounds_from_gamma: gamma must lie in (0, 1)");
  }
  const double z = std::numbers::sqrt2 * erfinv(gamma);
  ControlBounds b;
  b.lower.reserve(pred.steps());
  b.upper.reserve(pred.steps());
  for (std::size_t k = 0; k < pred.steps(); ++k) {
    const Vec2 delta(z * std::sqrt(pred.covariances[k](0, 0)),
                     z * std::sqrt(pred.covariances[k](1, 1)));
    b.lower.push_back(pred.means[k] - delta);
    b.upper.push_back(pred.means[k] + delta);
  }
  return b;
}

ControlBounds apply_hard_caps(const ControlBounds& bounds, const HardCaps& caps) {
  const Vec2 cap(caps.steering_rate, caps.acceleration);
  ControlBounds out = bounds;
  for (std::size_t k = 0; k < out.steps(); ++k) {
    out.lower[k] = out.lower[k].cwiseMax(-cap).cwiseMin(cap);
    out.upper[k] = out.upper[k].cwiseMax(-cap).cwiseMin(cap);
  }
  return out;
}

ControlBoundsEndpoints endpoints(const ControlBounds& bounds) {
  if (bounds.steps() < 2 || bounds.upper.size() != bounds.steps()) {
    throw Error(ErrorKind::kArgument, "endpoints: need at least two steps of bounds");
  }
  const std::size_t last = bounds.steps() - 1;
  return {bounds.lower.front(), bounds.upper.front(), bounds.lower[last], bounds.upper[last]};
}

std::pair<Vec2, Vec2> interp_bounds(const ControlBoundsEndpoints& ep, double tau, double t,
                                    double horizon) {
  if (!(horizon > 0.0)) throw Error(ErrorKind::kArgument, "interp_bounds: horizon must be positive");
  const double slack = 1e-12 * std::max(1.0, std::abs(t) + horizon);
  if (tau < t - slack || tau > t + horizon + slack) {
    std::ostringstream msg;
    msg << "interp_bounds: tau=" << tau << " outside [" << t << ", " << t + horizon << "]";
    throw Error(ErrorKind::kArgument, msg.str());
  }
  const double w = std::clamp((tau - t) / horizon, 0.0, 1.0);
  return {(1.0 - w) * ep.min_start + w * ep.min_end, (1.0 - w) * ep.max_start + w * ep.max_end};
}

GaussianControlPrediction scripted_prediction(const PredictionScript& script, double t) {
  if (t < 0.0) throw Error(ErrorKind::kScenarioFormat, "prediction requested for negative time");
  if (script.synthetic) {
    GaussianControlPrediction p;
    p.dt = script.dt;
    const Mat2 cov = script.synthetic->sigma.cwiseAbs2().asDiagonal();
    p.means.assign(script.horizon_steps, Vec2::Zero());
    p.covariances.assign(script.horizon_steps, cov);
    return p;
  }
  const double idx = t / script.dt;
  const auto k = static_cast<std::size_t>(std::llround(idx));
  if (std::abs(idx - static_cast<double>(k)) > 1e-6 || k >= script.table.size()) {
    std::ostringstream msg;
    msg << "no prediction scripted for t=" << t << " s (script covers " << script.table.size()
        << " steps of " << script.dt << " s)";
    throw Error(ErrorKind::kScenarioFormat, msg.str());
  }
  return script.table[k];
}

}  // namespace reachguard
