#pragma once

#include <algorithm>
#include <cmath>

#include "dyntrack/errors.hpp"
#include "dyntrack/geometry.hpp"

namespace dyntrack {

/// Noise settings of the orientation filter.
struct FilterNoiseConfig {
  double measurement_variance = 0.05;  // r, rad^2
  double q_floor = 1e-6;               // minimum process noise, rad^2
  double q_scale = 1.0;                // multiplier on |angular acceleration|
  double initial_variance = 0.05;      // rad^2, per axis

  void validate() const {
    if (!(measurement_variance > 0.0)) throw InvalidConfig("filter.measurement_variance must be > 0");
    if (!(q_floor >= 0.0)) throw InvalidConfig("filter.q_floor must be >= 0");
    if (!(q_scale >= 0.0)) throw InvalidConfig("filter.q_scale must be >= 0");
    if (!(initial_variance >= 0.0)) throw InvalidConfig("filter.initial_variance must be >= 0");
  }
};

/// World-frame object orientation filter state. Axes are independent, so the
/// covariance is stored as its diagonal.
struct KalmanState {
  TaitBryan theta;                     // current mean (predicted or posterior)
  Vec3 variance = Vec3::Zero();        // covariance diagonal, rad^2
  Vec3 omega = Vec3::Zero();           // rad/s
  Vec3 omega_prev = Vec3::Zero();      // rad/s, previous rate estimate
  double time = 0.0;                   // time the mean refers to
  double last_update_time = 0.0;
  TaitBryan last_posterior;            // mean at last_update_time
  bool rate_known = true;              // false until two observations fixed omega

  Mat3 covariance() const { return variance.asDiagonal(); }
};

/// Seeds a filter at a known orientation. With `rate_known == false` the
/// first update adopts the observation and derives omega from it (two-point
/// initialisation) instead of blending it with the zero-rate prior.
inline KalmanState make_kalman_state(const TaitBryan& theta, double variance, double time = 0.0,
                                     bool rate_known = true) {
  KalmanState s;
  s.theta = theta;
  s.last_posterior = theta;
  s.variance = Vec3::Constant(variance);
  s.time = time;
  s.last_update_time = time;
  s.rate_known = rate_known;
  return s;
}

/// Per-axis shortest signed angular difference divided by dt.
inline Vec3 estimate_omega(const TaitBryan& now, const TaitBryan& prev, double dt) {
  if (!(dt > 0.0)) throw NonPositiveDt("estimate_omega: dt must be > 0");
  Vec3 w;
  for (int i = 0; i < 3; ++i) w[i] = wrap_angle(now[i] - prev[i]) / dt;
  return w;
}

/// Process noise magnitude: q_scale * |(omega - omega_prev) / dt|, floored.
inline double process_noise(const KalmanState& s, double dt, const FilterNoiseConfig& noise) {
  if (!(dt > 0.0)) throw NonPositiveDt("process_noise: dt must be > 0");
  const double accel = ((s.omega - s.omega_prev) / dt).norm();
  return std::max(noise.q_scale * accel, noise.q_floor);
}

/// Constant-angular-rate prediction.
inline KalmanState predict(const KalmanState& s, double dt, const FilterNoiseConfig& noise) {
  if (!(dt > 0.0)) throw NonPositiveDt("predict: dt must be > 0");
  KalmanState out = s;
  out.theta = TaitBryan(s.theta.vec() + s.omega * dt);
  out.variance = s.variance + Vec3::Constant(process_noise(s, dt, noise));
  out.time = s.time + dt;
  return out;
}

/// Scalar update per axis (H = I, R = r I), then re-estimates omega from the
/// previous and new posterior means.
inline KalmanState update(const KalmanState& s, const TaitBryan& obs, const FilterNoiseConfig& noise) {
  const double r = noise.measurement_variance;
  KalmanState out = s;
  Vec3 mean = s.theta.vec();
  if (!s.rate_known) {
    mean = obs.vec();
    out.variance = s.variance.cwiseMin(Vec3::Constant(r));
  } else {
    for (int i = 0; i < 3; ++i) {
      const double p = s.variance[i];
      const double k = p / (p + r);
      mean[i] += k * wrap_angle(obs[i] - s.theta[i]);
      out.variance[i] = (1.0 - k) * p;
    }
  }
  out.theta = TaitBryan(mean);
  const double dt = s.time - s.last_update_time;
  if (dt > 0.0) {
    out.omega = estimate_omega(out.theta, s.last_posterior, dt);
    out.omega_prev = s.rate_known ? s.omega : out.omega;
  }
  out.rate_known = out.rate_known || dt > 0.0;
  out.last_posterior = out.theta;
  out.last_update_time = s.time;
  return out;
}

inline Vec3 per_axis_sigma(const KalmanState& s) { return s.variance.cwiseMax(0.0).cwiseSqrt(); }

}  // namespace dyntrack
