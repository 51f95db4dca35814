#pragma once

// R-cortisol integration. One explicit-Euler step per tick:
//
//   dc/dt = reactivity * s_eff * (ceiling - c)      saturating stress drive
//         - comfort_damping * comfort * c           comfort damping
//         - recovery_rate * (c - baseline)          return to baseline
//
// where s_eff is the appraised stress, zeroed when it falls below the
// profile's stress gate. The result is clamped to [0, ceiling].
// Stable while dt * (reactivity + comfort_damping + recovery_rate) < 1.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "hpa/appraisal.hpp"
#include "hpa/domain.hpp"

namespace hpa {

inline double cortisol_step(double level, const AppraisalResult& appraisal,
                            const ProfileParams& params, double dt) {
  if (!std::isfinite(level)) throw NonFiniteInput("cortisol level");
  if (!std::isfinite(appraisal.stress) || !std::isfinite(appraisal.comfort)) {
    throw NonFiniteInput("appraisal");
  }
  if (!std::isfinite(dt)) throw NonFiniteInput("dt");
  if (!std::isfinite(params.reactivity) || !std::isfinite(params.comfort_damping) ||
      !std::isfinite(params.recovery_rate) || !std::isfinite(params.baseline) ||
      !std::isfinite(params.ceiling) || !std::isfinite(params.stress_gate)) {
    throw NonFiniteInput("profile parameters");
  }
  if (dt <= 0.0) throw InvalidArgument("dt must be > 0");
  if (level < 0.0 || level > params.ceiling) {
    throw InvalidArgument("cortisol level outside [0, ceiling]: " + std::to_string(level));
  }

  const double stress = appraisal.stress >= params.stress_gate ? appraisal.stress : 0.0;
  const double drift = params.reactivity * stress * (params.ceiling - level) -
                       params.comfort_damping * appraisal.comfort * level -
                       params.recovery_rate * (level - params.baseline);
  return std::clamp(level + dt * drift, 0.0, params.ceiling);
}

// Element i is the level after integrating frame i; the level before frame 0
// is `initial`.
inline std::vector<double> run_dynamics(std::span<const StimulusFrame> frames,
                                        const ProfileParams& params, double tick_hz,
                                        double initial) {
  validate_params(params);
  if (!std::isfinite(tick_hz) || tick_hz <= 0.0) throw InvalidArgument("tick_hz must be > 0");
  const double dt = 1.0 / tick_hz;
  std::vector<double> series;
  series.reserve(frames.size());
  double level = initial;
  for (const auto& frame : frames) {
    validate_frame(frame);
    level = cortisol_step(level, appraise(frame, params), params, dt);
    series.push_back(level);
  }
  return series;
}

inline std::vector<double> run_dynamics(std::span<const StimulusFrame> frames,
                                        const ProfileParams& params, double tick_hz) {
  return run_dynamics(frames, params, tick_hz, params.baseline);
}

// Time for (c - baseline) to halve with no stimulation, in the continuous-time
// limit.
inline double recovery_halflife(const ProfileParams& params) {
  if (!(params.recovery_rate > 0.0)) throw InvalidParams("recovery_rate must be > 0");
  return std::numbers::ln2 / params.recovery_rate;
}

}  // namespace hpa
