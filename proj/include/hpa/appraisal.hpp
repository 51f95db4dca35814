#pragma once

// Sorts one perception frame into a (stress, comfort) pair as seen by a given
// robot profile. The anxious profile takes contact as comfort and its absence
// as a stressor; the avoidant profile reads the same contact as intrusive and
// finds an uneventful room neutral.

#include <algorithm>

#include "hpa/domain.hpp"

namespace hpa {

struct AppraisalResult {
  double stress = 0.0;
  double comfort = 0.0;
  bool operator==(const AppraisalResult&) const = default;
};

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Product of normalized touch area and normalized pressure, each saturating
// at its reference value.
inline double touch_intensity(const StimulusFrame& frame, const AppraisalWeights& w) {
  if (!frame.touch_present()) return 0.0;
  const double area = std::min(1.0, static_cast<double>(frame.touch_taxels) / w.taxels_ref);
  const double pressure = std::min(1.0, frame.touch_pressure / w.pressure_ref);
  return area * pressure;
}

inline AppraisalResult appraise(const StimulusFrame& frame, const ProfileParams& params) {
  const auto& w = params.weights;
  const double touch = touch_intensity(frame, w);
  const double touching = frame.touch_present() ? 1.0 : 0.0;
  const double face = frame.face_present ? 1.0 : 0.0;
  const double gaze = frame.mutual_gaze ? 1.0 : 0.0;

  AppraisalResult r;
  if (params.kind == RobotProfileKind::Anxious) {
    r.comfort = clamp01(w.w_touch_comfort * touch + w.w_smile_comfort * frame.smile +
                        w.w_gaze_comfort * gaze);
    // Ignored: a face is there but offers neither touch nor a smile.
    r.stress = clamp01(w.w_noface_stress * (1.0 - face) +
                       w.w_ignored_stress * face * (1.0 - touching) * (1.0 - frame.smile) +
                       w.w_frown_stress * frame.frown);
  } else {
    r.stress = clamp01(w.w_touch_stress * touch + w.w_frown_stress * frame.frown +
                       w.w_gaze_stress * gaze * touching);
    r.comfort = clamp01(w.w_neutral_comfort * face * (1.0 - touching) +
                        w.w_smile_comfort * frame.smile * (1.0 - touching));
  }
  return r;
}

}  // namespace hpa
