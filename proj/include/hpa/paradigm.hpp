#pragma once

// Still-Face session scripting: the phase schedule, the six synthetic
// caretaker stimulus sets (2 paradigms x 3 human profiles), and the session
// loop that turns a stimulus stream into a SessionTrace.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hpa/appraisal.hpp"
#include "hpa/behavior.hpp"
#include "hpa/domain.hpp"
#include "hpa/motivation.hpp"
#include "hpa/random.hpp"
#include "hpa/trace_io.hpp"

namespace hpa {

inline Phase phase_at(double t, const SessionConfig& config) {
  if (!std::isfinite(t) || t < 0.0) throw OutOfSession("negative or non-finite time");
  if (t >= config.durations.total()) {
    throw OutOfSession("t=" + std::to_string(t) + " is past the end of the session");
  }
  // Tolerate the rounding of i / tick_hz right below a boundary.
  const auto tick = static_cast<std::size_t>(std::floor(t * config.tick_hz + 1e-9));
  return phase_of_tick(config, std::min(tick, config.tick_count() - 1));
}

// Fraction of non-paradigm frames in which each feature is active.
struct OccupancyTargets {
  double touch = 0.0;
  double smile = 0.0;
  double gaze = 0.0;
};

inline OccupancyTargets occupancy_targets(HumanProfile human) {
  switch (human) {
    case HumanProfile::Control: return {0.40, 0.40, 0.60};
    case HumanProfile::AnxiousHuman: return {0.70, 0.60, 0.80};
    case HumanProfile::AvoidantHuman: return {0.10, 0.15, 0.30};
  }
  return {};
}

// Mean bout lengths, seconds.
inline constexpr double kTouchBoutSeconds = 2.0;
inline constexpr double kSmileBoutSeconds = 1.5;
inline constexpr double kGazeBoutSeconds = 1.5;

// A full-hand touch; saturates touch_intensity at the default references.
inline constexpr std::uint32_t kFullTouchTaxels = 60;
inline constexpr double kFullTouchPressure = 25.0;

// Upper bound on contact dropouts during a Still-Face+Touch episode.
inline constexpr double kMaxTouchDropout = 0.03;

namespace detail {

// Activates exactly round(rate * len) of len ticks, grouped into bouts with
// geometrically distributed lengths and randomly placed gaps.
inline std::vector<bool> bout_mask(std::size_t len, double rate, double mean_bout_ticks, Rng& rng) {
  std::vector<bool> mask(len, false);
  const auto active = static_cast<std::size_t>(std::llround(rate * static_cast<double>(len)));
  if (active == 0) return mask;
  if (active >= len) {
    mask.assign(len, true);
    return mask;
  }

  std::vector<std::size_t> bouts;
  for (std::size_t total = 0; total < active;) {
    const auto b = std::min<std::size_t>(rng.geometric(mean_bout_ticks), active - total);
    bouts.push_back(b);
    total += b;
  }
  const std::size_t idle = len - active;
  // Interior gaps need at least one idle tick each.
  while (bouts.size() - 1 > idle) {
    const auto last = bouts.back();
    bouts.pop_back();
    bouts.back() += last;
  }

  const std::size_t slack = idle - (bouts.size() - 1);
  std::vector<std::size_t> cuts(bouts.size());
  for (auto& c : cuts) c = rng.between(0, slack);
  std::sort(cuts.begin(), cuts.end());

  std::size_t pos = cuts.front();
  for (std::size_t k = 0; k < bouts.size(); ++k) {
    if (k > 0) pos += 1 + (cuts[k] - cuts[k - 1]);
    std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(pos), bouts[k], true);
    pos += bouts[k];
  }
  return mask;
}

enum class Feature : std::uint64_t { Touch = 1, Smile = 2, Gaze = 3, Dropout = 4 };

inline std::uint64_t stream_id(Feature f, Phase ph) {
  return static_cast<std::uint64_t>(f) * 16 + static_cast<std::uint64_t>(ph);
}

}  // namespace detail

// Synthetic caretaker behavior for one session. The face is always present;
// in the paradigm phase the caretaker holds a neutral face with mutual gaze,
// and touches the robot throughout (up to a few dropout frames) under SF+T.
inline std::vector<StimulusFrame> generate_stimuli(HumanProfile human, ParadigmKind paradigm,
                                                   const SessionConfig& config,
                                                   std::uint64_t seed) {
  validate_config(config);
  const auto targets = occupancy_targets(human);
  std::vector<StimulusFrame> frames(config.tick_count());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    frames[i].t = config.time_of_tick(i);
    frames[i].face_present = true;
  }

  std::size_t start = 0;
  for (Phase ph : kAllPhases) {
    const std::size_t len = config.ticks_in(config.durations.of(ph));
    auto segment = std::span(frames).subspan(start, len);
    start += len;

    if (ph == Phase::Paradigm) {
      std::vector<bool> dropout(len, false);
      if (paradigm == ParadigmKind::StillFaceTouch) {
        Rng rng(seed, detail::stream_id(detail::Feature::Dropout, ph));
        const auto max_drop =
            static_cast<std::uint64_t>(std::floor(kMaxTouchDropout * static_cast<double>(len)));
        const auto drops = rng.between(0, max_drop);
        for (std::uint64_t k = 0; k < drops; ++k) dropout[rng.between(0, len - 1)] = true;
      }
      for (std::size_t i = 0; i < len; ++i) {
        auto& f = segment[i];
        f.mutual_gaze = true;
        if (paradigm == ParadigmKind::StillFaceTouch && !dropout[i]) {
          f.touch_taxels = kFullTouchTaxels;
          f.touch_pressure = kFullTouchPressure;
        }
      }
      continue;
    }

    Rng touch_rng(seed, detail::stream_id(detail::Feature::Touch, ph));
    Rng smile_rng(seed, detail::stream_id(detail::Feature::Smile, ph));
    Rng gaze_rng(seed, detail::stream_id(detail::Feature::Gaze, ph));
    const auto touch = detail::bout_mask(len, targets.touch, kTouchBoutSeconds * config.tick_hz,
                                         touch_rng);
    const auto smile = detail::bout_mask(len, targets.smile, kSmileBoutSeconds * config.tick_hz,
                                         smile_rng);
    const auto gaze =
        detail::bout_mask(len, targets.gaze, kGazeBoutSeconds * config.tick_hz, gaze_rng);
    for (std::size_t i = 0; i < len; ++i) {
      auto& f = segment[i];
      if (touch[i]) {
        f.touch_taxels = kFullTouchTaxels;
        f.touch_pressure = kFullTouchPressure;
      }
      f.smile = smile[i] ? 1.0 : 0.0;
      f.mutual_gaze = gaze[i];
    }
  }
  return frames;
}

// Neutral face with mutual gaze for the whole session, touched during the
// first touch_fraction of every 10 s cycle. Touch sets are nested across
// fractions, which makes session means monotone in touch_fraction.
inline std::vector<StimulusFrame> forced_touch_stimuli(double touch_fraction,
                                                       const SessionConfig& config) {
  validate_config(config);
  if (!(touch_fraction >= 0.0 && touch_fraction <= 1.0)) {
    throw InvalidArgument("touch_fraction must lie in [0, 1]");
  }
  const std::size_t cycle = std::max<std::size_t>(1, config.ticks_in(10.0));
  const auto touched = static_cast<std::size_t>(
      std::llround(touch_fraction * static_cast<double>(cycle)));
  std::vector<StimulusFrame> frames(config.tick_count());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    auto& f = frames[i];
    f.t = config.time_of_tick(i);
    f.face_present = true;
    f.mutual_gaze = true;
    if (i % cycle < touched) {
      f.touch_taxels = kFullTouchTaxels;
      f.touch_pressure = kFullTouchPressure;
    }
  }
  return frames;
}

// ---------------------------------------------------------------------------
// Session loop

// Carries the robot state from tick to tick. Shared by offline runs and the
// live service so both produce identical records for identical frames.
class SessionStepper {
 public:
  SessionStepper(ProfileParams params, double tick_hz)
      : params_(std::move(params)), dt_(1.0 / tick_hz) {
    validate_params(params_);
    state_.level = params_.baseline;
    state_.behavior = BehaviorState::Content;
  }

  TraceRecord advance(double t, Phase phase, const StimulusFrame& frame) {
    validate_frame(frame);
    const auto appraisal = appraise(frame, params_);
    state_.level = cortisol_step(state_.level, appraisal, params_, dt_);
    state_.behavior = next_state(state_.behavior, state_.level, params_, frame);

    TraceRecord r;
    r.t = t;
    r.phase = phase;
    r.frame = frame;
    r.frame.t = t;
    r.stress = appraisal.stress;
    r.comfort = appraisal.comfort;
    r.cortisol = state_.level;
    r.behavior = state_.behavior;
    r.action = select_action(state_.behavior, frame, params_);
    return r;
  }

  const CortisolState& state() const noexcept { return state_; }
  const ProfileParams& params() const noexcept { return params_; }

 private:
  ProfileParams params_;
  double dt_;
  CortisolState state_;
};

// Runs the robot over a prepared frame stream. phases, when given, override
// the time schedule (used when replaying live traces).
inline SessionTrace simulate_frames(const SessionConfig& config,
                                    std::span<const StimulusFrame> frames,
                                    std::optional<std::span<const Phase>> phases = std::nullopt) {
  validate_config(config);
  if (frames.empty()) throw InvalidArgument("empty stimulus stream");
  if (frames.size() > config.tick_count()) {
    throw InvalidArgument("stimulus stream longer than the session");
  }
  if (phases && phases->size() != frames.size()) {
    throw InvalidArgument("phase list does not match the stimulus stream");
  }
  SessionTrace trace;
  trace.config = config;
  trace.records.reserve(frames.size());
  SessionStepper stepper(config.robot_profile, config.tick_hz);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Phase ph = phases ? (*phases)[i] : phase_of_tick(config, i);
    trace.records.push_back(stepper.advance(config.time_of_tick(i), ph, frames[i]));
  }
  return trace;
}

inline SessionTrace run_session(const SessionConfig& config) {
  validate_config(config);
  if (const auto* synthetic = std::get_if<SyntheticSource>(&config.source)) {
    const auto frames = generate_stimuli(synthetic->human, config.paradigm, config, synthetic->seed);
    return simulate_frames(config, frames);
  }
  if (const auto* replay = std::get_if<ReplaySource>(&config.source)) {
    const auto recorded = read_stimuli(replay->path);
    if (recorded.header.tick_hz != config.tick_hz || recorded.header.durations != config.durations) {
      throw InvalidConfig("replay source timing differs from the session config");
    }
    if (recorded.phases) return simulate_frames(config, recorded.frames, *recorded.phases);
    return simulate_frames(config, recorded.frames);
  }
  throw InvalidConfig("live sessions run inside the session service");
}

}  // namespace hpa
