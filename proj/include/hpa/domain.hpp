#pragma once

// Shared value types of the R-cortisol simulator: stimulus frames, robot
// profiles and their parameters, behavioral states, session configuration
// and traces. Everything here is an immutable-after-construction value type;
// the only behavior is validation and the enum <-> name tables used by the
// file formats.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "hpa/errors.hpp"

namespace hpa {

enum class RobotProfileKind { Anxious, Avoidant };

enum class DimensionLevel { Low, High };

enum class AdultAttachmentStyle { Secure, Preoccupied, Dismissing, Fearful };

enum class BehaviorState { Content, SeekingContact, Distressed, Withdrawn };

enum class RobotAction {
  Idle,
  TurnTorso,
  StretchArms,
  VocalCall,
  SmileExpression,
  LookAway,
  PullAway
};

enum class Phase { FreePlay, Paradigm, Reunion, FreePlay2 };

enum class ParadigmKind { StillFace, StillFaceTouch };

enum class HumanProfile { Control, AvoidantHuman, AnxiousHuman };

inline constexpr std::array<Phase, 4> kAllPhases = {Phase::FreePlay, Phase::Paradigm,
                                                    Phase::Reunion, Phase::FreePlay2};

// ---------------------------------------------------------------------------
// Enum names. One table per enum; to_string/parse_enum are the only access
// path so the wire names live in exactly one place.

template <class E>
struct EnumNames;

template <>
struct EnumNames<RobotProfileKind> {
  static constexpr std::array<std::pair<RobotProfileKind, std::string_view>, 2> table{{
      {RobotProfileKind::Anxious, "anxious"},
      {RobotProfileKind::Avoidant, "avoidant"},
  }};
};

template <>
struct EnumNames<AdultAttachmentStyle> {
  static constexpr std::array<std::pair<AdultAttachmentStyle, std::string_view>, 4> table{{
      {AdultAttachmentStyle::Secure, "secure"},
      {AdultAttachmentStyle::Preoccupied, "preoccupied"},
      {AdultAttachmentStyle::Dismissing, "dismissing"},
      {AdultAttachmentStyle::Fearful, "fearful"},
  }};
};

template <>
struct EnumNames<BehaviorState> {
  static constexpr std::array<std::pair<BehaviorState, std::string_view>, 4> table{{
      {BehaviorState::Content, "content"},
      {BehaviorState::SeekingContact, "seeking_contact"},
      {BehaviorState::Distressed, "distressed"},
      {BehaviorState::Withdrawn, "withdrawn"},
  }};
};

template <>
struct EnumNames<RobotAction> {
  static constexpr std::array<std::pair<RobotAction, std::string_view>, 7> table{{
      {RobotAction::Idle, "idle"},
      {RobotAction::TurnTorso, "turn_torso"},
      {RobotAction::StretchArms, "stretch_arms"},
      {RobotAction::VocalCall, "vocal_call"},
      {RobotAction::SmileExpression, "smile_expression"},
      {RobotAction::LookAway, "look_away"},
      {RobotAction::PullAway, "pull_away"},
  }};
};

template <>
struct EnumNames<Phase> {
  static constexpr std::array<std::pair<Phase, std::string_view>, 4> table{{
      {Phase::FreePlay, "free_play"},
      {Phase::Paradigm, "paradigm"},
      {Phase::Reunion, "reunion"},
      {Phase::FreePlay2, "free_play2"},
  }};
};

template <>
struct EnumNames<ParadigmKind> {
  static constexpr std::array<std::pair<ParadigmKind, std::string_view>, 2> table{{
      {ParadigmKind::StillFace, "sf"},
      {ParadigmKind::StillFaceTouch, "sft"},
  }};
};

template <>
struct EnumNames<HumanProfile> {
  static constexpr std::array<std::pair<HumanProfile, std::string_view>, 3> table{{
      {HumanProfile::Control, "control"},
      {HumanProfile::AvoidantHuman, "avoidant"},
      {HumanProfile::AnxiousHuman, "anxious"},
  }};
};

template <class E>
constexpr std::string_view to_string(E value) {
  for (const auto& [v, name] : EnumNames<E>::table) {
    if (v == value) return name;
  }
  return "?";
}

template <class E>
constexpr std::optional<E> parse_enum(std::string_view name) {
  for (const auto& [v, n] : EnumNames<E>::table) {
    if (n == name) return v;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Adult attachment taxonomy (metadata only; the robot implements just the
// two insecure extremes).

struct AttachmentDimensions {
  DimensionLevel anxiety;
  DimensionLevel avoidance;
  bool operator==(const AttachmentDimensions&) const = default;
};

constexpr AttachmentDimensions dimensions_of(AdultAttachmentStyle style) {
  switch (style) {
    case AdultAttachmentStyle::Secure:
      return {DimensionLevel::Low, DimensionLevel::Low};
    case AdultAttachmentStyle::Preoccupied:
      return {DimensionLevel::High, DimensionLevel::Low};
    case AdultAttachmentStyle::Dismissing:
      return {DimensionLevel::Low, DimensionLevel::High};
    case AdultAttachmentStyle::Fearful:
      return {DimensionLevel::High, DimensionLevel::High};
  }
  return {DimensionLevel::Low, DimensionLevel::Low};
}

constexpr AdultAttachmentStyle style_of(AttachmentDimensions d) {
  if (d.anxiety == DimensionLevel::Low) {
    return d.avoidance == DimensionLevel::Low ? AdultAttachmentStyle::Secure
                                              : AdultAttachmentStyle::Dismissing;
  }
  return d.avoidance == DimensionLevel::Low ? AdultAttachmentStyle::Preoccupied
                                            : AdultAttachmentStyle::Fearful;
}

// ---------------------------------------------------------------------------
// Stimulus frames

// One featurized perception sample. smile/frown are action-unit intensities,
// touch is the number of active taxels plus their mean pressure.
struct StimulusFrame {
  double t = 0.0;
  bool face_present = false;
  double smile = 0.0;
  double frown = 0.0;
  bool mutual_gaze = false;
  std::uint32_t touch_taxels = 0;
  double touch_pressure = 0.0;

  bool touch_present() const noexcept { return touch_taxels > 0; }

  bool operator==(const StimulusFrame&) const = default;
};

// Returns the frame unchanged if it is physically consistent, throws
// InvalidFrame naming the first violated rule otherwise.
inline const StimulusFrame& validate_frame(const StimulusFrame& f) {
  if (!std::isfinite(f.t) || !std::isfinite(f.smile) || !std::isfinite(f.frown) ||
      !std::isfinite(f.touch_pressure)) {
    throw InvalidFrame("non-finite value", "t");
  }
  if (f.t < 0.0) throw InvalidFrame("negative time", "t");
  if (f.smile < 0.0 || f.smile > 1.0) throw InvalidFrame("smile out of range", "smile");
  if (f.frown < 0.0 || f.frown > 1.0) throw InvalidFrame("frown out of range", "frown");
  if (f.touch_pressure < 0.0) throw InvalidFrame("negative pressure", "touch_pressure");
  if (f.touch_taxels == 0 && f.touch_pressure != 0.0) {
    throw InvalidFrame("pressure without taxels", "touch_pressure");
  }
  if (!f.face_present) {
    if (f.smile != 0.0) throw InvalidFrame("expression without face", "smile");
    if (f.frown != 0.0) throw InvalidFrame("expression without face", "frown");
    if (f.mutual_gaze) throw InvalidFrame("gaze without face", "mutual_gaze");
  }
  if (f.smile > 0.5 && f.frown > 0.5) throw InvalidFrame("contradictory expression", "frown");
  return f;
}

// ---------------------------------------------------------------------------
// Profile parameters

// Appraisal coefficients. Each profile reads only the subset its appraisal
// rule uses; the others stay at zero.
struct AppraisalWeights {
  double w_touch_comfort = 0.0;
  double w_smile_comfort = 0.0;
  double w_gaze_comfort = 0.0;
  double w_neutral_comfort = 0.0;
  double w_touch_stress = 0.0;
  double w_noface_stress = 0.0;
  double w_ignored_stress = 0.0;
  double w_frown_stress = 0.0;
  double w_gaze_stress = 0.0;
  double taxels_ref = 60.0;
  double pressure_ref = 25.0;

  bool operator==(const AppraisalWeights&) const = default;
};

struct ProfileParams {
  RobotProfileKind kind = RobotProfileKind::Anxious;
  double reactivity = 0.8;        // stress drive gain, 1/s
  double comfort_damping = 0.4;   // comfort-proportional decay gain, 1/s
  double recovery_rate = 0.05;    // return-to-baseline rate, 1/s
  double baseline = 0.2;          // resting cortisol level
  double ceiling = 1.0;           // maximum cortisol level
  double stress_gate = 0.1;       // stress below this is ignored
  AppraisalWeights weights{};

  // Analysis threshold: half of the maximum level.
  double threshold() const noexcept { return ceiling / 2.0; }

  bool operator==(const ProfileParams&) const = default;
};

inline AppraisalWeights default_weights(RobotProfileKind kind) {
  AppraisalWeights w;
  if (kind == RobotProfileKind::Anxious) {
    w.w_touch_comfort = 0.5;
    w.w_smile_comfort = 0.3;
    w.w_gaze_comfort = 0.2;
    w.w_noface_stress = 0.6;
    w.w_ignored_stress = 0.4;
    w.w_frown_stress = 0.3;
  } else {
    w.w_neutral_comfort = 0.4;
    w.w_smile_comfort = 0.2;
    w.w_touch_stress = 0.6;
    w.w_frown_stress = 0.2;
    w.w_gaze_stress = 0.2;
  }
  return w;
}

inline ProfileParams default_params(RobotProfileKind kind) {
  ProfileParams p;
  p.kind = kind;
  if (kind == RobotProfileKind::Anxious) {
    p.reactivity = 0.8;
    p.comfort_damping = 0.4;
    p.recovery_rate = 0.05;
    p.baseline = 0.2;
    p.ceiling = 1.0;
    p.stress_gate = 0.1;
  } else {
    p.reactivity = 0.5;
    p.comfort_damping = 0.5;
    p.recovery_rate = 0.15;
    p.baseline = 0.1;
    p.ceiling = 1.0;
    p.stress_gate = 0.3;
  }
  p.weights = default_weights(kind);
  return p;
}

inline const ProfileParams& validate_params(const ProfileParams& p) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(p.reactivity) || !finite(p.comfort_damping) || !finite(p.recovery_rate) ||
      !finite(p.baseline) || !finite(p.ceiling) || !finite(p.stress_gate)) {
    throw InvalidParams("non-finite value");
  }
  if (p.reactivity <= 0.0) throw InvalidParams("reactivity must be > 0");
  if (p.comfort_damping < 0.0) throw InvalidParams("comfort_damping must be >= 0");
  if (p.recovery_rate <= 0.0) throw InvalidParams("recovery_rate must be > 0");
  if (p.ceiling <= 0.0) throw InvalidParams("ceiling must be > 0");
  if (p.baseline < 0.0 || p.baseline >= p.ceiling) {
    throw InvalidParams("baseline must lie in [0, ceiling)");
  }
  if (p.baseline >= p.threshold()) {
    throw InvalidParams("baseline must lie below the analysis threshold");
  }
  if (p.stress_gate < 0.0 || p.stress_gate >= 1.0) {
    throw InvalidParams("stress_gate must lie in [0, 1)");
  }
  const auto& w = p.weights;
  for (double c : {w.w_touch_comfort, w.w_smile_comfort, w.w_gaze_comfort, w.w_neutral_comfort,
                   w.w_touch_stress, w.w_noface_stress, w.w_ignored_stress, w.w_frown_stress,
                   w.w_gaze_stress}) {
    if (!finite(c) || c < 0.0 || c > 1.0) throw InvalidParams("appraisal weight outside [0, 1]");
  }
  if (!finite(w.taxels_ref) || w.taxels_ref <= 0.0) throw InvalidParams("taxels_ref must be > 0");
  if (!finite(w.pressure_ref) || w.pressure_ref <= 0.0) {
    throw InvalidParams("pressure_ref must be > 0");
  }
  return p;
}

// ---------------------------------------------------------------------------
// Robot state

struct CortisolState {
  double level = 0.0;
  BehaviorState behavior = BehaviorState::Content;

  bool over_threshold(const ProfileParams& p) const noexcept { return level > p.threshold(); }
  bool operator==(const CortisolState&) const = default;
};

// ---------------------------------------------------------------------------
// Session configuration

struct PhaseDurations {
  double free_play = 20.0;
  double paradigm = 20.0;
  double reunion = 20.0;
  double free_play2 = 60.0;

  double total() const noexcept { return free_play + paradigm + reunion + free_play2; }
  double of(Phase ph) const noexcept {
    switch (ph) {
      case Phase::FreePlay: return free_play;
      case Phase::Paradigm: return paradigm;
      case Phase::Reunion: return reunion;
      case Phase::FreePlay2: return free_play2;
    }
    return 0.0;
  }
  bool operator==(const PhaseDurations&) const = default;
};

struct SyntheticSource {
  HumanProfile human = HumanProfile::Control;
  std::uint64_t seed = 1;
  bool operator==(const SyntheticSource&) const = default;
};

// Frames read back from a stimulus file or a recorded trace.
struct ReplaySource {
  std::filesystem::path path;
  bool operator==(const ReplaySource&) const = default;
};

// Frames arrive from a connected caretaker client.
struct LiveSource {
  bool operator==(const LiveSource&) const = default;
};

using StimulusSource = std::variant<SyntheticSource, ReplaySource, LiveSource>;

struct SessionConfig {
  ParadigmKind paradigm = ParadigmKind::StillFace;
  ProfileParams robot_profile = default_params(RobotProfileKind::Anxious);
  StimulusSource source = SyntheticSource{};
  double tick_hz = 10.0;
  PhaseDurations durations{};

  double dt() const noexcept { return 1.0 / tick_hz; }
  std::size_t ticks_in(double seconds) const noexcept {
    return static_cast<std::size_t>(std::llround(seconds * tick_hz));
  }
  std::size_t tick_count() const noexcept { return ticks_in(durations.total()); }
  double time_of_tick(std::size_t i) const noexcept { return static_cast<double>(i) / tick_hz; }

  std::optional<std::uint64_t> seed() const {
    if (const auto* s = std::get_if<SyntheticSource>(&source)) return s->seed;
    return std::nullopt;
  }

  bool operator==(const SessionConfig&) const = default;
};

// Scheduled phase of a tick index; phase boundaries fall on whole ticks.
inline Phase phase_of_tick(const SessionConfig& c, std::size_t tick) {
  std::size_t end = 0;
  for (Phase ph : kAllPhases) {
    end += c.ticks_in(c.durations.of(ph));
    if (tick < end) return ph;
  }
  throw OutOfSession("tick " + std::to_string(tick) + " is past the end of the session");
}

inline const SessionConfig& validate_config(const SessionConfig& c) {
  if (!std::isfinite(c.tick_hz) || c.tick_hz <= 0.0) throw InvalidConfig("tick_hz must be > 0");
  for (Phase ph : kAllPhases) {
    const double d = c.durations.of(ph);
    if (!std::isfinite(d) || d <= 0.0) {
      throw InvalidConfig(std::string(to_string(ph)) + " duration must be > 0");
    }
    const double ticks = d * c.tick_hz;
    if (std::abs(ticks - std::round(ticks)) > 1e-9) {
      throw InvalidConfig(std::string(to_string(ph)) +
                          " duration must be a whole number of ticks");
    }
  }
  validate_params(c.robot_profile);
  return c;
}

// ---------------------------------------------------------------------------
// Traces and derived metrics

struct TraceRecord {
  double t = 0.0;
  Phase phase = Phase::FreePlay;
  StimulusFrame frame{};
  double stress = 0.0;
  double comfort = 0.0;
  double cortisol = 0.0;
  BehaviorState behavior = BehaviorState::Content;
  RobotAction action = RobotAction::Idle;

  bool operator==(const TraceRecord&) const = default;
};

struct SessionTrace {
  SessionConfig config{};
  std::vector<TraceRecord> records;

  bool operator==(const SessionTrace&) const = default;
};

struct InteractionMetrics {
  double percent_touch = 0.0;
  double percent_smile = 0.0;
  bool interactive = false;
  std::map<Phase, double> phase_means;
  double session_mean = 0.0;
  double over_threshold_pct = 0.0;
  bool match = false;
};

struct WilcoxonResult {
  std::size_t n_effective = 0;
  double w_plus = 0.0;
  double w_minus = 0.0;
  double z = 0.0;
  double p_normal = 1.0;
  std::optional<double> p_exact;  // set when n_effective <= 12
};

}  // namespace hpa
