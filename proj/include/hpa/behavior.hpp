#pragma once

// Action selection. Each profile orders its reachable states into bands of
// cortisol level; a transition to a neighbouring band needs the level to be
// at least kHysteresisMargin past the shared boundary.

#include <algorithm>
#include <span>
#include <string>

#include "hpa/domain.hpp"

namespace hpa {

inline constexpr double kHysteresisMargin = 0.05;

namespace detail {

inline constexpr std::array<BehaviorState, 3> kAnxiousBands = {
    BehaviorState::Content, BehaviorState::SeekingContact, BehaviorState::Distressed};
inline constexpr std::array<double, 2> kAnxiousBounds = {0.35, 0.7};

inline constexpr std::array<BehaviorState, 2> kAvoidantBands = {BehaviorState::Content,
                                                                BehaviorState::Withdrawn};
inline constexpr std::array<double, 1> kAvoidantBounds = {0.5};

struct BandLayout {
  std::span<const BehaviorState> states;
  std::span<const double> upper_bounds;  // upper_bounds[i] separates band i and i+1
};

inline BandLayout layout_for(RobotProfileKind kind) {
  if (kind == RobotProfileKind::Anxious) return {kAnxiousBands, kAnxiousBounds};
  return {kAvoidantBands, kAvoidantBounds};
}

}  // namespace detail

inline bool reachable(BehaviorState state, RobotProfileKind kind) {
  const auto layout = detail::layout_for(kind);
  return std::find(layout.states.begin(), layout.states.end(), state) != layout.states.end();
}

inline BehaviorState next_state(BehaviorState current, double cortisol,
                                const ProfileParams& params, const StimulusFrame& /*frame*/) {
  const auto layout = detail::layout_for(params.kind);
  const auto it = std::find(layout.states.begin(), layout.states.end(), current);
  if (it == layout.states.end()) {
    throw ProfileStateMismatch(std::string(to_string(current)) + " is not reachable for the " +
                               std::string(to_string(params.kind)) + " profile");
  }
  auto band = static_cast<std::size_t>(it - layout.states.begin());
  while (band + 1 < layout.states.size() &&
         cortisol >= layout.upper_bounds[band] + kHysteresisMargin) {
    ++band;
  }
  while (band > 0 && cortisol <= layout.upper_bounds[band - 1] - kHysteresisMargin) {
    --band;
  }
  return layout.states[band];
}

inline RobotAction select_action(BehaviorState state, const StimulusFrame& frame,
                                 const ProfileParams& /*params*/) {
  switch (state) {
    case BehaviorState::Content:
      if (frame.smile > 0.5) return RobotAction::SmileExpression;
      if (frame.face_present) return RobotAction::TurnTorso;
      return RobotAction::Idle;
    case BehaviorState::SeekingContact:
      return frame.face_present ? RobotAction::StretchArms : RobotAction::VocalCall;
    case BehaviorState::Distressed:
      return RobotAction::VocalCall;
    case BehaviorState::Withdrawn:
      return frame.touch_present() ? RobotAction::PullAway : RobotAction::LookAway;
  }
  return RobotAction::Idle;
}

}  // namespace hpa
