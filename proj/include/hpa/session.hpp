#pragma once

// Live session engine: the transport-free core of the session service.
//
// Client messages are queued and applied only at tick boundaries, and each
// tick advances the same SessionStepper the offline runner uses, so a live
// trace replayed through simulate_frames reproduces its cortisol series
// exactly.
//
// Client -> server:
//   {"type":"stimulus", "touch_taxels":N, "touch_pressure":P, "face_present":B,
//    "smile":S, "frown":F, "mutual_gaze":B}        omitted fields are 0/false
//   {"type":"phase_override", "phase":"reunion"}
//   {"type":"stop"}
// Server -> client:
//   {"type":"hello", "schema_version":1, "config":{...}}
//   {"type":"tick", "t", "phase", "stress", "comfort", "cortisol", "behavior", "action"}
//   {"type":"rejected", "reason":"session occupied"}
//   {"type":"error", "reason":...}
//   {"type":"end", "records":N}

#include <algorithm>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "hpa/domain.hpp"
#include "hpa/paradigm.hpp"
#include "hpa/trace_io.hpp"

namespace hpa {

// State a client can change: the held stimulus, the operator's phase floor
// and the stop flag.
struct LiveState {
  StimulusFrame held{};
  std::optional<Phase> phase_floor;
  bool stopped = false;
  bool operator==(const LiveState&) const = default;
};

namespace detail {

inline double message_number(const Json& msg, const char* key) {
  if (!msg.contains(key)) return 0.0;
  const auto& v = msg.at(key);
  if (!v.is_number()) throw ClientProtocolError(std::string(key) + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ClientProtocolError(std::string(key) + " must be finite");
  return d;
}

// Booleans may be sent as true/false or 0/1.
inline bool message_flag(const Json& msg, const char* key) {
  if (!msg.contains(key)) return false;
  const auto& v = msg.at(key);
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer() && (v.get<std::int64_t>() == 0 || v.get<std::int64_t>() == 1)) {
    return v.get<std::int64_t>() == 1;
  }
  throw ClientProtocolError(std::string(key) + " must be a boolean");
}

inline void reject_unknown_keys(const Json& msg, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : msg.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ClientProtocolError("unknown field '" + key + "'");
    }
  }
}

}  // namespace detail

inline LiveState apply_client_message(LiveState state, const Json& msg) {
  if (!msg.is_object() || !msg.contains("type") || !msg.at("type").is_string()) {
    throw ClientProtocolError("message needs a string 'type'");
  }
  const auto type = msg.at("type").get<std::string>();
  if (type == "stimulus") {
    detail::reject_unknown_keys(msg, {"type", "touch_taxels", "touch_pressure", "face_present",
                                      "smile", "frown", "mutual_gaze"});
    StimulusFrame f;
    const double taxels = detail::message_number(msg, "touch_taxels");
    if (taxels < 0.0 || taxels != std::floor(taxels) || taxels > 1e6) {
      throw ClientProtocolError("touch_taxels must be a non-negative integer");
    }
    f.touch_taxels = static_cast<std::uint32_t>(taxels);
    f.touch_pressure = detail::message_number(msg, "touch_pressure");
    f.face_present = detail::message_flag(msg, "face_present");
    f.smile = detail::message_number(msg, "smile");
    f.frown = detail::message_number(msg, "frown");
    f.mutual_gaze = detail::message_flag(msg, "mutual_gaze");
    try {
      validate_frame(f);
    } catch (const InvalidFrame& e) {
      throw ClientProtocolError(e.reason());
    }
    state.held = f;
  } else if (type == "phase_override") {
    detail::reject_unknown_keys(msg, {"type", "phase"});
    if (!msg.contains("phase") || !msg.at("phase").is_string()) {
      throw ClientProtocolError("phase_override needs a string 'phase'");
    }
    const auto phase = parse_enum<Phase>(msg.at("phase").get<std::string>());
    if (!phase) throw ClientProtocolError("unknown phase");
    if (state.phase_floor && *phase < *state.phase_floor) {
      throw ClientProtocolError("phase cannot move backwards");
    }
    state.phase_floor = *phase;
  } else if (type == "stop") {
    detail::reject_unknown_keys(msg, {"type"});
    state.stopped = true;
  } else {
    throw ClientProtocolError("unknown message type '" + type + "'");
  }
  return state;
}

inline LiveState apply_client_message(LiveState state, std::string_view text) {
  Json msg;
  try {
    msg = Json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    throw ClientProtocolError("malformed JSON");
  }
  return apply_client_message(std::move(state), msg);
}

inline Json tick_message(const TraceRecord& r) {
  Json j;
  j["type"] = "tick";
  j["t"] = r.t;
  j["phase"] = to_string(r.phase);
  j["stress"] = r.stress;
  j["comfort"] = r.comfort;
  j["cortisol"] = r.cortisol;
  j["behavior"] = to_string(r.behavior);
  j["action"] = to_string(r.action);
  return j;
}

class SessionEngine {
 public:
  explicit SessionEngine(SessionConfig config)
      : stepper_(config.robot_profile, config.tick_hz) {
    config.source = LiveSource{};
    validate_config(config);
    trace_.config = std::move(config);
  }

  void enqueue(std::string message) { pending_.push_back(std::move(message)); }

  // Applies queued messages, then advances one tick. Returns nullopt once the
  // session is over (stopped or out of time). A ClientProtocolError ends the
  // session before it propagates.
  std::optional<TraceRecord> tick() {
    if (finished_) return std::nullopt;
    while (!pending_.empty()) {
      auto msg = std::move(pending_.front());
      pending_.pop_front();
      try {
        live_ = apply_client_message(std::move(live_), std::string_view(msg));
      } catch (const ClientProtocolError&) {
        finished_ = true;
        pending_.clear();
        throw;
      }
    }
    const auto& config = trace_.config;
    if (live_.stopped || trace_.records.size() >= config.tick_count()) {
      finished_ = true;
      return std::nullopt;
    }
    const std::size_t i = trace_.records.size();
    Phase phase = phase_of_tick(config, i);
    if (live_.phase_floor) phase = std::max(phase, *live_.phase_floor);
    trace_.records.push_back(stepper_.advance(config.time_of_tick(i), phase, live_.held));
    return trace_.records.back();
  }

  void finish() { finished_ = true; }
  bool finished() const noexcept { return finished_; }
  const SessionTrace& trace() const noexcept { return trace_; }
  const LiveState& live_state() const noexcept { return live_; }

  Json hello() const {
    Json j;
    j["type"] = "hello";
    j["schema_version"] = kSchemaVersion;
    j["config"] = config_header_json(trace_.config);
    return j;
  }

 private:
  SessionStepper stepper_;
  SessionTrace trace_;
  LiveState live_;
  std::deque<std::string> pending_;
  bool finished_ = false;
};

}  // namespace hpa
