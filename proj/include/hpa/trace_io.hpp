#pragma once

// Line-delimited JSON formats for stimulus streams and session traces.
//
// Every file starts with a header object (type, schema_version, config,
// seed) followed by one object per tick. Field order is fixed and numbers are
// written in shortest round-trip form, so serializing the same data twice
// gives the same bytes and reading a file back reproduces every double
// exactly. Parsing is strict: missing or unknown keys are rejected with the
// offending line number.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hpa/domain.hpp"

namespace hpa {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

// Everything a stimulus file says about where its frames came from.
struct StimulusHeader {
  ParadigmKind paradigm = ParadigmKind::StillFace;
  StimulusSource source = SyntheticSource{};
  double tick_hz = 10.0;
  PhaseDurations durations{};
  bool operator==(const StimulusHeader&) const = default;
};

struct RecordedStimuli {
  StimulusHeader header;
  std::vector<StimulusFrame> frames;
  // Present when the frames were taken from a trace; live traces may carry
  // operator phase overrides that the time schedule cannot reconstruct.
  std::optional<std::vector<Phase>> phases;
};

namespace detail {

// Reads one JSON object field by field and rejects keys nobody asked for.
class StrictObject {
 public:
  StrictObject(const Json& j, std::size_t line, std::string context)
      : j_(j), line_(line), context_(std::move(context)) {
    if (!j_.is_object()) throw SchemaViolation(line_, context_, "expected an object");
  }

  const Json& raw(std::string_view key) {
    const auto it = j_.find(std::string(key));
    if (it == j_.end()) throw SchemaViolation(line_, std::string(key), "missing field");
    seen_.insert(std::string(key));
    return *it;
  }

  bool has(std::string_view key) const { return j_.contains(std::string(key)); }

  double number(std::string_view key) {
    const auto& v = raw(key);
    if (!v.is_number()) throw SchemaViolation(line_, std::string(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw SchemaViolation(line_, std::string(key), "non-finite");
    return d;
  }

  std::uint64_t unsigned_integer(std::string_view key) {
    const auto& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw SchemaViolation(line_, std::string(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(std::string_view key) {
    const auto& v = raw(key);
    if (!v.is_boolean()) throw SchemaViolation(line_, std::string(key), "expected a boolean");
    return v.get<bool>();
  }

  std::string string(std::string_view key) {
    const auto& v = raw(key);
    if (!v.is_string()) throw SchemaViolation(line_, std::string(key), "expected a string");
    return v.get<std::string>();
  }

  template <class E>
  E enumeration(std::string_view key) {
    const auto name = string(key);
    const auto value = parse_enum<E>(name);
    if (!value) throw SchemaViolation(line_, std::string(key), "unknown value '" + name + "'");
    return *value;
  }

  StrictObject object(std::string_view key) { return StrictObject(raw(key), line_, std::string(key)); }

  // Call after all expected fields were consumed.
  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw SchemaViolation(line_, key, "unknown field");
    }
  }

  std::size_t line() const { return line_; }

 private:
  const Json& j_;
  std::size_t line_;
  std::string context_;
  std::set<std::string> seen_;
};

inline Json parse_line(const std::string& text, std::size_t line) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaViolation(line, "json", e.what());
  }
}

inline std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string s;
  while (std::getline(in, s)) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    lines.push_back(std::move(s));
  }
  // Trailing blank lines are tolerated, interior ones are not.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

inline std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string() + " for reading");
  return in;
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Object encoders. These are also the wire encoding of the session service.

inline Json durations_to_json(const PhaseDurations& d) {
  Json j;
  j["free_play"] = d.free_play;
  j["paradigm"] = d.paradigm;
  j["reunion"] = d.reunion;
  j["free_play2"] = d.free_play2;
  return j;
}

inline Json params_to_json(const ProfileParams& p) {
  Json w;
  w["w_touch_comfort"] = p.weights.w_touch_comfort;
  w["w_smile_comfort"] = p.weights.w_smile_comfort;
  w["w_gaze_comfort"] = p.weights.w_gaze_comfort;
  w["w_neutral_comfort"] = p.weights.w_neutral_comfort;
  w["w_touch_stress"] = p.weights.w_touch_stress;
  w["w_noface_stress"] = p.weights.w_noface_stress;
  w["w_ignored_stress"] = p.weights.w_ignored_stress;
  w["w_frown_stress"] = p.weights.w_frown_stress;
  w["w_gaze_stress"] = p.weights.w_gaze_stress;
  w["taxels_ref"] = p.weights.taxels_ref;
  w["pressure_ref"] = p.weights.pressure_ref;

  Json j;
  j["kind"] = to_string(p.kind);
  j["reactivity"] = p.reactivity;
  j["comfort_damping"] = p.comfort_damping;
  j["recovery_rate"] = p.recovery_rate;
  j["baseline"] = p.baseline;
  j["ceiling"] = p.ceiling;
  j["stress_gate"] = p.stress_gate;
  j["weights"] = std::move(w);
  return j;
}

inline Json source_to_json(const StimulusSource& source) {
  Json j;
  if (const auto* s = std::get_if<SyntheticSource>(&source)) {
    j["kind"] = "synthetic";
    j["human"] = to_string(s->human);
  } else if (const auto* r = std::get_if<ReplaySource>(&source)) {
    j["kind"] = "replay";
    j["path"] = r->path.generic_string();
  } else {
    j["kind"] = "live";
  }
  return j;
}

inline Json seed_to_json(const StimulusSource& source) {
  if (const auto* s = std::get_if<SyntheticSource>(&source)) return Json(s->seed);
  return Json(nullptr);
}

// Frame fields without the timestamp, which lives on the enclosing record.
inline Json frame_fields_to_json(const StimulusFrame& f) {
  Json j;
  j["face_present"] = f.face_present;
  j["smile"] = f.smile;
  j["frown"] = f.frown;
  j["mutual_gaze"] = f.mutual_gaze;
  j["touch_taxels"] = f.touch_taxels;
  j["touch_pressure"] = f.touch_pressure;
  return j;
}

inline Json config_header_json(const SessionConfig& c) {
  Json j;
  j["type"] = "trace";
  j["schema_version"] = kSchemaVersion;
  j["paradigm"] = to_string(c.paradigm);
  j["profile"] = params_to_json(c.robot_profile);
  j["source"] = source_to_json(c.source);
  j["seed"] = seed_to_json(c.source);
  j["tick_hz"] = c.tick_hz;
  j["durations"] = durations_to_json(c.durations);
  return j;
}

inline Json record_to_json(const TraceRecord& r) {
  Json j;
  j["t"] = r.t;
  j["phase"] = to_string(r.phase);
  j["frame"] = frame_fields_to_json(r.frame);
  j["stress"] = r.stress;
  j["comfort"] = r.comfort;
  j["cortisol"] = r.cortisol;
  j["behavior"] = to_string(r.behavior);
  j["action"] = to_string(r.action);
  return j;
}

// ---------------------------------------------------------------------------
// Object decoders

namespace detail {

inline PhaseDurations parse_durations(StrictObject o) {
  PhaseDurations d;
  d.free_play = o.number("free_play");
  d.paradigm = o.number("paradigm");
  d.reunion = o.number("reunion");
  d.free_play2 = o.number("free_play2");
  o.finish();
  return d;
}

inline ProfileParams parse_params(StrictObject o) {
  ProfileParams p;
  p.kind = o.enumeration<RobotProfileKind>("kind");
  p.reactivity = o.number("reactivity");
  p.comfort_damping = o.number("comfort_damping");
  p.recovery_rate = o.number("recovery_rate");
  p.baseline = o.number("baseline");
  p.ceiling = o.number("ceiling");
  p.stress_gate = o.number("stress_gate");
  auto w = o.object("weights");
  p.weights.w_touch_comfort = w.number("w_touch_comfort");
  p.weights.w_smile_comfort = w.number("w_smile_comfort");
  p.weights.w_gaze_comfort = w.number("w_gaze_comfort");
  p.weights.w_neutral_comfort = w.number("w_neutral_comfort");
  p.weights.w_touch_stress = w.number("w_touch_stress");
  p.weights.w_noface_stress = w.number("w_noface_stress");
  p.weights.w_ignored_stress = w.number("w_ignored_stress");
  p.weights.w_frown_stress = w.number("w_frown_stress");
  p.weights.w_gaze_stress = w.number("w_gaze_stress");
  p.weights.taxels_ref = w.number("taxels_ref");
  p.weights.pressure_ref = w.number("pressure_ref");
  w.finish();
  o.finish();
  return p;
}

// Source and seed are stored as siblings in the header.
inline StimulusSource parse_source(StrictObject& header) {
  auto o = header.object("source");
  const auto kind = o.string("kind");
  const auto& seed = header.raw("seed");
  StimulusSource source;
  if (kind == "synthetic") {
    SyntheticSource s;
    s.human = o.enumeration<HumanProfile>("human");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
      throw SchemaViolation(header.line(), "seed", "synthetic source needs an integer seed");
    }
    s.seed = seed.get<std::uint64_t>();
    source = s;
  } else {
    if (!seed.is_null()) throw SchemaViolation(header.line(), "seed", "expected null");
    if (kind == "replay") {
      source = ReplaySource{o.string("path")};
    } else if (kind == "live") {
      source = LiveSource{};
    } else {
      throw SchemaViolation(header.line(), "kind", "unknown source kind '" + kind + "'");
    }
  }
  o.finish();
  return source;
}

inline StimulusFrame parse_frame_fields(StrictObject& o, double t) {
  StimulusFrame f;
  f.t = t;
  f.face_present = o.boolean("face_present");
  f.smile = o.number("smile");
  f.frown = o.number("frown");
  f.mutual_gaze = o.boolean("mutual_gaze");
  const auto taxels = o.unsigned_integer("touch_taxels");
  if (taxels > UINT32_MAX) throw SchemaViolation(o.line(), "touch_taxels", "too large");
  f.touch_taxels = static_cast<std::uint32_t>(taxels);
  f.touch_pressure = o.number("touch_pressure");
  o.finish();
  try {
    validate_frame(f);
  } catch (const InvalidFrame& e) {
    throw SchemaViolation(o.line(), e.field(), e.reason());
  }
  return f;
}

inline void check_header_type(StrictObject& header, std::string_view expected) {
  const auto type = header.string("type");
  if (type != expected) {
    throw SchemaViolation(header.line(), "type",
                          "expected '" + std::string(expected) + "', got '" + type + "'");
  }
  const auto& v = header.raw("schema_version");
  if (!v.is_number_integer() || v.get<std::int64_t>() != kSchemaVersion) {
    throw SchemaViolation(header.line(), "schema_version", "unsupported version");
  }
}

inline void check_timestamp(double t, std::size_t index, double tick_hz, std::size_t line) {
  const double expected = static_cast<double>(index) / tick_hz;
  if (std::abs(t - expected) > 1e-9) {
    throw SchemaViolation(line, "t", "expected " + std::to_string(expected));
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Session traces

inline void write_trace(const SessionTrace& trace, std::ostream& out) {
  if (trace.records.empty()) throw SchemaViolation(0, "records", "no records");
  out << config_header_json(trace.config).dump() << '\n';
  for (const auto& r : trace.records) out << record_to_json(r).dump() << '\n';
  if (!out) throw IoFailure("write failed");
}

inline void write_trace(const SessionTrace& trace, const std::filesystem::path& path) {
  if (trace.records.empty()) throw SchemaViolation(0, "records", "no records");
  auto out = detail::open_for_write(path);
  write_trace(trace, out);
  out.flush();
  if (!out) throw IoFailure("write failed: " + path.string());
}

inline std::string trace_to_string(const SessionTrace& trace) {
  std::ostringstream out;
  write_trace(trace, out);
  return out.str();
}

inline SessionConfig parse_trace_header(const Json& j, std::size_t line) {
  detail::StrictObject header(j, line, "header");
  detail::check_header_type(header, "trace");
  SessionConfig config;
  config.paradigm = header.enumeration<ParadigmKind>("paradigm");
  config.robot_profile = detail::parse_params(header.object("profile"));
  config.source = detail::parse_source(header);
  config.tick_hz = header.number("tick_hz");
  config.durations = detail::parse_durations(header.object("durations"));
  header.finish();
  try {
    validate_config(config);
  } catch (const Error& e) {
    throw SchemaViolation(line, "config", e.what());
  }
  return config;
}

inline SessionTrace read_trace(std::istream& in) {
  const auto lines = detail::read_lines(in);
  if (lines.empty()) throw SchemaViolation(1, "header", "empty file");

  SessionTrace trace;
  trace.config = parse_trace_header(detail::parse_line(lines[0], 1), 1);
  const auto& config = trace.config;
  const std::size_t expected = config.tick_count();
  if (lines.size() < 2) throw SchemaViolation(2, "records", "no records");
  if (lines.size() - 1 > expected) {
    throw SchemaViolation(expected + 2, "records", "more records than session ticks");
  }
  const bool synthetic = std::holds_alternative<SyntheticSource>(config.source);
  if (synthetic && lines.size() - 1 != expected) {
    throw SchemaViolation(lines.size() + 1, "records",
                          "expected " + std::to_string(expected) + " records");
  }

  trace.records.reserve(lines.size() - 1);
  Phase previous = Phase::FreePlay;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    const std::size_t index = i - 1;
    const auto j = detail::parse_line(lines[i], line);
    detail::StrictObject o(j, line, "record");
    TraceRecord r;
    r.t = o.number("t");
    detail::check_timestamp(r.t, index, config.tick_hz, line);
    r.phase = o.enumeration<Phase>("phase");
    {
      auto frame = o.object("frame");
      r.frame = detail::parse_frame_fields(frame, r.t);
    }
    r.stress = o.number("stress");
    r.comfort = o.number("comfort");
    r.cortisol = o.number("cortisol");
    r.behavior = o.enumeration<BehaviorState>("behavior");
    r.action = o.enumeration<RobotAction>("action");
    o.finish();

    if (r.stress < 0.0 || r.stress > 1.0) throw SchemaViolation(line, "stress", "outside [0, 1]");
    if (r.comfort < 0.0 || r.comfort > 1.0) {
      throw SchemaViolation(line, "comfort", "outside [0, 1]");
    }
    if (r.cortisol < 0.0 || r.cortisol > config.robot_profile.ceiling) {
      throw SchemaViolation(line, "cortisol", "outside [0, ceiling]");
    }
    // Phases never run behind the clock and never go backwards; they may run
    // ahead when an operator advanced them during a live session.
    const Phase scheduled = phase_of_tick(config, index);
    if (r.phase < scheduled || r.phase < previous) {
      throw SchemaViolation(line, "phase", "inconsistent with t");
    }
    previous = r.phase;
    trace.records.push_back(r);
  }
  return trace;
}

inline SessionTrace read_trace(const std::filesystem::path& path) {
  auto in = detail::open_for_read(path);
  return read_trace(in);
}

inline SessionTrace trace_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_trace(in);
}

// ---------------------------------------------------------------------------
// Stimulus streams

inline Json stimulus_header_json(const StimulusHeader& h) {
  Json j;
  j["type"] = "stimuli";
  j["schema_version"] = kSchemaVersion;
  j["paradigm"] = to_string(h.paradigm);
  j["source"] = source_to_json(h.source);
  j["seed"] = seed_to_json(h.source);
  j["tick_hz"] = h.tick_hz;
  j["durations"] = durations_to_json(h.durations);
  return j;
}

inline Json stimulus_frame_json(const StimulusFrame& f) {
  Json j;
  j["t"] = f.t;
  const auto fields = frame_fields_to_json(f);
  for (const auto& [k, v] : fields.items()) j[k] = v;
  return j;
}

inline void write_stimuli(const StimulusHeader& header, std::span<const StimulusFrame> frames,
                          std::ostream& out) {
  if (frames.empty()) throw SchemaViolation(0, "frames", "no frames");
  out << stimulus_header_json(header).dump() << '\n';
  for (const auto& f : frames) out << stimulus_frame_json(f).dump() << '\n';
  if (!out) throw IoFailure("write failed");
}

inline void write_stimuli(const StimulusHeader& header, std::span<const StimulusFrame> frames,
                          const std::filesystem::path& path) {
  if (frames.empty()) throw SchemaViolation(0, "frames", "no frames");
  auto out = detail::open_for_write(path);
  write_stimuli(header, frames, out);
  out.flush();
  if (!out) throw IoFailure("write failed: " + path.string());
}

// Accepts either a stimulus file or a session trace; a trace contributes its
// recorded frames and phases.
inline RecordedStimuli read_stimuli(std::istream& in) {
  const auto lines = detail::read_lines(in);
  if (lines.empty()) throw SchemaViolation(1, "header", "empty file");
  const auto first = detail::parse_line(lines[0], 1);
  if (first.is_object() && first.contains("type") && first["type"] == "trace") {
    std::string joined;
    for (const auto& l : lines) joined += l + '\n';
    const auto trace = trace_from_string(joined);
    RecordedStimuli rec;
    rec.header = {trace.config.paradigm, trace.config.source, trace.config.tick_hz,
                  trace.config.durations};
    rec.phases.emplace();
    for (const auto& r : trace.records) {
      rec.frames.push_back(r.frame);
      rec.phases->push_back(r.phase);
    }
    return rec;
  }

  detail::StrictObject header(first, 1, "header");
  detail::check_header_type(header, "stimuli");
  RecordedStimuli rec;
  rec.header.paradigm = header.enumeration<ParadigmKind>("paradigm");
  rec.header.source = detail::parse_source(header);
  rec.header.tick_hz = header.number("tick_hz");
  rec.header.durations = detail::parse_durations(header.object("durations"));
  header.finish();
  {
    SessionConfig probe;
    probe.tick_hz = rec.header.tick_hz;
    probe.durations = rec.header.durations;
    try {
      validate_config(probe);
    } catch (const Error& e) {
      throw SchemaViolation(1, "config", e.what());
    }
    if (lines.size() < 2) throw SchemaViolation(2, "frames", "no frames");
    if (lines.size() - 1 > probe.tick_count()) {
      throw SchemaViolation(probe.tick_count() + 2, "frames", "more frames than session ticks");
    }
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    const auto j = detail::parse_line(lines[i], line);
    detail::StrictObject o(j, line, "frame");
    const double t = o.number("t");
    detail::check_timestamp(t, i - 1, rec.header.tick_hz, line);
    rec.frames.push_back(detail::parse_frame_fields(o, t));
  }
  return rec;
}

inline RecordedStimuli read_stimuli(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw ReplaySourceMissing("stimulus source not found: " + path.string());
  }
  auto in = detail::open_for_read(path);
  return read_stimuli(in);
}

}  // namespace hpa
