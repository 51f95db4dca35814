#pragma once

// Command-line front end. run_cli is the whole program minus main(), so the
// test suites can drive every subcommand in-process.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hpa/analysis.hpp"
#include "hpa/paradigm.hpp"
#include "hpa/report_io.hpp"
#include "hpa/server.hpp"
#include "hpa/trace_io.hpp"

namespace hpa {

inline constexpr const char* kSeedEnv = "HPA_SIM_SEED";

namespace cli_detail {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class E>
CLI::Validator names_of(const std::string& what) {
  return CLI::Validator(
      [what](std::string& value) -> std::string {
        if (parse_enum<E>(value)) return {};
        return "unknown " + what + " '" + value + "'";
      },
      what);
}

template <class E>
E parsed(const std::string& value) {
  return *parse_enum<E>(value);
}

// Writes to the file if one was named, to `out` otherwise.
template <class Fn>
void emit(const std::string& path, std::ostream& out, Fn&& write) {
  if (path.empty()) {
    write(out);
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoFailure("cannot open " + path + " for writing");
  write(file);
  file.flush();
  if (!file) throw IoFailure("write failed: " + path);
}

inline SessionConfig config_from_header(const StimulusHeader& header, RobotProfileKind profile,
                                        StimulusSource source) {
  SessionConfig config;
  config.paradigm = header.paradigm;
  config.robot_profile = default_params(profile);
  config.source = std::move(source);
  config.tick_hz = header.tick_hz;
  config.durations = header.durations;
  return config;
}

inline SessionTrace simulate_recorded(const RecordedStimuli& rec, const SessionConfig& config) {
  if (rec.phases) return simulate_frames(config, rec.frames, *rec.phases);
  return simulate_frames(config, rec.frames);
}

}  // namespace cli_detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;

  CLI::App app{"R-cortisol robot motivation simulator"};
  app.require_subcommand(1);

  // gen-stimuli
  auto* gen = app.add_subcommand("gen-stimuli", "Generate a synthetic caretaker stimulus stream");
  std::string gen_human;
  std::string gen_paradigm;
  std::optional<std::uint64_t> gen_seed;
  std::string gen_out;
  gen->add_option("--human", gen_human, "control | avoidant | anxious")
      ->required()
      ->check(names_of<HumanProfile>("human profile"));
  gen->add_option("--paradigm", gen_paradigm, "sf | sft")
      ->required()
      ->check(names_of<ParadigmKind>("paradigm"));
  gen->add_option("--seed", gen_seed, "RNG seed")->envname(kSeedEnv);
  gen->add_option("--out", gen_out, "Output file (default: stdout)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run one robot profile over a stimulus stream");
  std::string sim_profile;
  std::string sim_stimuli;
  std::string sim_human;
  std::string sim_paradigm;
  std::optional<std::uint64_t> sim_seed;
  std::string sim_out;
  sim->add_option("--profile", sim_profile, "anxious | avoidant")
      ->required()
      ->check(names_of<RobotProfileKind>("profile"));
  auto* stimuli_opt = sim->add_option("--stimuli", sim_stimuli, "Recorded stimulus file or trace");
  auto* human_opt = sim->add_option("--human", sim_human, "control | avoidant | anxious")
                        ->check(names_of<HumanProfile>("human profile"));
  sim->add_option("--paradigm", sim_paradigm, "sf | sft")->check(names_of<ParadigmKind>("paradigm"));
  sim->add_option("--seed", sim_seed, "RNG seed")->envname(kSeedEnv);
  sim->add_option("--out", sim_out, "Output trace (default: stdout)");
  stimuli_opt->excludes(human_opt);

  // replay
  auto* replay = app.add_subcommand("replay", "Re-run the dynamics on the stimuli of a trace");
  std::string replay_trace;
  std::string replay_profile;
  std::string replay_out;
  replay->add_option("--trace", replay_trace, "Trace or stimulus file")->required();
  replay->add_option("--profile", replay_profile, "anxious | avoidant")
      ->required()
      ->check(names_of<RobotProfileKind>("profile"));
  replay->add_option("--out", replay_out, "Output trace (default: stdout)");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Print session metrics for each trace");
  std::vector<std::string> analyze_traces;
  std::string analyze_out;
  analyze->add_option("--trace", analyze_traces, "Trace files")->required();
  analyze->add_option("--out", analyze_out, "Report file (default: stdout)");

  // compare
  auto* compare = app.add_subcommand("compare", "Match/mismatch report over a stimulus directory");
  std::string compare_dir;
  std::string compare_out;
  compare->add_option("--stimuli-set", compare_dir, "Directory of *.jsonl stimulus files")
      ->required();
  compare->add_option("--out", compare_out, "Report file (default: stdout)");

  // serve
  auto* serve = app.add_subcommand("serve", "Run a live session over WebSocket");
  std::uint16_t serve_port = 0;
  std::string serve_profile = "anxious";
  std::string serve_paradigm = "sf";
  std::string serve_out = "session_trace.jsonl";
  double serve_tick_hz = 10.0;
  double serve_interval_ms = 0.0;
  serve->add_option("--port", serve_port, "TCP port")->required();
  serve->add_option("--profile", serve_profile, "anxious | avoidant")
      ->check(names_of<RobotProfileKind>("profile"));
  serve->add_option("--paradigm", serve_paradigm, "sf | sft")
      ->check(names_of<ParadigmKind>("paradigm"));
  serve->add_option("--out", serve_out, "Where the session trace is written");
  serve->add_option("--tick-hz", serve_tick_hz, "Simulation ticks per second");
  serve->add_option("--tick-interval-ms", serve_interval_ms,
                    "Wall-clock tick period (default: real time)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (gen->parsed()) {
      if (!gen_seed) throw UsageError("missing --seed (or set HPA_SIM_SEED)");
      SessionConfig config;
      config.paradigm = parsed<ParadigmKind>(gen_paradigm);
      const auto human = parsed<HumanProfile>(gen_human);
      config.source = SyntheticSource{human, *gen_seed};
      const auto frames = generate_stimuli(human, config.paradigm, config, *gen_seed);
      const StimulusHeader header{config.paradigm, config.source, config.tick_hz, config.durations};
      emit(gen_out, out, [&](std::ostream& o) { write_stimuli(header, frames, o); });
      return 0;
    }

    if (sim->parsed()) {
      const auto profile = parsed<RobotProfileKind>(sim_profile);
      SessionTrace trace;
      if (!sim_stimuli.empty()) {
        const auto rec = read_stimuli(std::filesystem::path(sim_stimuli));
        trace = simulate_recorded(
            rec, config_from_header(rec.header, profile, ReplaySource{sim_stimuli}));
      } else {
        if (sim_human.empty() || sim_paradigm.empty()) {
          throw UsageError("simulate needs --stimuli FILE or --human, --paradigm and --seed");
        }
        if (!sim_seed) throw UsageError("missing --seed (or set HPA_SIM_SEED)");
        SessionConfig config;
        config.paradigm = parsed<ParadigmKind>(sim_paradigm);
        config.robot_profile = default_params(profile);
        config.source = SyntheticSource{parsed<HumanProfile>(sim_human), *sim_seed};
        trace = run_session(config);
      }
      emit(sim_out, out, [&](std::ostream& o) { write_trace(trace, o); });
      return 0;
    }

    if (replay->parsed()) {
      const auto rec = read_stimuli(std::filesystem::path(replay_trace));
      const auto config = config_from_header(rec.header, parsed<RobotProfileKind>(replay_profile),
                                             ReplaySource{replay_trace});
      const auto trace = simulate_recorded(rec, config);
      emit(replay_out, out, [&](std::ostream& o) { write_trace(trace, o); });
      return 0;
    }

    if (analyze->parsed()) {
      std::vector<Json> lines;
      for (const auto& path : analyze_traces) {
        const auto trace = read_trace(std::filesystem::path(path));
        lines.push_back(metrics_to_json(path, trace, compute_metrics(trace)));
      }
      emit(analyze_out, out, [&](std::ostream& o) {
        for (const auto& l : lines) o << l.dump() << '\n';
      });
      return 0;
    }

    if (compare->parsed()) {
      const std::filesystem::path dir(compare_dir);
      if (!std::filesystem::is_directory(dir)) {
        throw ReplaySourceMissing("not a directory: " + compare_dir);
      }
      std::vector<std::filesystem::path> files;
      for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
          files.push_back(entry.path());
        }
      }
      std::sort(files.begin(), files.end());
      if (files.empty()) throw ReplaySourceMissing("no *.jsonl stimulus files in " + compare_dir);

      std::vector<LabeledTrace> traces;
      for (const auto& file : files) {
        const auto rec = read_stimuli(file);
        for (auto kind : {RobotProfileKind::Anxious, RobotProfileKind::Avoidant}) {
          const auto config = config_from_header(rec.header, kind, ReplaySource{file});
          traces.push_back({file.filename().string(), simulate_recorded(rec, config)});
        }
      }
      const auto report = match_mismatch_report(traces);
      emit(compare_out, out, [&](std::ostream& o) {
        for (const auto& l : report_to_json(report)) o << l.dump() << '\n';
      });
      return 0;
    }

    if (serve->parsed()) {
      ServerOptions options;
      options.port = serve_port;
      options.config.paradigm = parsed<ParadigmKind>(serve_paradigm);
      options.config.robot_profile = default_params(parsed<RobotProfileKind>(serve_profile));
      options.config.source = LiveSource{};
      options.config.tick_hz = serve_tick_hz;
      options.trace_out = serve_out;
      options.handle_signals = true;
      if (serve_interval_ms > 0.0) {
        options.tick_interval = std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::duration<double, std::milli>(serve_interval_ms));
      }
      SessionServer server(std::move(options));
      out << "listening on ws://127.0.0.1:" << server.port() << std::endl;
      const auto trace = server.run();
      if (trace.records.empty()) {
        out << "session ended before any tick; no trace written" << std::endl;
      } else {
        out << "session ended after " << trace.records.size() << " ticks; trace written to "
            << serve_out << std::endl;
      }
      if (server.protocol_error()) {
        err << "error: " << *server.protocol_error() << "\n";
        return 1;
      }
      return 0;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace hpa
