#include <gtest/gtest.h>

#include <map>

#include "hpa/analysis.hpp"
#include "hpa/motivation.hpp"
#include "hpa/paradigm.hpp"
#include "test_support.hpp"

namespace hpa {
namespace {

using testing::default_config;

constexpr HumanProfile kHumans[] = {HumanProfile::Control, HumanProfile::AvoidantHuman,
                                    HumanProfile::AnxiousHuman};
constexpr ParadigmKind kParadigms[] = {ParadigmKind::StillFace, ParadigmKind::StillFaceTouch};

std::vector<StimulusFrame> in_phase(const SessionConfig& c, const std::vector<StimulusFrame>& frames,
                                    Phase ph) {
  std::vector<StimulusFrame> out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (phase_of_tick(c, i) == ph) out.push_back(frames[i]);
  }
  return out;
}

TEST(PhaseAt, Examples) {
  const SessionConfig c;
  EXPECT_EQ(phase_at(10.0, c), Phase::FreePlay);
  EXPECT_EQ(phase_at(25.0, c), Phase::Paradigm);
  EXPECT_EQ(phase_at(90.0, c), Phase::FreePlay2);
}

TEST(PhaseAt, Boundaries) {
  const SessionConfig c;
  EXPECT_EQ(phase_at(0.0, c), Phase::FreePlay);
  EXPECT_EQ(phase_at(19.99, c), Phase::FreePlay);
  EXPECT_EQ(phase_at(20.0, c), Phase::Paradigm);
  EXPECT_EQ(phase_at(40.0, c), Phase::Reunion);
  EXPECT_EQ(phase_at(60.0, c), Phase::FreePlay2);
  EXPECT_EQ(phase_at(119.99, c), Phase::FreePlay2);
  EXPECT_THROW(phase_at(120.0, c), OutOfSession);
  EXPECT_THROW(phase_at(-0.1, c), OutOfSession);
  // Agrees with the tick schedule at every tick time.
  for (std::size_t i = 0; i < c.tick_count(); ++i) {
    EXPECT_EQ(phase_at(c.time_of_tick(i), c), phase_of_tick(c, i));
  }
}

TEST(GenerateStimuli, StillFaceHasNoParadigmTouch) {
  const auto c = default_config();
  const auto frames = generate_stimuli(HumanProfile::Control, ParadigmKind::StillFace, c, 7);
  for (const auto& f : in_phase(c, frames, Phase::Paradigm)) EXPECT_FALSE(f.touch_present());
}

TEST(GenerateStimuli, StillFaceTouchKeepsContact) {
  const auto c = default_config();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto frames = generate_stimuli(HumanProfile::Control, ParadigmKind::StillFaceTouch, c, seed);
    const auto paradigm = in_phase(c, frames, Phase::Paradigm);
    std::size_t touched = 0;
    for (const auto& f : paradigm) {
      if (f.touch_present()) {
        ++touched;
        EXPECT_EQ(f.touch_taxels, 60u);
        EXPECT_EQ(f.touch_pressure, 25.0);
      }
    }
    EXPECT_GE(static_cast<double>(touched), 0.95 * static_cast<double>(paradigm.size()));
  }
}

TEST(GenerateStimuli, AvoidantHumanStillFaceIsNotInteractive) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto c = default_config(RobotProfileKind::Anxious, ParadigmKind::StillFace,
                                  HumanProfile::AvoidantHuman, seed);
    const auto trace = run_session(c);
    const auto e = engagement(trace);
    EXPECT_LE(e.percent_touch, 15.0);
    EXPECT_FALSE(e.interactive);
  }
}

TEST(GenerateStimuli, ValidFramesOnTickGrid) {
  for (auto human : kHumans) {
    for (auto paradigm : kParadigms) {
      const auto c = default_config();
      const auto frames = generate_stimuli(human, paradigm, c, 3);
      ASSERT_EQ(frames.size(), 1200u);
      for (std::size_t i = 0; i < frames.size(); ++i) {
        EXPECT_NO_THROW(validate_frame(frames[i]));
        EXPECT_EQ(frames[i].t, c.time_of_tick(i));
      }
    }
  }
}

TEST(GenerateStimuli, ParadigmPhaseIsStillFace) {
  for (auto human : kHumans) {
    for (auto paradigm : kParadigms) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto c = default_config();
        for (const auto& f : in_phase(c, generate_stimuli(human, paradigm, c, seed), Phase::Paradigm)) {
          EXPECT_TRUE(f.face_present);
          EXPECT_TRUE(f.mutual_gaze);
          EXPECT_EQ(f.smile, 0.0);
          EXPECT_EQ(f.frown, 0.0);
        }
      }
    }
  }
}

TEST(GenerateStimuli, OccupancyNearTargets) {
  for (auto human : kHumans) {
    const auto target = occupancy_targets(human);
    for (auto paradigm : kParadigms) {
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto c = default_config();
        const auto frames = generate_stimuli(human, paradigm, c, seed);
        std::size_t n = 0, touch = 0, smile = 0, gaze = 0;
        for (std::size_t i = 0; i < frames.size(); ++i) {
          if (phase_of_tick(c, i) == Phase::Paradigm) continue;
          ++n;
          touch += frames[i].touch_present();
          smile += frames[i].smile > 0.0;
          gaze += frames[i].mutual_gaze;
        }
        const auto pct = [n](std::size_t k) { return static_cast<double>(k) / static_cast<double>(n); };
        EXPECT_NEAR(pct(touch), target.touch, 0.05);
        EXPECT_NEAR(pct(smile), target.smile, 0.05);
        EXPECT_NEAR(pct(gaze), target.gaze, 0.05);
      }
    }
  }
}

TEST(GenerateStimuli, SeedDeterminism) {
  const auto c = default_config();
  for (auto human : kHumans) {
    const auto a = generate_stimuli(human, ParadigmKind::StillFaceTouch, c, 12345);
    const auto b = generate_stimuli(human, ParadigmKind::StillFaceTouch, c, 12345);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, generate_stimuli(human, ParadigmKind::StillFaceTouch, c, 12346));
  }
}

TEST(GenerateStimuli, PinnedDraws) {
  // Guards the portable generator against accidental algorithm changes.
  Rng rng(1, 0);
  const auto first = rng.between(0, 999);
  Rng again(1, 0);
  EXPECT_EQ(again.between(0, 999), first);
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(BoutMask, ExactActiveCount) {
  Rng rng(9, 1);
  for (std::size_t len : {1u, 7u, 200u, 600u}) {
    for (double rate : {0.0, 0.1, 0.33, 0.5, 0.9, 1.0}) {
      for (double mean : {1.0, 15.0, 20.0, 500.0}) {
        const auto mask = detail::bout_mask(len, rate, mean, rng);
        ASSERT_EQ(mask.size(), len);
        const auto active = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
        EXPECT_EQ(active, static_cast<std::size_t>(std::llround(rate * static_cast<double>(len))));
      }
    }
  }
}

TEST(BoutMask, BoutsAreLongerThanSingleTicks) {
  Rng rng(4, 2);
  const auto mask = detail::bout_mask(600, 0.4, 20.0, rng);
  std::size_t bouts = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) bouts += mask[i] && (i == 0 || !mask[i - 1]);
  ASSERT_GT(bouts, 0u);
  EXPECT_GT(240.0 / static_cast<double>(bouts), 5.0);
}

TEST(ForcedTouch, NestedAndExactFraction) {
  const auto c = default_config();
  const auto half = forced_touch_stimuli(0.5, c);
  const auto quarter = forced_touch_stimuli(0.25, c);
  std::size_t n_half = 0;
  for (std::size_t i = 0; i < half.size(); ++i) {
    n_half += half[i].touch_present();
    if (quarter[i].touch_present()) {
      EXPECT_TRUE(half[i].touch_present());
    }
  }
  EXPECT_EQ(n_half, 600u);
  EXPECT_THROW(forced_touch_stimuli(1.5, c), InvalidArgument);
}

TEST(RunSession, AnxiousRisesDuringStillFace) {
  const auto trace = run_session(default_config(RobotProfileKind::Anxious));
  const auto m = phase_means(trace);
  EXPECT_GT(m.at(Phase::Paradigm), m.at(Phase::FreePlay));
}

TEST(RunSession, AvoidantStaysLowDuringStillFace) {
  const auto trace = run_session(default_config(RobotProfileKind::Avoidant));
  const auto m = phase_means(trace);
  EXPECT_LE(std::abs(m.at(Phase::Paradigm) - trace.config.robot_profile.baseline), 0.1);
}

TEST(RunSession, AvoidantRisesUnderStillFaceTouch) {
  const auto trace = run_session(default_config(RobotProfileKind::Avoidant, ParadigmKind::StillFaceTouch));
  const auto m = phase_means(trace);
  EXPECT_GT(m.at(Phase::Paradigm), m.at(Phase::FreePlay));
}

TEST(RunSession, CortisolEqualsRunDynamics) {
  for (auto kind : {RobotProfileKind::Anxious, RobotProfileKind::Avoidant}) {
    const auto c = default_config(kind, ParadigmKind::StillFaceTouch, HumanProfile::AnxiousHuman, 5);
    const auto trace = run_session(c);
    const auto frames = generate_stimuli(HumanProfile::AnxiousHuman, c.paradigm, c, 5);
    const auto series = run_dynamics(frames, c.robot_profile, c.tick_hz);
    ASSERT_EQ(trace.records.size(), series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
      EXPECT_EQ(trace.records[i].cortisol, series[i]);
      EXPECT_EQ(trace.records[i].frame, frames[i]);
    }
  }
}

TEST(RunSession, BehaviorFollowsStateMachine) {
  const auto c = default_config(RobotProfileKind::Anxious, ParadigmKind::StillFace,
                                HumanProfile::AvoidantHuman, 2);
  const auto trace = run_session(c);
  BehaviorState s = BehaviorState::Content;
  for (const auto& r : trace.records) {
    s = next_state(s, r.cortisol, c.robot_profile, r.frame);
    EXPECT_EQ(r.behavior, s);
    EXPECT_EQ(r.action, select_action(s, r.frame, c.robot_profile));
  }
}

TEST(RunSession, EveryTickOnce) {
  const auto trace = run_session(default_config());
  ASSERT_EQ(trace.records.size(), 1200u);
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    EXPECT_EQ(trace.records[i].t, static_cast<double>(i) / 10.0);
    EXPECT_EQ(trace.records[i].phase, phase_of_tick(trace.config, i));
  }
}

TEST(RunSession, SeedDeterminism) {
  const auto c = default_config(RobotProfileKind::Avoidant, ParadigmKind::StillFaceTouch,
                                HumanProfile::Control, 77);
  EXPECT_EQ(run_session(c), run_session(c));
}

TEST(RunSession, ReplaySource) {
  testing::TempDir dir;
  auto c = default_config(RobotProfileKind::Avoidant, ParadigmKind::StillFaceTouch);
  const auto frames = generate_stimuli(HumanProfile::Control, c.paradigm, c, 1);
  write_stimuli(StimulusHeader{c.paradigm, c.source, c.tick_hz, c.durations}, frames,
                dir / "set.jsonl");
  const auto synthetic = run_session(c);

  c.source = ReplaySource{dir / "set.jsonl"};
  const auto replayed = run_session(c);
  EXPECT_EQ(replayed.records, synthetic.records);

  c.source = ReplaySource{dir / "missing.jsonl"};
  EXPECT_THROW(run_session(c), ReplaySourceMissing);
}

TEST(RunSession, LiveSourceBelongsToService) {
  auto c = default_config();
  c.source = LiveSource{};
  EXPECT_THROW(run_session(c), InvalidConfig);
}

TEST(SimulateFrames, RejectsBadInput) {
  const auto c = default_config();
  EXPECT_THROW(simulate_frames(c, std::vector<StimulusFrame>{}), InvalidArgument);
  EXPECT_THROW(simulate_frames(c, std::vector<StimulusFrame>(1201)), InvalidArgument);
  const std::vector<StimulusFrame> two(2);
  const std::vector<Phase> one{Phase::FreePlay};
  EXPECT_THROW(simulate_frames(c, two, std::span<const Phase>(one)), InvalidArgument);
}

}  // namespace
}  // namespace hpa
