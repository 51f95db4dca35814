#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hpa/analysis.hpp"
#include "hpa/paradigm.hpp"
#include "test_support.hpp"

namespace hpa {
namespace {

using testing::default_config;
using testing::trace_with;

// Average ranks of |d| computed the slow way: rank = 1 + #smaller + (#equal-1)/2.
std::vector<double> naive_ranks(const std::vector<double>& d) {
  std::vector<double> ranks;
  for (double x : d) {
    double smaller = 0, equal = 0;
    for (double y : d) {
      if (std::abs(y) < std::abs(x)) ++smaller;
      if (std::abs(y) == std::abs(x)) ++equal;
    }
    ranks.push_back(1.0 + smaller + (equal - 1.0) / 2.0);
  }
  return ranks;
}

// Two-sided exact p by enumerating every sign assignment.
double brute_force_p(const std::vector<double>& diffs) {
  std::vector<double> d;
  for (double x : diffs) {
    if (x != 0.0) d.push_back(x);
  }
  const auto ranks = naive_ranks(d);
  double total = 0, observed = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    total += ranks[i];
    if (d[i] > 0) observed += ranks[i];
  }
  const double spread = std::abs(observed - total / 2.0);
  const std::size_t n = d.size();
  std::size_t extreme = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) w += ranks[i];
    }
    if (std::abs(w - total / 2.0) >= spread - 1e-9) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(std::size_t{1} << n);
}

std::vector<std::pair<double, double>> pairs_from_diffs(const std::vector<double>& diffs) {
  std::vector<std::pair<double, double>> pairs;
  for (double d : diffs) pairs.emplace_back(10.0 + d, 10.0);
  return pairs;
}

// Trace whose first `touch` records carry touch and the next `smile` records
// carry a smile.
SessionTrace engagement_trace(std::size_t touch, std::size_t smile) {
  const auto c = default_config();
  std::vector<StimulusFrame> frames(c.tick_count(), testing::neutral_face());
  for (std::size_t i = 0; i < touch; ++i) frames[i] = testing::full_touch(frames[i]);
  for (std::size_t i = touch; i < touch + smile; ++i) frames[i].smile = 1.0;
  return trace_with(c, std::vector<double>(c.tick_count(), 0.2), frames);
}

TEST(PhaseMeans, ConstantTrace) {
  const auto c = default_config();
  const auto m = phase_means(trace_with(c, std::vector<double>(1200, 0.2)));
  ASSERT_EQ(m.size(), 4u);
  for (const auto& [ph, v] : m) EXPECT_DOUBLE_EQ(v, 0.2);
}

TEST(PhaseMeans, LinearRamp) {
  const auto c = default_config();
  std::vector<double> cortisol;
  for (std::size_t i = 0; i < 1200; ++i) cortisol.push_back(c.time_of_tick(i) / 120.0);
  const auto m = phase_means(trace_with(c, cortisol));
  // Closed-form continuous means; one tick of quantization is 0.1/120.
  const double tick = 0.1 / 120.0;
  EXPECT_NEAR(m.at(Phase::FreePlay), 1.0 / 12.0, tick);
  EXPECT_NEAR(m.at(Phase::Paradigm), 3.0 / 12.0, tick);
  EXPECT_NEAR(m.at(Phase::Reunion), 5.0 / 12.0, tick);
  EXPECT_NEAR(m.at(Phase::FreePlay2), 9.0 / 12.0, tick);
}

TEST(PhaseMeans, AnxiousStillFaceRises) {
  const auto m = phase_means(run_session(default_config()));
  EXPECT_GT(m.at(Phase::Paradigm), m.at(Phase::FreePlay));
}

TEST(PhaseMeans, EmptyPhaseIsAnError) {
  const auto c = default_config();
  EXPECT_THROW(phase_means(trace_with(c, std::vector<double>(300, 0.2))), EmptyPhase);
}

TEST(Engagement, Examples) {
  auto e = engagement(engagement_trace(240, 240));
  EXPECT_DOUBLE_EQ(e.percent_touch, 20.0);
  EXPECT_DOUBLE_EQ(e.percent_smile, 20.0);
  EXPECT_TRUE(e.interactive);

  e = engagement(engagement_trace(240, 180));
  EXPECT_DOUBLE_EQ(e.percent_smile, 15.0);
  EXPECT_FALSE(e.interactive);

  const auto c = default_config();
  e = engagement(trace_with(c, std::vector<double>(1200, 0.2)));
  EXPECT_EQ(e.percent_touch, 0.0);
  EXPECT_EQ(e.percent_smile, 0.0);
  EXPECT_FALSE(e.interactive);
}

TEST(Engagement, SmileCutoffIsStrict) {
  const auto c = default_config();
  std::vector<StimulusFrame> frames(1200, testing::neutral_face());
  for (auto& f : frames) f.smile = 0.5;
  EXPECT_EQ(engagement(trace_with(c, std::vector<double>(1200, 0.2), frames)).percent_smile, 0.0);
}

TEST(OverThreshold, Examples) {
  const auto c = default_config();
  const auto& p = c.robot_profile;
  EXPECT_EQ(over_threshold_pct(trace_with(c, std::vector<double>(1200, 0.2)), p), 0.0);
  EXPECT_EQ(over_threshold_pct(trace_with(c, std::vector<double>(1200, 0.8)), p), 100.0);
  EXPECT_EQ(over_threshold_pct(trace_with(c, std::vector<double>(1200, 0.5)), p), 0.0);
  std::vector<double> half(1200, 0.2);
  std::fill(half.begin(), half.begin() + 300, 0.9);
  EXPECT_DOUBLE_EQ(over_threshold_pct(trace_with(c, half), p), 25.0);
}

TEST(MatchLabel, TruthTable) {
  EXPECT_TRUE(match_label(RobotProfileKind::Anxious, true));
  EXPECT_FALSE(match_label(RobotProfileKind::Anxious, false));
  EXPECT_FALSE(match_label(RobotProfileKind::Avoidant, true));
  EXPECT_TRUE(match_label(RobotProfileKind::Avoidant, false));
}

TEST(Wilcoxon, SixUniformPairs) {
  const auto r = wilcoxon_signed_rank(pairs_from_diffs({1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(r.n_effective, 6u);
  EXPECT_EQ(r.w_plus, 21.0);
  EXPECT_EQ(r.w_minus, 0.0);
  EXPECT_NEAR(std::abs(r.z), 2.2014, 1e-4);
  EXPECT_NEAR(r.p_normal, 0.0277, 1e-4);
  ASSERT_TRUE(r.p_exact);
  EXPECT_DOUBLE_EQ(*r.p_exact, 2.0 / 64.0);
}

TEST(Wilcoxon, ThreePairsExact) {
  const auto r = wilcoxon_signed_rank(pairs_from_diffs({1, -2, 3}));
  EXPECT_EQ(r.w_plus, 4.0);
  EXPECT_EQ(r.w_minus, 2.0);
  ASSERT_TRUE(r.p_exact);
  EXPECT_DOUBLE_EQ(*r.p_exact, 0.75);
  EXPECT_DOUBLE_EQ(*r.p_exact, brute_force_p({1, -2, 3}));
}

TEST(Wilcoxon, AllZeroDifferences) {
  EXPECT_THROW(wilcoxon_signed_rank({{5.0, 5.0}, {3.0, 3.0}}), InsufficientData);
}

TEST(Wilcoxon, ZerosDroppedAndTiesAveraged) {
  const auto r = wilcoxon_signed_rank(pairs_from_diffs({0, 2, -2, 5, 0}));
  EXPECT_EQ(r.n_effective, 3u);
  EXPECT_EQ(r.w_plus, 1.5 + 3.0);
  EXPECT_EQ(r.w_minus, 1.5);
  EXPECT_DOUBLE_EQ(*r.p_exact, brute_force_p({2, -2, 5}));
}

TEST(Wilcoxon, ExactMatchesBruteForce) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> value(-6, 6);
  std::uniform_int_distribution<int> size(1, 12);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> diffs(static_cast<std::size_t>(size(rng)));
    for (auto& d : diffs) d = value(rng);  // small range forces ties and zeros
    if (std::all_of(diffs.begin(), diffs.end(), [](double d) { return d == 0.0; })) diffs[0] = 1;
    const auto r = wilcoxon_signed_rank(pairs_from_diffs(diffs));
    ASSERT_TRUE(r.p_exact);
    EXPECT_NEAR(*r.p_exact, brute_force_p(diffs), 1e-12);
    const double n = static_cast<double>(r.n_effective);
    EXPECT_DOUBLE_EQ(r.w_plus + r.w_minus, n * (n + 1) / 2);
  }
}

// Without a continuity correction the normal tail sits up to about half a
// rank step below the exact one near the center, so the tight band is
// checked where the test is used for inference.
void check_normal_band(const WilcoxonResult& r) {
  ASSERT_TRUE(r.p_exact);
  EXPECT_NEAR(*r.p_exact, r.p_normal, 0.06);
  if (*r.p_exact <= 0.1) {
    EXPECT_NEAR(*r.p_exact, r.p_normal, 0.03);
  }
}

TEST(Wilcoxon, NormalApproximationTracksExact) {
  // Every attainable rank sum for untied ranks 1..n.
  for (int n = 10; n <= 12; ++n) {
    for (int w = 0; w <= n * (n + 1) / 2; ++w) {
      std::vector<double> diffs;
      int rest = w;
      for (int k = n; k >= 1; --k) {
        diffs.push_back(k <= rest ? k : -k);
        if (k <= rest) rest -= k;
      }
      const auto r = wilcoxon_signed_rank(pairs_from_diffs(diffs));
      ASSERT_EQ(r.w_plus, w);
      check_normal_band(r);
    }
  }
  // Randomized continuous inputs.
  std::mt19937_64 rng(77);
  std::normal_distribution<double> noise(0.3, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    for (std::size_t n : {10u, 11u, 12u}) {
      std::vector<double> diffs(n);
      for (auto& d : diffs) d = noise(rng);
      check_normal_band(wilcoxon_signed_rank(pairs_from_diffs(diffs)));
    }
  }
}

TEST(Wilcoxon, NoExactAboveTwelve) {
  std::vector<double> diffs(13);
  for (std::size_t i = 0; i < diffs.size(); ++i) diffs[i] = static_cast<double>(i + 1);
  EXPECT_FALSE(wilcoxon_signed_rank(pairs_from_diffs(diffs)).p_exact);
}

TEST(AnalysisProperty, PercentsIgnoreRecordOrder) {
  const auto trace = run_session(default_config(RobotProfileKind::Anxious, ParadigmKind::StillFaceTouch,
                                                HumanProfile::Control, 9));
  auto shuffled = trace;
  std::mt19937_64 rng(1);
  std::shuffle(shuffled.records.begin(), shuffled.records.end(), rng);
  const auto a = engagement(trace);
  const auto b = engagement(shuffled);
  EXPECT_EQ(a.percent_touch, b.percent_touch);
  EXPECT_EQ(a.percent_smile, b.percent_smile);
  EXPECT_EQ(a.interactive, b.interactive);
  EXPECT_EQ(over_threshold_pct(trace, trace.config.robot_profile),
            over_threshold_pct(shuffled, trace.config.robot_profile));
}

TEST(AnalysisProperty, TouchMonotonicity) {
  for (auto kind : {RobotProfileKind::Anxious, RobotProfileKind::Avoidant}) {
    const auto c = default_config(kind);
    double prev = kind == RobotProfileKind::Anxious ? 2.0 : -1.0;
    for (double fraction : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const auto trace = simulate_frames(c, forced_touch_stimuli(fraction, c));
      EXPECT_NEAR(engagement(trace).percent_touch, 100.0 * fraction, 1e-9);
      const double mean = session_mean(trace);
      if (kind == RobotProfileKind::Anxious) {
        EXPECT_LE(mean, prev);
      } else {
        EXPECT_GE(mean, prev);
      }
      prev = mean;
    }
  }
}

TEST(ComputeMetrics, CombinesEverything) {
  const auto trace = run_session(default_config(RobotProfileKind::Avoidant, ParadigmKind::StillFace,
                                                HumanProfile::AvoidantHuman, 4));
  const auto m = compute_metrics(trace);
  EXPECT_EQ(m.phase_means, phase_means(trace));
  EXPECT_EQ(m.session_mean, session_mean(trace));
  EXPECT_FALSE(m.interactive);
  EXPECT_TRUE(m.match);
}

std::vector<LabeledTrace> both_profiles(HumanProfile human, ParadigmKind paradigm,
                                        std::uint64_t seed) {
  std::vector<LabeledTrace> out;
  for (auto kind : {RobotProfileKind::Anxious, RobotProfileKind::Avoidant}) {
    out.push_back({std::string(to_string(human)) + "_" + std::to_string(seed),
                   run_session(default_config(kind, paradigm, human, seed))});
  }
  return out;
}

TEST(MatchMismatchReport, MismatchMoreOftenOverThreshold) {
  std::vector<LabeledTrace> traces;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (auto& t : both_profiles(HumanProfile::AnxiousHuman, ParadigmKind::StillFace, seed)) traces.push_back(t);
  }
  for (std::uint64_t seed : {4u, 5u, 6u}) {
    for (auto& t : both_profiles(HumanProfile::AvoidantHuman, ParadigmKind::StillFace, seed)) traces.push_back(t);
  }
  const auto report = match_mismatch_report(traces);
  ASSERT_EQ(report.sets.size(), 6u);
  for (const auto& c : report.sets) EXPECT_GT(c.mismatch_pct(), c.match_pct()) << c.stimulus_set;
  ASSERT_EQ(report.summaries.size(), 1u);
  const auto& s = report.summaries[0];
  EXPECT_EQ(s.n_pairs, 6u);
  EXPECT_NEAR(std::abs(s.test.z), 2.2014, 1e-4);
  EXPECT_NEAR(s.test.p_normal, 0.0277, 1e-4);
}

TEST(MatchMismatchReport, EqualPairIsInsufficient) {
  // A silent, empty room never pushes either profile over threshold.
  std::vector<LabeledTrace> traces;
  for (auto kind : {RobotProfileKind::Anxious, RobotProfileKind::Avoidant}) {
    auto c = default_config(kind);
    std::vector<StimulusFrame> frames(c.tick_count(), testing::neutral_face());
    for (auto& f : frames) f.smile = 1.0;
    traces.push_back({"calm", simulate_frames(c, frames)});
  }
  EXPECT_THROW(match_mismatch_report(traces), InsufficientData);
}

TEST(MatchMismatchReport, NeedsBothProfilesPerSet) {
  auto traces = both_profiles(HumanProfile::Control, ParadigmKind::StillFace, 1);
  traces.pop_back();
  EXPECT_THROW(match_mismatch_report(traces), InvalidArgument);
  auto doubled = both_profiles(HumanProfile::Control, ParadigmKind::StillFace, 1);
  doubled.push_back(doubled.front());
  EXPECT_THROW(match_mismatch_report(doubled), InvalidArgument);
}

}  // namespace
}  // namespace hpa
