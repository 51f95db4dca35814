#pragma once

// Session metrics and statistics: per-phase mean cortisol, engagement
// (percent of touch/smile frames and the interactive label), the fraction of
// time above half the maximum level, the profile/interaction match label,
// and the Wilcoxon signed-rank test used to compare match and mismatch
// sessions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hpa/domain.hpp"

namespace hpa {

// Sum of percent_touch and percent_smile above which a session counts as
// interactive.
inline constexpr double kInteractiveThresholdPct = 35.0;
// A frame counts as smiling above this intensity.
inline constexpr double kSmileCutoff = 0.5;
// Exact signed-rank p-values are enumerated up to this many nonzero pairs.
inline constexpr std::size_t kExactWilcoxonMaxN = 12;

namespace detail {

// Mean accumulated as offsets from the first sample, so a constant series
// averages to exactly its value.
class MeanAccumulator {
 public:
  void add(double x) {
    if (n_ == 0) origin_ = x;
    offsets_ += x - origin_;
    ++n_;
  }
  std::size_t count() const noexcept { return n_; }
  double mean() const { return origin_ + offsets_ / static_cast<double>(n_); }

 private:
  double origin_ = 0.0;
  double offsets_ = 0.0;
  std::size_t n_ = 0;
};

}  // namespace detail

inline std::map<Phase, double> phase_means(const SessionTrace& trace) {
  std::map<Phase, detail::MeanAccumulator> acc;
  for (Phase ph : kAllPhases) acc[ph] = {};
  for (const auto& r : trace.records) acc[r.phase].add(r.cortisol);
  std::map<Phase, double> means;
  for (const auto& [ph, a] : acc) {
    if (a.count() == 0) throw EmptyPhase("no records in phase " + std::string(to_string(ph)));
    means[ph] = a.mean();
  }
  return means;
}

inline double session_mean(const SessionTrace& trace) {
  if (trace.records.empty()) throw InvalidArgument("empty trace");
  detail::MeanAccumulator acc;
  for (const auto& r : trace.records) acc.add(r.cortisol);
  return acc.mean();
}

struct Engagement {
  double percent_touch = 0.0;
  double percent_smile = 0.0;
  bool interactive = false;
};

inline Engagement engagement(const SessionTrace& trace) {
  Engagement e;
  if (trace.records.empty()) return e;
  std::size_t touch = 0;
  std::size_t smile = 0;
  for (const auto& r : trace.records) {
    if (r.frame.touch_taxels > 0) ++touch;
    if (r.frame.smile > kSmileCutoff) ++smile;
  }
  const auto n = static_cast<double>(trace.records.size());
  e.percent_touch = 100.0 * static_cast<double>(touch) / n;
  e.percent_smile = 100.0 * static_cast<double>(smile) / n;
  e.interactive = e.percent_touch + e.percent_smile > kInteractiveThresholdPct;
  return e;
}

inline double over_threshold_pct(const SessionTrace& trace, const ProfileParams& params) {
  if (trace.records.empty()) return 0.0;
  const double threshold = params.threshold();
  const auto above = std::count_if(trace.records.begin(), trace.records.end(),
                                   [&](const TraceRecord& r) { return r.cortisol > threshold; });
  return 100.0 * static_cast<double>(above) / static_cast<double>(trace.records.size());
}

constexpr bool match_label(RobotProfileKind profile, bool interactive) {
  return profile == RobotProfileKind::Anxious ? interactive : !interactive;
}

inline InteractionMetrics compute_metrics(const SessionTrace& trace) {
  InteractionMetrics m;
  const auto e = engagement(trace);
  m.percent_touch = e.percent_touch;
  m.percent_smile = e.percent_smile;
  m.interactive = e.interactive;
  m.phase_means = phase_means(trace);
  m.session_mean = session_mean(trace);
  m.over_threshold_pct = over_threshold_pct(trace, trace.config.robot_profile);
  m.match = match_label(trace.config.robot_profile.kind, e.interactive);
  return m;
}

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank test

namespace detail {

// Ranks |d| with ties sharing their average rank. Returned ranks are doubled
// so that half ranks stay integral.
inline std::vector<std::uint64_t> doubled_ranks(std::span<const double> magnitudes) {
  const std::size_t n = magnitudes.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return magnitudes[a] < magnitudes[b]; });
  std::vector<std::uint64_t> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && magnitudes[order[j + 1]] == magnitudes[order[i]]) ++j;
    // positions i..j (0-based) hold ranks i+1..j+1; doubled average is i+j+2
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = i + j + 2;
    i = j + 1;
  }
  return ranks;
}

// Two-sided exact p-value: share of the 2^n sign assignments whose doubled
// positive rank sum lies at least as far from its mean as the observed one.
// Counts the null distribution by dynamic programming over rank sums.
inline double exact_signed_rank_p(std::span<const std::uint64_t> ranks2,
                                  std::uint64_t observed2) {
  const std::uint64_t total = std::accumulate(ranks2.begin(), ranks2.end(), std::uint64_t{0});
  std::vector<std::uint64_t> ways(total + 1, 0);
  ways[0] = 1;
  for (const auto r : ranks2) {
    for (std::uint64_t s = total; s + 1 > r; --s) ways[s] += ways[s - r];
  }
  // Compare 2*W2 against total to stay in integers: |2*W2 - total|.
  const auto spread = [&](std::uint64_t w2) {
    const auto a = 2 * w2;
    return a > total ? a - total : total - a;
  };
  const auto observed_spread = spread(observed2);
  std::uint64_t extreme = 0;
  for (std::uint64_t s = 0; s <= total; ++s) {
    if (ways[s] != 0 && spread(s) >= observed_spread) extreme += ways[s];
  }
  const double assignments = std::ldexp(1.0, static_cast<int>(ranks2.size()));
  return static_cast<double>(extreme) / assignments;
}

}  // namespace detail

// Paired test on (x, y): differences x - y, zeros dropped, ties averaged.
// z uses the plain normal approximation without continuity or tie
// correction.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const std::pair<double, double>> pairs) {
  std::vector<double> diffs;
  for (const auto& [x, y] : pairs) {
    if (!std::isfinite(x) || !std::isfinite(y)) throw NonFiniteInput("wilcoxon pair");
    const double d = x - y;
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.empty()) throw InsufficientData("all paired differences are zero");

  std::vector<double> magnitudes(diffs.size());
  std::transform(diffs.begin(), diffs.end(), magnitudes.begin(),
                 [](double d) { return std::abs(d); });
  const auto ranks2 = detail::doubled_ranks(magnitudes);

  std::uint64_t plus2 = 0;
  std::uint64_t minus2 = 0;
  for (std::size_t i = 0; i < diffs.size(); ++i) (diffs[i] > 0 ? plus2 : minus2) += ranks2[i];

  WilcoxonResult r;
  const auto n = static_cast<double>(diffs.size());
  r.n_effective = diffs.size();
  r.w_plus = static_cast<double>(plus2) / 2.0;
  r.w_minus = static_cast<double>(minus2) / 2.0;
  const double mean = n * (n + 1.0) / 4.0;
  const double sd = std::sqrt(n * (n + 1.0) * (2.0 * n + 1.0) / 24.0);
  r.z = (r.w_plus - mean) / sd;
  r.p_normal = std::min(1.0, std::erfc(std::abs(r.z) / std::numbers::sqrt2));
  if (r.n_effective <= kExactWilcoxonMaxN) r.p_exact = detail::exact_signed_rank_p(ranks2, plus2);
  return r;
}

inline WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs) {
  return wilcoxon_signed_rank(std::span<const std::pair<double, double>>(pairs));
}

// ---------------------------------------------------------------------------
// Match / mismatch comparison

// A trace tagged with the stimulus set that produced it. Each stimulus set
// is expected once per robot profile.
struct LabeledTrace {
  std::string stimulus_set;
  SessionTrace trace;
};

struct ProfileOutcome {
  double over_threshold_pct = 0.0;
  double session_mean = 0.0;
  bool match = false;
  std::map<Phase, double> phase_means;
};

struct StimulusSetComparison {
  std::string stimulus_set;
  ParadigmKind paradigm = ParadigmKind::StillFace;
  double percent_touch = 0.0;
  double percent_smile = 0.0;
  bool interactive = false;
  ProfileOutcome anxious;
  ProfileOutcome avoidant;

  double match_pct() const { return anxious.match ? anxious.over_threshold_pct : avoidant.over_threshold_pct; }
  double mismatch_pct() const { return anxious.match ? avoidant.over_threshold_pct : anxious.over_threshold_pct; }
};

struct ParadigmSummary {
  ParadigmKind paradigm = ParadigmKind::StillFace;
  std::size_t n_pairs = 0;
  double mean_match_pct = 0.0;
  double mean_mismatch_pct = 0.0;
  WilcoxonResult test;  // pairs are (mismatch, match)
};

struct MatchMismatchReport {
  std::vector<StimulusSetComparison> sets;
  std::vector<ParadigmSummary> summaries;  // one per paradigm present
};

inline MatchMismatchReport match_mismatch_report(std::span<const LabeledTrace> traces) {
  std::map<std::string, std::pair<const SessionTrace*, const SessionTrace*>> by_set;
  std::vector<std::string> order;
  for (const auto& lt : traces) {
    auto [it, inserted] = by_set.try_emplace(lt.stimulus_set, nullptr, nullptr);
    if (inserted) order.push_back(lt.stimulus_set);
    auto& slot = lt.trace.config.robot_profile.kind == RobotProfileKind::Anxious
                     ? it->second.first
                     : it->second.second;
    if (slot != nullptr) {
      throw InvalidArgument("stimulus set '" + lt.stimulus_set + "' has two " +
                            std::string(to_string(lt.trace.config.robot_profile.kind)) + " traces");
    }
    slot = &lt.trace;
  }

  MatchMismatchReport report;
  for (const auto& name : order) {
    const auto [anx, avd] = by_set.at(name);
    if (anx == nullptr || avd == nullptr) {
      throw InvalidArgument("stimulus set '" + name + "' needs one trace per robot profile");
    }
    if (anx->config.paradigm != avd->config.paradigm) {
      throw InvalidArgument("stimulus set '" + name + "' mixes paradigms");
    }
    StimulusSetComparison c;
    c.stimulus_set = name;
    c.paradigm = anx->config.paradigm;
    // Both traces saw the same frames; engagement is a property of the
    // stimuli alone.
    const auto e = engagement(*anx);
    c.percent_touch = e.percent_touch;
    c.percent_smile = e.percent_smile;
    c.interactive = e.interactive;
    auto outcome = [&](const SessionTrace& t) {
      ProfileOutcome o;
      o.over_threshold_pct = over_threshold_pct(t, t.config.robot_profile);
      o.session_mean = session_mean(t);
      o.match = match_label(t.config.robot_profile.kind, e.interactive);
      o.phase_means = phase_means(t);
      return o;
    };
    c.anxious = outcome(*anx);
    c.avoidant = outcome(*avd);
    report.sets.push_back(std::move(c));
  }

  for (ParadigmKind paradigm : {ParadigmKind::StillFace, ParadigmKind::StillFaceTouch}) {
    std::vector<std::pair<double, double>> pairs;
    for (const auto& c : report.sets) {
      if (c.paradigm == paradigm) pairs.emplace_back(c.mismatch_pct(), c.match_pct());
    }
    if (pairs.empty()) continue;
    ParadigmSummary s;
    s.paradigm = paradigm;
    s.n_pairs = pairs.size();
    for (const auto& [mismatch, match] : pairs) {
      s.mean_mismatch_pct += mismatch;
      s.mean_match_pct += match;
    }
    s.mean_mismatch_pct /= static_cast<double>(pairs.size());
    s.mean_match_pct /= static_cast<double>(pairs.size());
    s.test = wilcoxon_signed_rank(pairs);
    report.summaries.push_back(s);
  }
  return report;
}

inline MatchMismatchReport match_mismatch_report(const std::vector<LabeledTrace>& traces) {
  return match_mismatch_report(std::span<const LabeledTrace>(traces));
}

}  // namespace hpa
