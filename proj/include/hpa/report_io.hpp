#pragma once

// JSON encoding of analysis results. `analyze` prints one metrics object per
// trace; `compare` prints one object per stimulus set, one summary per
// paradigm, and a plot-ready series block.

#include <string>

#include "hpa/analysis.hpp"
#include "hpa/trace_io.hpp"

namespace hpa {

inline Json phase_means_to_json(const std::map<Phase, double>& means) {
  Json j = Json::object();
  for (Phase ph : kAllPhases) {
    if (const auto it = means.find(ph); it != means.end()) j[std::string(to_string(ph))] = it->second;
  }
  return j;
}

inline Json metrics_to_json(const std::string& label, const SessionTrace& trace,
                            const InteractionMetrics& m) {
  Json j;
  j["type"] = "metrics";
  j["trace"] = label;
  j["profile"] = to_string(trace.config.robot_profile.kind);
  j["paradigm"] = to_string(trace.config.paradigm);
  j["records"] = trace.records.size();
  j["percent_touch"] = m.percent_touch;
  j["percent_smile"] = m.percent_smile;
  j["interactive"] = m.interactive;
  j["phase_means"] = phase_means_to_json(m.phase_means);
  j["session_mean"] = m.session_mean;
  j["over_threshold_pct"] = m.over_threshold_pct;
  j["match"] = m.match;
  return j;
}

inline Json wilcoxon_to_json(const WilcoxonResult& w) {
  Json j;
  j["n_effective"] = w.n_effective;
  j["w_plus"] = w.w_plus;
  j["w_minus"] = w.w_minus;
  j["z"] = w.z;
  j["p_normal"] = w.p_normal;
  j["p_exact"] = w.p_exact ? Json(*w.p_exact) : Json(nullptr);
  return j;
}

inline std::vector<Json> report_to_json(const MatchMismatchReport& report) {
  std::vector<Json> lines;
  auto outcome_json = [](const ProfileOutcome& o) {
    Json j;
    j["over_threshold_pct"] = o.over_threshold_pct;
    j["session_mean"] = o.session_mean;
    j["match"] = o.match;
    j["phase_means"] = phase_means_to_json(o.phase_means);
    return j;
  };
  Json scatter = Json::array();
  for (const auto& c : report.sets) {
    Json j;
    j["type"] = "stimulus_set";
    j["stimulus_set"] = c.stimulus_set;
    j["paradigm"] = to_string(c.paradigm);
    j["percent_touch"] = c.percent_touch;
    j["percent_smile"] = c.percent_smile;
    j["interactive"] = c.interactive;
    j["anxious"] = outcome_json(c.anxious);
    j["avoidant"] = outcome_json(c.avoidant);
    j["match_pct"] = c.match_pct();
    j["mismatch_pct"] = c.mismatch_pct();
    lines.push_back(std::move(j));
    for (const auto& [kind, o] : {std::pair{RobotProfileKind::Anxious, &c.anxious},
                                  std::pair{RobotProfileKind::Avoidant, &c.avoidant}}) {
      Json point;
      point["profile"] = to_string(kind);
      point["percent_touch"] = c.percent_touch;
      point["mean_cortisol"] = o->session_mean;
      scatter.push_back(std::move(point));
    }
  }
  for (const auto& s : report.summaries) {
    Json j;
    j["type"] = "summary";
    j["paradigm"] = to_string(s.paradigm);
    j["n_pairs"] = s.n_pairs;
    j["mean_match_pct"] = s.mean_match_pct;
    j["mean_mismatch_pct"] = s.mean_mismatch_pct;
    j["wilcoxon"] = wilcoxon_to_json(s.test);
    lines.push_back(std::move(j));
  }

  // Plot-ready: mean phase cortisol per profile and paradigm, and the touch
  // vs. mean cortisol scatter.
  Json by_profile = Json::array();
  for (ParadigmKind paradigm : {ParadigmKind::StillFace, ParadigmKind::StillFaceTouch}) {
    for (RobotProfileKind kind : {RobotProfileKind::Anxious, RobotProfileKind::Avoidant}) {
      std::map<Phase, double> sums;
      std::size_t n = 0;
      for (const auto& c : report.sets) {
        if (c.paradigm != paradigm) continue;
        const auto& o = kind == RobotProfileKind::Anxious ? c.anxious : c.avoidant;
        for (const auto& [ph, v] : o.phase_means) sums[ph] += v;
        ++n;
      }
      if (n == 0) continue;
      for (auto& [ph, v] : sums) v /= static_cast<double>(n);
      Json j;
      j["paradigm"] = to_string(paradigm);
      j["profile"] = to_string(kind);
      j["phase_means"] = phase_means_to_json(sums);
      by_profile.push_back(std::move(j));
    }
  }
  Json series;
  series["type"] = "series";
  series["phase_means_by_profile"] = std::move(by_profile);
  series["touch_vs_mean_cortisol"] = std::move(scatter);
  lines.push_back(std::move(series));
  return lines;
}

}  // namespace hpa
