// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#include "pgir/intent.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "json.hpp"
#include "pgir/spl.hpp"

namespace pgir {

namespace detail {
extern const std::string_view kPromptTemplateV1;
}

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <class E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  return std::nullopt;
}

constexpr std::array<std::string_view, 4> kDirections = {"broader", "narrower", "mixed", "unclear"};
constexpr std::array<std::string_view, 4> kRationales = {"coverage_expansion", "false_positive_reduction",
                                                         "mixed_tradeoff", "insufficient_evidence"};
constexpr std::array<std::string_view, 4> kShort = {"CE", "FPR", "MT", "IE"};
constexpr std::array<std::string_view, 3> kConfidences = {"high", "medium", "low"};

std::string percent(std::size_t n, std::size_t d) {
  if (d == 0) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * static_cast<double>(n) / static_cast<double>(d));
  return buf;
}

bool directional(Rationale r) { return r == Rationale::CE || r == Rationale::FPR; }

}  // namespace

std::string_view to_string(Direction d) { return kDirections[static_cast<std::size_t>(d)]; }
std::string_view to_string(Rationale r) { return kRationales[static_cast<std::size_t>(r)]; }
std::string_view to_string(Confidence c) { return kConfidences[static_cast<std::size_t>(c)]; }
std::string_view short_name(Rationale r) { return kShort[static_cast<std::size_t>(r)]; }
std::optional<Direction> direction_from_string(std::string_view s) { return lookup<Direction>(kDirections, s); }
std::optional<Rationale> rationale_from_string(std::string_view s) { return lookup<Rationale>(kRationales, s); }
std::optional<Confidence> confidence_from_string(std::string_view s) { return lookup<Confidence>(kConfidences, s); }

// ---------------------------------------------------------------------------
// schema

IntentRecord parse_intent_record(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("response is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("response is not a JSON object");
  static const std::set<std::string> keys = {"from_commit",        "to_commit",       "match_set_direction",
                                             "predicate_modified_present", "predicate_added", "predicate_removed",
                                             "summary",            "rationale_label", "rationale_confidence",
                                             "rationale_support"};
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) throw InputError("unexpected key '" + k + "'");
  }
  auto str = [&](const char* k) {
    if (!j.contains(k)) throw InputError(std::string("missing key '") + k + "'");
    if (!j[k].is_string()) throw InputError(std::string("'") + k + "' must be a string");
    return j[k].get<std::string>();
  };
  auto flag = [&](const char* k) {
    if (!j.contains(k)) throw InputError(std::string("missing key '") + k + "'");
    if (!j[k].is_boolean()) throw InputError(std::string("'") + k + "' must be a boolean");
    return j[k].get<bool>();
  };
  IntentRecord r;
  r.from_commit = str("from_commit");
  r.to_commit = str("to_commit");
  std::string dir = str("match_set_direction");
  auto d = direction_from_string(dir);
  if (!d) throw InputError("unknown match_set_direction '" + dir + "'");
  r.direction = *d;
  r.predicate_modified_present = flag("predicate_modified_present");
  r.predicate_added = flag("predicate_added");
  r.predicate_removed = flag("predicate_removed");
  r.summary = str("summary");
  std::string label = str("rationale_label");
  auto rl = rationale_from_string(label);
  if (!rl) throw InputError("unknown rationale_label '" + label + "'");
  r.rationale = *rl;
  std::string conf = str("rationale_confidence");
  auto c = confidence_from_string(conf);
  if (!c) throw InputError("unknown rationale_confidence '" + conf + "'");
  r.confidence = *c;
  r.rationale_support = str("rationale_support");
  return r;
}

std::string intent_record_json(const IntentRecord& r) {
  ordered_json j = {{"from_commit", r.from_commit},
                    {"to_commit", r.to_commit},
                    {"match_set_direction", to_string(r.direction)},
                    {"predicate_modified_present", r.predicate_modified_present},
                    {"predicate_added", r.predicate_added},
                    {"predicate_removed", r.predicate_removed},
                    {"summary", r.summary},
                    {"rationale_label", to_string(r.rationale)},
                    {"rationale_confidence", to_string(r.confidence)},
                    {"rationale_support", r.rationale_support}};
  return j.dump();
}

// ---------------------------------------------------------------------------
// prompt

std::string detection_text(std::string_view spl_text) {
  std::vector<spl::Stage> stages;
  try {
    stages = spl::split_stages(spl_text);
  } catch (const InputError&) {
    return std::string(trim(spl_text));
  }
  std::string out;
  for (const spl::Stage& s : stages) {
    if (s.kind != spl::StageKind::Filtering) continue;
    if (!out.empty()) out += " | ";
    out += s.text;
  }
  return out;
}

std::string_view prompt_template() { return detail::kPromptTemplateV1; }

std::string render_prompt(std::string_view detection_a, std::string_view detection_b) {
  std::string p(prompt_template());
  // the later marker first, so substituted text is never rescanned
  std::size_t b = p.find("__COMMIT_B__");
  if (b != std::string::npos) p.replace(b, 12, detection_b);
  std::size_t a = p.find("__COMMIT_A__");
  if (a != std::string::npos) p.replace(a, 12, detection_a);
  return p;
}

std::size_t estimate_tokens(std::string_view prompt) { return (prompt.size() + 3) / 4; }

// ---------------------------------------------------------------------------
// validation

Rationale expected_rationale(Direction d) {
  switch (d) {
    case Direction::Broader:
      return Rationale::CE;
    case Direction::Narrower:
      return Rationale::FPR;
    case Direction::Mixed:
      return Rationale::MT;
    case Direction::Unclear:
      return Rationale::IE;
  }
  return Rationale::IE;
}

InternalCheck validate_internal(const IntentRecord& r) {
  InternalCheck c;
  if (expected_rationale(r.direction) == r.rationale) return c;
  c.consistent = false;
  c.kind = std::string(to_string(r.direction)) + "->" + std::string(short_name(r.rationale));
  return c;
}

CrossCheck validate_cross(const IntentRecord& r, const StepRecord& step) {
  CrossCheck c;
  c.llm_change = r.any_change();
  c.pgir_change = step.predicate_changing();
  if (!(c.llm_change && c.pgir_change)) return c;
  const StructuralOpSet& ops = step.ops;
  bool reorg = ops.has(StructOp::Move) || ops.has(StructOp::Flip);
  if (r.predicate_added) {
    c.added_supported = reorg || ops.has(StructOp::AndPlus) || ops.has(StructOp::OrPlus) || ops.has(StructOp::BranchPlus);
  }
  if (r.predicate_removed) {
    c.removed_supported =
        reorg || ops.has(StructOp::AndMinus) || ops.has(StructOp::OrMinus) || ops.has(StructOp::BranchMinus);
  }
  if (r.predicate_modified_present) c.modified_supported = reorg || ops.has(StructOp::ValUpdate);
  return c;
}

// ---------------------------------------------------------------------------
// trajectories

std::string_view to_string(Cohort c) {
  switch (c) {
    case Cohort::IEOnly:
      return "IE-only";
    case Cohort::Singleton:
      return "Singleton";
    case Cohort::MultiRevision:
      return "Multi-revision";
  }
  return "?";
}

std::string_view to_string(TrajectoryClass t) {
  switch (t) {
    case TrajectoryClass::None:
      return "";
    case TrajectoryClass::Coupled:
      return "Coupled";
    case TrajectoryClass::CEOnly:
      return "CE-only";
    case TrajectoryClass::FPROnly:
      return "FPR-only";
    case TrajectoryClass::Oscillating:
      return "Oscillating";
    case TrajectoryClass::Phased:
      return "Phased";
  }
  return "?";
}

std::optional<Trajectory> classify_trajectory(const std::vector<Rationale>& labels) {
  if (labels.empty()) return std::nullopt;
  std::size_t labeled = 0, mt = 0;
  std::vector<Rationale> dir;
  for (Rationale r : labels) {
    if (r == Rationale::IE) continue;
    ++labeled;
    if (r == Rationale::MT) ++mt;
    else dir.push_back(r);
  }
  Trajectory t;
  if (labeled == 0) return t;
  if (labeled == 1) {
    t.cohort = Cohort::Singleton;
    return t;
  }
  t.cohort = Cohort::MultiRevision;
  if (2 * mt >= labeled) {
    t.cls = TrajectoryClass::Coupled;
    return t;
  }
  bool ce = std::count(dir.begin(), dir.end(), Rationale::CE) > 0;
  bool fpr = std::count(dir.begin(), dir.end(), Rationale::FPR) > 0;
  if (ce && !fpr) {
    t.cls = TrajectoryClass::CEOnly;
  } else if (fpr && !ce) {
    t.cls = TrajectoryClass::FPROnly;
  } else {
    int tau = 0;
    for (std::size_t i = 1; i < dir.size(); ++i) tau += dir[i] != dir[i - 1];
    t.tau = tau;
    t.cls = tau >= 2 ? TrajectoryClass::Oscillating : TrajectoryClass::Phased;
  }
  return t;
}

std::string_view to_string(GapKind g) {
  switch (g) {
    case GapKind::CEtoCE:
      return "CE->CE";
    case GapKind::FPRtoFPR:
      return "FPR->FPR";
    case GapKind::CEtoFPR:
      return "CE->FPR";
    case GapKind::FPRtoCE:
      return "FPR->CE";
  }
  return "?";
}

TransitionGaps transition_gaps(const std::vector<DatedLabel>& labels, Timestamp created_at) {
  TransitionGaps g;
  std::vector<DatedLabel> dir;
  for (const DatedLabel& l : labels) {
    if (directional(l.label)) dir.push_back(l);
  }
  for (std::size_t i = 1; i < dir.size(); ++i) {
    bool from_ce = dir[i - 1].label == Rationale::CE;
    bool to_ce = dir[i].label == Rationale::CE;
    GapKind k = from_ce ? (to_ce ? GapKind::CEtoCE : GapKind::CEtoFPR) : (to_ce ? GapKind::FPRtoCE : GapKind::FPRtoFPR);
    g.gaps.emplace_back(k, days_between(dir[i - 1].time, dir[i].time));
    if (!g.days_to_first_flip && dir[i].label != dir[i - 1].label) {
      g.days_to_first_flip = days_between(created_at, dir[i].time);
    }
  }
  g.still_flipping = dir.size() >= 2 && dir[dir.size() - 1].label != dir[dir.size() - 2].label;
  return g;
}

// ---------------------------------------------------------------------------
// orchestration

std::string_view to_string(PairStatus s) {
  switch (s) {
    case PairStatus::Labeled:
      return "labeled";
    case PairStatus::ContextOverflow:
      return "context_overflow";
    case PairStatus::LabelerFailure:
      return "labeler_failure";
  }
  return "?";
}

std::string pair_id(const StepRecord& step) {
  return step.lineage_id + ":" + std::to_string(step.from_index) + ".." + std::to_string(step.to_index);
}

IntentRun run_intent(const std::vector<Lineage>& lineages, const std::vector<LineageAnalysis>& analyses,
                     Labeler& labeler, const LabelerConfig& config, TranscriptWriter* transcript) {
  if (lineages.size() != analyses.size()) throw FatalError("run_intent: lineages and analyses differ in size");
  IntentRun run;
  std::vector<LabelJob> jobs;
  std::vector<std::size_t> job_pair;
  for (std::size_t li = 0; li < lineages.size(); ++li) {
    const Lineage& l = lineages[li];
    for (const StepRecord& s : analyses[li].steps) {
      PairResult p;
      p.pair_id = pair_id(s);
      p.lineage_id = l.id;
      p.step = &s;
      std::string prompt =
          render_prompt(detection_text(l.versions[s.from_index].text), detection_text(l.versions[s.to_index].text));
      p.prompt_tokens = estimate_tokens(prompt);
      if (p.prompt_tokens > config.context_budget_tokens) {
        p.status = PairStatus::ContextOverflow;
      } else {
        jobs.push_back({p.pair_id, std::move(prompt)});
        job_pair.push_back(run.pairs.size());
      }
      run.pairs.push_back(std::move(p));
    }
  }

  auto accept = [](const std::string& content) { parse_intent_record(content); };
  std::vector<LabelResult> results = label_all(jobs, labeler, config, accept, transcript);
  for (std::size_t k = 0; k < results.size(); ++k) {
    PairResult& p = run.pairs[job_pair[k]];
    if (results[k].response) {
      p.record = parse_intent_record(*results[k].response);
      p.status = PairStatus::Labeled;
    } else {
      p.status = PairStatus::LabelerFailure;
      p.error = results[k].error;
    }
  }

  for (PairResult& p : run.pairs) {
    p.cross.pgir_change = p.step->predicate_changing();
    if (p.record) {
      p.cross = validate_cross(*p.record, *p.step);
      p.internal = validate_internal(*p.record);
      p.in_trajectory = p.cross.llm_change && p.cross.pgir_change;
      p.trajectory_label = p.record->rationale;
    } else if (p.status == PairStatus::LabelerFailure) {
      p.in_trajectory = p.cross.pgir_change;
      p.trajectory_label = Rationale::IE;
    }
  }

  std::size_t pi = 0;
  for (std::size_t li = 0; li < lineages.size(); ++li) {
    LineageIntent li_out;
    li_out.lineage_id = lineages[li].id;
    li_out.created_at = lineages[li].created_at;
    for (std::size_t k = 0; k < analyses[li].steps.size(); ++k, ++pi) {
      const PairResult& p = run.pairs[pi];
      if (p.in_trajectory) li_out.labels.push_back({p.trajectory_label, p.step->to_time});
    }
    if (li_out.labels.empty()) continue;
    std::vector<Rationale> seq;
    for (const auto& d : li_out.labels) seq.push_back(d.label);
    li_out.trajectory = classify_trajectory(seq);
    li_out.gaps = transition_gaps(li_out.labels, li_out.created_at);
    run.lineages.push_back(std::move(li_out));
  }
  return run;
}

// ---------------------------------------------------------------------------
// reports

std::string intent_jsonl(const IntentRun& run) {
  std::string out;
  for (const PairResult& p : run.pairs) {
    ordered_json j = {{"pair_id", p.pair_id},
                      {"lineage_id", p.lineage_id},
                      {"from", p.step->from_index},
                      {"to", p.step->to_index},
                      {"from_commit", p.step->from_commit},
                      {"to_commit", p.step->to_commit},
                      {"status", to_string(p.status)},
                      {"prompt_tokens", p.prompt_tokens},
                      {"d_pred", p.step->d_pred}};
    j["record"] = p.record ? ordered_json::parse(intent_record_json(*p.record)) : ordered_json(nullptr);
    if (!p.error.empty()) j["error"] = p.error;
    if (p.record) {
      j["llm_change"] = p.cross.llm_change;
      j["pgir_change"] = p.cross.pgir_change;
      j["agree"] = p.cross.agree();
      auto sup = [](const std::optional<bool>& b) { return b ? ordered_json(*b) : ordered_json(nullptr); };
      j["support"] = {{"added", sup(p.cross.added_supported)},
                      {"removed", sup(p.cross.removed_supported)},
                      {"modified", sup(p.cross.modified_supported)}};
      j["internal"] = p.internal.consistent ? "consistent" : "inconsistent:" + p.internal.kind;
    }
    j["in_trajectory"] = p.in_trajectory;
    out += j.dump() + "\n";
  }
  return out;
}

std::string validation_csv(const IntentRun& run) {
  std::size_t overflow = 0, failures = 0, total = 0;
  std::size_t no_change = 0, no_change_ok = 0, change = 0, change_ok = 0;
  std::array<std::size_t, 3> flag{}, flag_ok{};
  std::array<std::size_t, 4> dir{}, dir_ok{};
  std::size_t labeled = 0, consistent = 0;
  for (const PairResult& p : run.pairs) {
    if (p.status == PairStatus::ContextOverflow) {
      ++overflow;
      continue;
    }
    ++total;
    if (p.status == PairStatus::LabelerFailure) {
      ++failures;
      continue;
    }
    const CrossCheck& c = p.cross;
    if (c.llm_change) {
      ++change;
      change_ok += c.pgir_change;
    } else {
      ++no_change;
      no_change_ok += !c.pgir_change;
    }
    const std::optional<bool>* sup[3] = {&c.added_supported, &c.removed_supported, &c.modified_supported};
    for (int k = 0; k < 3; ++k) {
      if (*sup[k]) {
        ++flag[k];
        flag_ok[k] += **sup[k];
      }
    }
    std::size_t d = static_cast<std::size_t>(p.record->direction);
    ++dir[d];
    dir_ok[d] += p.internal.consistent;
    ++labeled;
    consistent += p.internal.consistent;
  }
  std::string out = "metric,count,supported,percent\n";
  auto row = [&](const std::string& name, std::size_t n, std::optional<std::size_t> ok) {
    out += name + "," + std::to_string(n) + "," + (ok ? std::to_string(*ok) : "") + "," + (ok ? percent(*ok, n) : "") +
           "\n";
  };
  row("total_steps", total, std::nullopt);
  row("context_overflow", overflow, std::nullopt);
  row("labeler_failure", failures, std::nullopt);
  row("no_predicate_change", no_change, no_change_ok);
  row("predicate_change", change, change_ok);
  row("addition_flag", flag[0], flag_ok[0]);
  row("removal_flag", flag[1], flag_ok[1]);
  row("modification_flag", flag[2], flag_ok[2]);
  for (std::size_t d = 0; d < 4; ++d) {
    auto dd = static_cast<Direction>(d);
    row("internal_" + std::string(to_string(dd)) + "_to_" + std::string(short_name(expected_rationale(dd))), dir[d],
        dir_ok[d]);
  }
  row("internal_consistent", labeled, consistent);
  return out;
}

std::string trajectories_csv(const IntentRun& run) {
  std::array<std::size_t, 4> labels{};
  std::size_t pairs = 0;
  std::array<std::size_t, 3> cohorts{};
  std::array<std::size_t, 6> classes{};
  for (const LineageIntent& l : run.lineages) {
    for (const DatedLabel& d : l.labels) {
      ++pairs;
      ++labels[static_cast<std::size_t>(d.label)];
    }
    ++cohorts[static_cast<std::size_t>(l.trajectory->cohort)];
    ++classes[static_cast<std::size_t>(l.trajectory->cls)];
  }
  std::size_t lineages = run.lineages.size();
  std::size_t multi = cohorts[static_cast<std::size_t>(Cohort::MultiRevision)];
  std::string out = "section,category,count,percent\n";
  out += "revisions,pairs," + std::to_string(pairs) + ",\n";
  for (std::size_t r = 0; r < 4; ++r) {
    out += "revisions," + std::string(short_name(static_cast<Rationale>(r))) + "," + std::to_string(labels[r]) + "," +
           percent(labels[r], pairs) + "\n";
  }
  out += "lineages,lineages," + std::to_string(lineages) + ",\n";
  for (std::size_t c = 0; c < 3; ++c) {
    out += "cohort," + std::string(to_string(static_cast<Cohort>(c))) + "," + std::to_string(cohorts[c]) + "," +
           percent(cohorts[c], lineages) + "\n";
  }
  auto cls = [&](TrajectoryClass t) { return classes[static_cast<std::size_t>(t)]; };
  std::size_t alternating = cls(TrajectoryClass::Oscillating) + cls(TrajectoryClass::Phased);
  out += "trajectory,multi-revision lineages," + std::to_string(multi) + ",\n";
  for (TrajectoryClass t : {TrajectoryClass::Coupled, TrajectoryClass::CEOnly, TrajectoryClass::FPROnly}) {
    out += "trajectory," + std::string(to_string(t)) + "," + std::to_string(cls(t)) + "," + percent(cls(t), multi) + "\n";
  }
  out += "trajectory,Alternating," + std::to_string(alternating) + "," + percent(alternating, multi) + "\n";
  for (TrajectoryClass t : {TrajectoryClass::Oscillating, TrajectoryClass::Phased}) {
    out += "trajectory,Alternating/" + std::string(to_string(t)) + "," + std::to_string(cls(t)) + "," +
           percent(cls(t), multi) + "\n";
  }
  return out;
}

std::string lineage_trajectories_csv(const IntentRun& run) {
  std::string out = "lineage_id,labels,cohort,trajectory,tau,days_to_first_flip,still_flipping\n";
  for (const LineageIntent& l : run.lineages) {
    std::string seq;
    for (const DatedLabel& d : l.labels) {
      if (!seq.empty()) seq += " ";
      seq += short_name(d.label);
    }
    const Trajectory& t = *l.trajectory;
    bool osc = t.cls == TrajectoryClass::Oscillating;
    out += csv_cell(l.lineage_id) + "," + seq + "," + std::string(to_string(t.cohort)) + "," +
           std::string(to_string(t.cls)) + "," + (t.tau ? std::to_string(*t.tau) : "") + "," +
           (osc && l.gaps.days_to_first_flip ? format_number(*l.gaps.days_to_first_flip) : "") + "," +
           (osc ? (l.gaps.still_flipping ? "true" : "false") : "") + "\n";
  }
  return out;
}

std::string gaps_csv(const IntentRun& run) {
  std::array<std::vector<double>, 4> gaps;
  std::vector<double> first_flip;
  std::size_t oscillating = 0, still = 0;
  for (const LineageIntent& l : run.lineages) {
    for (const auto& [k, days] : l.gaps.gaps) gaps[static_cast<std::size_t>(k)].push_back(days);
    if (l.trajectory->cls != TrajectoryClass::Oscillating) continue;
    ++oscillating;
    if (l.gaps.days_to_first_flip) first_flip.push_back(*l.gaps.days_to_first_flip);
    still += l.gaps.still_flipping;
  }
  auto med = [](const std::vector<double>& v) {
    auto q = quantile(v, 0.5);
    return q ? format_number(*q) : std::string();
  };
  std::string out = "metric,count,value\n";
  for (std::size_t k = 0; k < 4; ++k) {
    out += "gap_median_days:" + std::string(to_string(static_cast<GapKind>(k))) + "," + std::to_string(gaps[k].size()) +
           "," + med(gaps[k]) + "\n";
  }
  out += "oscillating_lineages," + std::to_string(oscillating) + ",\n";
  out += "time_to_first_flip_median_days," + std::to_string(first_flip.size()) + "," + med(first_flip) + "\n";
  out += "still_flipping_percent," + std::to_string(still) + "," + percent(still, oscillating) + "\n";
  return out;
}

std::vector<std::string> write_intent(const IntentRun& run, const std::string& dir) {
  std::vector<std::pair<std::string, std::string>> files = {
      {"intent.jsonl", intent_jsonl(run)},
      {"validation.csv", validation_csv(run)},
      {"trajectories.csv", trajectories_csv(run)},
      {"lineage_trajectories.csv", lineage_trajectories_csv(run)},
      {"gaps.csv", gaps_csv(run)},
  };
  std::vector<std::string> names;
  for (const auto& [name, content] : files) {
    write_file(dir + "/" + name, content);
    names.push_back(name);
  }
  return names;
}

}  // namespace pgir
