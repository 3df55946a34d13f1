// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#include "pgir/analytics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "pgir/graph.hpp"
#include "pgir/text_format.hpp"

namespace pgir {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double kTwoYearsDays = 2 * 365.25;

ordered_json opt(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::string fmt_opt(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::string percent(std::size_t n, std::size_t d) {
  if (d == 0) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * static_cast<double>(n) / static_cast<double>(d));
  return buf;
}

std::optional<double> share(std::size_t n, std::size_t d) {
  if (d == 0) return std::nullopt;
  return static_cast<double>(n) / static_cast<double>(d);
}

double days_since(Timestamp created, Timestamp t) { return days_between(created, t); }

}  // namespace

std::size_t LineageAnalysis::parseable_count() const {
  return static_cast<std::size_t>(std::count(status.begin(), status.end(), spl::DetectionStatus::Ok));
}

std::size_t LineageAnalysis::changing_steps() const {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [](const StepRecord& s) { return s.predicate_changing(); }));
}

LineageAnalysis analyze_lineage(const Lineage& lineage, const AnalysisOptions& options) {
  LineageAnalysis out;
  out.lineage_id = lineage.id;
  out.created_at = lineage.created_at;
  out.lifetime_days = lineage.lifetime_days();
  out.version_count = lineage.versions.size();

  std::vector<std::optional<PredicateGraph>> graphs;
  for (const RuleVersion& v : lineage.versions) {
    spl::Detection d = spl::extract_detection(v.text);
    out.status.push_back(d.status);
    out.parse_errors.push_back(d.error);
    out.times.push_back(v.time);
    if (d.status == spl::DetectionStatus::Ok) {
      graphs.emplace_back(canonicalize(*d.expr));
      out.canonical.push_back(serialize_body(*graphs.back()));
    } else {
      graphs.emplace_back(std::nullopt);
      out.canonical.emplace_back();
    }
  }

  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    if (!graphs[i]) continue;
    if (prev) {
      const PredicateGraph& a = *graphs[*prev];
      const PredicateGraph& b = *graphs[i];
      DistanceResult r = predicate_distance(a, b, options.align, options.weights, options.theta_flip);
      StepRecord s;
      s.lineage_id = lineage.id;
      s.from_index = *prev;
      s.to_index = i;
      s.from_commit = lineage.versions[*prev].commit;
      s.to_commit = lineage.versions[i].commit;
      s.from_time = lineage.versions[*prev].time;
      s.to_time = lineage.versions[i].time;
      s.d_pred = r.d_pred;
      s.breakdown = r.script.breakdown;
      s.ops = label_step(r.alignment, r.script, a, b, r.flips);
      s.bridged = i - *prev > 1;
      out.steps.push_back(std::move(s));
    }
    prev = i;
  }
  return out;
}

std::vector<LineageAnalysis> analyze_lineages(const std::vector<Lineage>& lineages, const AnalysisOptions& options) {
  std::vector<LineageAnalysis> out(lineages.size());
  unsigned n = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(1, lineages.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::size_t i; (i = next++) < lineages.size();) {
      try {
        out[i] = analyze_lineage(lineages[i], options);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

// ---------------------------------------------------------------------------
// prevalence

PrevalenceSummary prevalence_and_timing(const std::vector<LineageAnalysis>& lineages) {
  PrevalenceSummary s;
  s.total_rules = lineages.size();
  std::vector<double> revisions, first_days, magnitudes, structural;
  std::array<std::size_t, kStructOpCount> op_steps{};
  for (const LineageAnalysis& l : lineages) {
    if (l.version_count > 0) s.raw_steps += l.version_count - 1;
    s.eligible_steps += l.steps.size();
    s.step_eligible_rules += l.step_eligible();
    std::size_t changing = 0;
    std::optional<Timestamp> first;
    for (const StepRecord& st : l.steps) {
      if (!st.predicate_changing()) continue;
      ++changing;
      if (!first) first = st.to_time;
      magnitudes.push_back(st.d_pred);
      for (StructOp op : st.ops.present()) ++op_steps[static_cast<std::size_t>(op)];
      std::size_t k = st.ops.distinct_structural();
      if (k > 0) {
        structural.push_back(static_cast<double>(k));
        ++s.structural_buckets[std::min<std::size_t>(k, 5) - 1];
      }
    }
    if (changing == 0) continue;
    ++s.edited_rules;
    revisions.push_back(static_cast<double>(changing));
    first_days.push_back(days_since(l.created_at, *first));
  }
  s.changing_steps = magnitudes.size();
  s.proportion_edited = share(s.edited_rules, s.total_rules);
  s.revisions_mean = mean(revisions);
  s.revisions_median = quantile(revisions, 0.5);
  s.revisions_p90 = quantile(revisions, 0.9);
  s.first_revision_days_median = quantile(first_days, 0.5);
  s.first_revision_within_90d =
      share(static_cast<std::size_t>(std::count_if(first_days.begin(), first_days.end(), [](double d) { return d <= 90.0; })),
            first_days.size());
  s.first_revision_after_2y = share(static_cast<std::size_t>(std::count_if(first_days.begin(), first_days.end(),
                                                                           [](double d) { return d > kTwoYearsDays; })),
                                    first_days.size());
  s.magnitude_mean = mean(magnitudes);
  s.magnitude_p25 = quantile(magnitudes, 0.25);
  s.magnitude_median = quantile(magnitudes, 0.5);
  s.magnitude_p90 = quantile(magnitudes, 0.9);
  if (!magnitudes.empty()) s.magnitude_max = *std::max_element(magnitudes.begin(), magnitudes.end());
  s.structural_steps = structural.size();
  s.structural_average = mean(structural);
  for (std::size_t i = 0; i < kStructOpCount; ++i) s.op_prevalence[i] = share(op_steps[i], s.changing_steps);
  return s;
}

std::string PrevalenceSummary::to_json() const {
  ordered_json buckets = ordered_json::object();
  const char* names[] = {"1", "2", "3", "4", "5+"};
  for (std::size_t i = 0; i < 5; ++i) {
    buckets[names[i]] = {{"steps", structural_buckets[i]},
                         {"share", opt(share(structural_buckets[i], structural_steps))}};
  }
  ordered_json prevalence = ordered_json::object();
  for (std::size_t i = 0; i < kStructOpCount; ++i) {
    prevalence[std::string(to_string(static_cast<StructOp>(i)))] = opt(op_prevalence[i]);
  }
  ordered_json j = {
      {"total_rules", total_rules},
      {"revision_steps", raw_steps},
      {"step_eligible_steps", eligible_steps},
      {"predicate_changing_revisions", changing_steps},
      {"prevalence",
       {{"step_eligible_rules", step_eligible_rules},
        {"edited_rules", edited_rules},
        {"proportion_edited", opt(proportion_edited)}}},
      {"revisions_per_edited_rule",
       {{"mean", opt(revisions_mean)}, {"median", opt(revisions_median)}, {"p90", opt(revisions_p90)}}},
      {"timing",
       {{"days_to_first_revision_median", opt(first_revision_days_median)},
        {"first_revision_within_90_days", opt(first_revision_within_90d)},
        {"first_revision_after_2_years", opt(first_revision_after_2y)}}},
      {"magnitude",
       {{"mean", opt(magnitude_mean)},
        {"p25", opt(magnitude_p25)},
        {"median", opt(magnitude_median)},
        {"p90", opt(magnitude_p90)},
        {"max", opt(magnitude_max)}}},
      {"structural_operations",
       {{"steps", changing_steps},
        {"structural_steps", structural_steps},
        {"average", opt(structural_average)},
        {"by_label_count", buckets},
        {"prevalence", prevalence}}},
  };
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// cohorts

std::vector<CohortCell> cohort_lag_matrix(const std::vector<LineageAnalysis>& lineages) {
  std::map<std::string, std::size_t> sizes;
  std::map<std::pair<std::string, long>, double> totals;
  for (const LineageAnalysis& l : lineages) {
    std::string cohort = calendar_quarter(l.created_at);
    ++sizes[cohort];
    for (const StepRecord& s : l.steps) {
      if (!s.predicate_changing()) continue;
      long lag = static_cast<long>(std::floor(days_since(l.created_at, s.to_time) / kQuarterDays));
      totals[{cohort, lag}] += s.d_pred;
    }
  }
  std::vector<CohortCell> cells;
  for (const auto& [key, total] : totals) {
    CohortCell c;
    c.cohort = key.first;
    c.lag = key.second;
    c.cohort_size = sizes[key.first];
    c.total_d_pred = total;
    c.mean_d_pred = total / static_cast<double>(c.cohort_size);
    cells.push_back(std::move(c));
  }
  return cells;
}

std::string cohort_matrix_csv(const std::vector<CohortCell>& cells) {
  std::string out = "cohort,cohort_size,lag,total_d_pred,mean_d_pred\n";
  for (const CohortCell& c : cells) {
    out += c.cohort + "," + std::to_string(c.cohort_size) + "," + std::to_string(c.lag) + "," +
           format_number(c.total_d_pred) + "," + format_number(c.mean_d_pred) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// archetypes

std::string Archetype::name() const {
  static const char* names[8] = {"never-edited", "late-only",     "mid-only",      "mid+late",
                                 "creation-only", "creation+late", "creation+mid", "all-three"};
  return names[(windows[0] ? 4 : 0) + (windows[1] ? 2 : 0) + (windows[2] ? 1 : 0)];
}

std::optional<Archetype> classify_archetype(const LineageAnalysis& lineage) {
  if (lineage.lifetime_days < kArchetypeMinLifetimeDays) return std::nullopt;
  Archetype a;
  for (const StepRecord& s : lineage.steps) {
    if (!s.predicate_changing()) continue;
    double d = days_since(lineage.created_at, s.to_time);
    if (d < kQuarterDays) a.windows[0] = true;
    else if (d < kTwoYearsDays) a.windows[1] = true;
    else a.windows[2] = true;
  }
  return a;
}

std::string archetypes_csv(const std::vector<LineageAnalysis>& lineages) {
  // table order: never, single-window, multi-window
  static const std::array<std::array<bool, 3>, 8> order = {{{false, false, false},
                                                            {true, false, false},
                                                            {false, true, false},
                                                            {false, false, true},
                                                            {true, true, false},
                                                            {true, false, true},
                                                            {false, true, true},
                                                            {true, true, true}}};
  std::map<std::array<bool, 3>, std::size_t> counts;
  std::size_t eligible = 0;
  for (const LineageAnalysis& l : lineages) {
    if (auto a = classify_archetype(l)) {
      ++eligible;
      ++counts[a->windows];
    }
  }
  std::string out = "archetype,l0,l1_7,l8_plus,count,percent\n";
  for (const auto& w : order) {
    Archetype a{w};
    auto cell = [](bool b) { return b ? ">=1" : "0"; };
    out += a.name() + "," + cell(w[0]) + "," + cell(w[1]) + "," + cell(w[2]) + "," + std::to_string(counts[w]) + "," +
           percent(counts[w], eligible) + "\n";
  }
  out += "eligible,,,," + std::to_string(eligible) + "," + percent(eligible, eligible) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// patterns

std::string_view to_string(PatternKind p) {
  switch (p) {
    case PatternKind::ValueOnly:
      return "value-only";
    case PatternKind::ExpandOnly:
      return "expand-only";
    case PatternKind::ContractOnly:
      return "contract-only";
    case PatternKind::RestructureOnly:
      return "restructure-only";
    case PatternKind::Mixed:
      return "mixed";
  }
  return "?";
}

std::string_view to_string(Mixing m) {
  switch (m) {
    case Mixing::None:
      return "none";
    case Mixing::IntraOnly:
      return "intra_only";
    case Mixing::InterOnly:
      return "inter_only";
    case Mixing::Both:
      return "both";
  }
  return "?";
}

std::optional<EvolutionPattern> classify_pattern(const std::vector<StepRecord>& steps) {
  struct Fam {
    bool exp = false, con = false, reorg = false;
  };
  std::vector<Fam> fams;
  for (const StepRecord& s : steps) {
    if (!s.predicate_changing()) continue;
    Fam f;
    for (StructOp op : s.ops.present()) {
      f.exp |= is_expansion(op);
      f.con |= is_contraction(op);
      f.reorg |= is_reorganization(op);
    }
    fams.push_back(f);
  }
  if (fams.empty()) return std::nullopt;
  bool exp = false, con = false, reorg = false, intra = false;
  for (const Fam& f : fams) {
    exp |= f.exp;
    con |= f.con;
    reorg |= f.reorg;
    intra |= f.exp && f.con;
  }
  EvolutionPattern p;
  if (exp && con) {
    p.kind = PatternKind::Mixed;
    bool inter = false;
    for (std::size_t i = 0; i < fams.size() && !inter; ++i) {
      for (std::size_t j = 0; j < fams.size() && !inter; ++j) inter = i != j && fams[i].exp && fams[j].con;
    }
    p.mixing = intra && inter ? Mixing::Both : intra ? Mixing::IntraOnly : Mixing::InterOnly;
  } else if (exp) {
    p.kind = PatternKind::ExpandOnly;
  } else if (con) {
    p.kind = PatternKind::ContractOnly;
  } else if (reorg) {
    p.kind = PatternKind::RestructureOnly;
  }
  return p;
}

std::string patterns_csv(const std::vector<LineageAnalysis>& lineages) {
  std::array<std::size_t, 5> kinds{};
  std::array<std::size_t, 4> mixing{};
  std::size_t total = 0;
  for (const LineageAnalysis& l : lineages) {
    auto p = classify_pattern(l.steps);
    if (!p) continue;
    ++total;
    ++kinds[static_cast<std::size_t>(p->kind)];
    ++mixing[static_cast<std::size_t>(p->mixing)];
  }
  std::string out = "pattern,count,percent\n";
  out += "lineages," + std::to_string(total) + "," + percent(total, total) + "\n";
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    out += std::string(to_string(static_cast<PatternKind>(k))) + "," + std::to_string(kinds[k]) + "," +
           percent(kinds[k], total) + "\n";
  }
  std::size_t mixed = kinds[static_cast<std::size_t>(PatternKind::Mixed)];
  // mixing detail as a share of mixed lineages
  for (Mixing m : {Mixing::IntraOnly, Mixing::InterOnly, Mixing::Both}) {
    std::size_t n = mixing[static_cast<std::size_t>(m)];
    out += "mixed/" + std::string(to_string(m)) + "," + std::to_string(n) + "," + percent(n, mixed) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// A-B-A

std::vector<ABATriplet> detect_aba(const LineageAnalysis& lineage) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < lineage.status.size(); ++i) {
    if (lineage.status[i] == spl::DetectionStatus::Ok) idx.push_back(i);
  }
  std::vector<ABATriplet> out;
  for (std::size_t k = 0; k + 2 < idx.size(); ++k) {
    const std::string& a = lineage.canonical[idx[k]];
    const std::string& b = lineage.canonical[idx[k + 1]];
    const std::string& c = lineage.canonical[idx[k + 2]];
    if (a != c || a == b) continue;
    ABATriplet t;
    t.lineage_id = lineage.lineage_id;
    t.versions = {idx[k], idx[k + 1], idx[k + 2]};
    t.restore_hours = static_cast<double>(lineage.times[idx[k + 2]] - lineage.times[idx[k + 1]]) / 3600.0;
    out.push_back(std::move(t));
  }
  return out;
}

ABASummary aba_summary(const std::vector<LineageAnalysis>& lineages) {
  ABASummary s;
  std::vector<double> restore;
  for (const LineageAnalysis& l : lineages) {
    if (!l.edited()) continue;
    ++s.lineages;
    auto ts = detect_aba(l);
    if (ts.empty()) continue;
    ++s.lineages_with_aba;
    s.triplets += ts.size();
    for (const auto& t : ts) restore.push_back(t.restore_hours);
  }
  s.median_restore_hours = quantile(restore, 0.5);
  auto within = [&](double h) {
    return share(static_cast<std::size_t>(std::count_if(restore.begin(), restore.end(), [h](double r) { return r <= h; })),
                 restore.size());
  };
  s.within_24h = within(24.0);
  s.within_7d = within(24.0 * 7);
  return s;
}

std::string aba_csv(const ABASummary& s) {
  std::string out = "metric,value\n";
  out += "lineages," + std::to_string(s.lineages) + "\n";
  out += "lineages_with_aba," + std::to_string(s.lineages_with_aba) + "\n";
  out += "lineages_with_aba_percent," + percent(s.lineages_with_aba, s.lineages) + "\n";
  out += "triplets," + std::to_string(s.triplets) + "\n";
  out += "median_restore_hours," + fmt_opt(s.median_restore_hours) + "\n";
  out += "restored_within_24h," + fmt_opt(s.within_24h) + "\n";
  out += "restored_within_7d," + fmt_opt(s.within_7d) + "\n";
  return out;
}

std::string aba_triplets_csv(const std::vector<LineageAnalysis>& lineages) {
  std::string out = "lineage_id,v_i,v_i1,v_i2,restore_hours\n";
  for (const LineageAnalysis& l : lineages) {
    if (!l.edited()) continue;
    for (const ABATriplet& t : detect_aba(l)) {
      out += csv_cell(t.lineage_id) + "," + std::to_string(t.versions[0]) + "," + std::to_string(t.versions[1]) + "," +
             std::to_string(t.versions[2]) + "," + format_number(t.restore_hours) + "\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// output

std::string steps_to_jsonl(const std::vector<LineageAnalysis>& lineages) {
  std::string out;
  for (const LineageAnalysis& l : lineages) {
    for (const StepRecord& s : l.steps) {
      ordered_json ops = ordered_json::object();
      for (StructOp op : s.ops.present()) ops[std::string(to_string(op))] = s.ops.count(op);
      ordered_json bd = ordered_json::object();
      for (std::size_t k = 0; k < kEditKinds; ++k) {
        if (s.breakdown.count[k] == 0) continue;
        bd[std::string(to_string(static_cast<EditKind>(k)))] = {{"count", s.breakdown.count[k]},
                                                                 {"cost", s.breakdown.cost[k]}};
      }
      ordered_json j = {{"lineage_id", s.lineage_id},
                        {"from", s.from_index},
                        {"to", s.to_index},
                        {"from_commit", s.from_commit},
                        {"to_commit", s.to_commit},
                        {"from_time", format_utc(s.from_time)},
                        {"to_time", format_utc(s.to_time)},
                        {"gap_hours", s.gap_hours()},
                        {"d_pred", s.d_pred},
                        {"predicate_changing", s.predicate_changing()},
                        {"bridged", s.bridged},
                        {"breakdown", bd},
                        {"ops", ops}};
      out += j.dump() + "\n";
    }
  }
  return out;
}

std::vector<std::string> write_analysis(const std::vector<LineageAnalysis>& lineages, const std::string& dir) {
  std::vector<StructuralOpSet> changing;
  for (const LineageAnalysis& l : lineages) {
    for (const StepRecord& s : l.steps) {
      if (s.predicate_changing()) changing.push_back(s.ops);
    }
  }
  std::vector<std::pair<std::string, std::string>> files = {
      {"steps.jsonl", steps_to_jsonl(lineages)},
      {"summary.json", prevalence_and_timing(lineages).to_json()},
      {"cohort_matrix.csv", cohort_matrix_csv(cohort_lag_matrix(lineages))},
      {"archetypes.csv", archetypes_csv(lineages)},
      {"patterns.csv", patterns_csv(lineages)},
      {"aba.csv", aba_csv(aba_summary(lineages))},
      {"aba_triplets.csv", aba_triplets_csv(lineages)},
      {"ops_matrix.csv", cooccurrence_matrix(changing).to_csv()},
  };
  std::vector<std::string> names;
  for (const auto& [name, content] : files) {
    write_file(dir + "/" + name, content);
    names.push_back(name);
  }
  return names;
}

}  // namespace pgir
