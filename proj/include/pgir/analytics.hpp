// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PGIR_ANALYTICS_HPP
#define PGIR_ANALYTICS_HPP

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pgir/cost.hpp"
#include "pgir/ingest.hpp"
#include "pgir/spl.hpp"
#include "pgir/structops.hpp"

namespace pgir {

struct AnalysisOptions {
  AlignParams align;
  CostWeights weights;
  double theta_flip = 0.5;
  /// Worker threads for per-lineage work; 0 picks the hardware count.
  unsigned threads = 0;
};

struct StepRecord {
  std::string lineage_id;
  std::size_t from_index = 0;
  std::size_t to_index = 0;
  std::string from_commit;
  std::string to_commit;
  Timestamp from_time = 0;
  Timestamp to_time = 0;
  double d_pred = 0.0;
  Breakdown breakdown;
  StructuralOpSet ops;
  /// True when unparseable versions lie between the two ends.
  bool bridged = false;

  bool predicate_changing() const { return d_pred > 0.0; }
  double gap_hours() const { return static_cast<double>(to_time - from_time) / 3600.0; }
};

/// Per-lineage view used by every aggregate below.
struct LineageAnalysis {
  std::string lineage_id;
  Timestamp created_at = 0;
  double lifetime_days = 0.0;
  std::size_t version_count = 0;
  /// Detection status per version; only Ok versions enter predicate analysis.
  std::vector<spl::DetectionStatus> status;
  std::vector<std::string> parse_errors;
  /// Canonical body per version, empty for excluded ones.
  std::vector<std::string> canonical;
  std::vector<Timestamp> times;
  std::vector<StepRecord> steps;

  std::size_t parseable_count() const;
  bool step_eligible() const { return parseable_count() >= 2; }
  std::size_t changing_steps() const;
  bool edited() const { return changing_steps() > 0; }
};

/// Adjacent parseable versions paired, bridging excluded ones.
LineageAnalysis analyze_lineage(const Lineage& lineage, const AnalysisOptions& options = {});
/// Same as analyze_lineage over a set, in input order, using worker threads.
std::vector<LineageAnalysis> analyze_lineages(const std::vector<Lineage>& lineages,
                                              const AnalysisOptions& options = {});

struct PrevalenceSummary {
  std::size_t total_rules = 0;
  std::size_t raw_steps = 0;       // sum of (versions - 1)
  std::size_t eligible_steps = 0;  // adjacent parseable pairs
  std::size_t changing_steps = 0;
  std::size_t step_eligible_rules = 0;
  std::size_t edited_rules = 0;
  std::optional<double> proportion_edited;

  std::optional<double> revisions_mean;
  std::optional<double> revisions_median;
  std::optional<double> revisions_p90;

  std::optional<double> first_revision_days_median;
  std::optional<double> first_revision_within_90d;
  std::optional<double> first_revision_after_2y;

  std::optional<double> magnitude_mean;
  std::optional<double> magnitude_p25;
  std::optional<double> magnitude_median;
  std::optional<double> magnitude_p90;
  std::optional<double> magnitude_max;

  /// Changing steps with at least one structural label, and how many
  /// distinct labels they carry (1, 2, 3, 4, 5+).
  std::size_t structural_steps = 0;
  std::optional<double> structural_average;
  std::array<std::size_t, 5> structural_buckets{};
  /// Per op, the fraction of changing steps carrying it.
  std::array<std::optional<double>, kStructOpCount> op_prevalence{};

  std::string to_json() const;
};

PrevalenceSummary prevalence_and_timing(const std::vector<LineageAnalysis>& lineages);

struct CohortCell {
  std::string cohort;  // calendar quarter of creation, e.g. 2016Q4
  std::size_t cohort_size = 0;
  long lag = 0;        // floor(days since creation / 91.3125)
  double total_d_pred = 0.0;
  double mean_d_pred = 0.0;  // total / cohort size
};

/// Cells with at least one changing step, sorted by cohort then lag.
std::vector<CohortCell> cohort_lag_matrix(const std::vector<LineageAnalysis>& lineages);
std::string cohort_matrix_csv(const std::vector<CohortCell>& cells);

struct Archetype {
  std::array<bool, 3> windows{};  // l0, l1-7, l8+

  std::string name() const;
  friend bool operator==(const Archetype&, const Archetype&) = default;
};

constexpr double kArchetypeMinLifetimeDays = 3 * 365.25;

/// nullopt when the observed lifetime is under three years.
std::optional<Archetype> classify_archetype(const LineageAnalysis& lineage);
/// All eight rows in fixed order, with counts and percentages of eligible.
std::string archetypes_csv(const std::vector<LineageAnalysis>& lineages);

enum class PatternKind { ValueOnly, ExpandOnly, ContractOnly, RestructureOnly, Mixed };
enum class Mixing { None, IntraOnly, InterOnly, Both };
std::string_view to_string(PatternKind p);
std::string_view to_string(Mixing m);

struct EvolutionPattern {
  PatternKind kind = PatternKind::ValueOnly;
  Mixing mixing = Mixing::None;
  friend bool operator==(const EvolutionPattern&, const EvolutionPattern&) = default;
};

/// Over the changing steps given; nullopt when there are none.
std::optional<EvolutionPattern> classify_pattern(const std::vector<StepRecord>& steps);
std::string patterns_csv(const std::vector<LineageAnalysis>& lineages);

struct ABATriplet {
  std::string lineage_id;
  std::array<std::size_t, 3> versions{};  // lineage version indices
  double restore_hours = 0.0;
};

/// Consecutive parseable versions with equal canonical form at both ends
/// and a different one in the middle. Windows may overlap.
std::vector<ABATriplet> detect_aba(const LineageAnalysis& lineage);

struct ABASummary {
  std::size_t lineages = 0;  // edited lineages
  std::size_t lineages_with_aba = 0;
  std::size_t triplets = 0;
  std::optional<double> median_restore_hours;
  std::optional<double> within_24h;
  std::optional<double> within_7d;
};

ABASummary aba_summary(const std::vector<LineageAnalysis>& lineages);
std::string aba_csv(const ABASummary& s);
std::string aba_triplets_csv(const std::vector<LineageAnalysis>& lineages);

std::string steps_to_jsonl(const std::vector<LineageAnalysis>& lineages);

/// Writes every analysis artifact into `dir` (which must exist). Returns
/// the file names written.
std::vector<std::string> write_analysis(const std::vector<LineageAnalysis>& lineages, const std::string& dir);

}  // namespace pgir

#endif  // PGIR_ANALYTICS_HPP
