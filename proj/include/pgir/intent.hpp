// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PGIR_INTENT_HPP
#define PGIR_INTENT_HPP

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pgir/analytics.hpp"
#include "pgir/labeler.hpp"

namespace pgir {

enum class Direction { Broader, Narrower, Mixed, Unclear };
enum class Rationale { CE, FPR, MT, IE };
enum class Confidence { High, Medium, Low };

/// Schema spellings ("broader", "coverage_expansion", "high").
std::string_view to_string(Direction d);
std::string_view to_string(Rationale r);
std::string_view to_string(Confidence c);
/// CE, FPR, MT, IE.
std::string_view short_name(Rationale r);
std::optional<Direction> direction_from_string(std::string_view s);
std::optional<Rationale> rationale_from_string(std::string_view s);
std::optional<Confidence> confidence_from_string(std::string_view s);

struct IntentRecord {
  std::string from_commit;
  std::string to_commit;
  Direction direction = Direction::Unclear;
  bool predicate_modified_present = false;
  bool predicate_added = false;
  bool predicate_removed = false;
  std::string summary;
  Rationale rationale = Rationale::IE;
  Confidence confidence = Confidence::Low;
  std::string rationale_support;

  /// The labeler claims some predicate-level change.
  bool any_change() const { return predicate_modified_present || predicate_added || predicate_removed; }
  friend bool operator==(const IntentRecord&, const IntentRecord&) = default;
};

/// Strict schema parse: every field present with the right type, no extra
/// keys, known enum values only. Throws InputError otherwise.
IntentRecord parse_intent_record(std::string_view json_text);
std::string intent_record_json(const IntentRecord& r);

/// The filtering stages of a rule joined with " | ".
std::string detection_text(std::string_view spl_text);
std::string_view prompt_template();
std::string render_prompt(std::string_view detection_a, std::string_view detection_b);
/// Rough token count (bytes / 4, rounded up).
std::size_t estimate_tokens(std::string_view prompt);

struct InternalCheck {
  bool consistent = true;
  std::string kind;  // e.g. "narrower->IE" when inconsistent
};
/// broader->CE, narrower->FPR, mixed->MT, unclear->IE.
Rationale expected_rationale(Direction d);
InternalCheck validate_internal(const IntentRecord& r);

struct CrossCheck {
  bool llm_change = false;
  bool pgir_change = false;
  bool agree() const { return llm_change == pgir_change; }
  /// Set only for asserted flags on pairs where both sides see a change.
  std::optional<bool> added_supported;
  std::optional<bool> removed_supported;
  std::optional<bool> modified_supported;
};
CrossCheck validate_cross(const IntentRecord& r, const StepRecord& step);

enum class Cohort { IEOnly, Singleton, MultiRevision };
enum class TrajectoryClass { None, Coupled, CEOnly, FPROnly, Oscillating, Phased };
std::string_view to_string(Cohort c);
std::string_view to_string(TrajectoryClass t);

struct Trajectory {
  Cohort cohort = Cohort::IEOnly;
  TrajectoryClass cls = TrajectoryClass::None;  // None outside the multi-revision cohort
  std::optional<int> tau;                        // Oscillating and Phased only
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// nullopt for an empty sequence.
std::optional<Trajectory> classify_trajectory(const std::vector<Rationale>& labels);

struct DatedLabel {
  Rationale label = Rationale::IE;
  Timestamp time = 0;
};

enum class GapKind { CEtoCE, FPRtoFPR, CEtoFPR, FPRtoCE };
std::string_view to_string(GapKind g);

struct TransitionGaps {
  std::vector<std::pair<GapKind, double>> gaps;  // days, in order
  std::optional<double> days_to_first_flip;      // from creation
  bool still_flipping = false;                   // last two directional labels differ
};
TransitionGaps transition_gaps(const std::vector<DatedLabel>& labels, Timestamp created_at);

enum class PairStatus { Labeled, ContextOverflow, LabelerFailure };
std::string_view to_string(PairStatus s);

struct PairResult {
  std::string pair_id;  // lineage:from..to
  std::string lineage_id;
  const StepRecord* step = nullptr;
  PairStatus status = PairStatus::Labeled;
  std::optional<IntentRecord> record;
  std::string error;
  std::size_t prompt_tokens = 0;
  CrossCheck cross;
  InternalCheck internal;
  /// Enters trajectories: both sides see a change, or the labeler failed
  /// on a changing step (counted as IE).
  bool in_trajectory = false;
  Rationale trajectory_label = Rationale::IE;
};

struct LineageIntent {
  std::string lineage_id;
  Timestamp created_at = 0;
  std::vector<DatedLabel> labels;
  std::optional<Trajectory> trajectory;
  TransitionGaps gaps;
};

struct IntentRun {
  std::vector<PairResult> pairs;
  std::vector<LineageIntent> lineages;  // lineages with at least one label
};

std::string pair_id(const StepRecord& step);

/// Labels every step of every lineage. `lineages` and `analyses` are
/// parallel. The analyses must outlive the result.
IntentRun run_intent(const std::vector<Lineage>& lineages, const std::vector<LineageAnalysis>& analyses,
                     Labeler& labeler, const LabelerConfig& config, TranscriptWriter* transcript = nullptr);

std::string intent_jsonl(const IntentRun& run);
std::string validation_csv(const IntentRun& run);
std::string trajectories_csv(const IntentRun& run);
std::string lineage_trajectories_csv(const IntentRun& run);
std::string gaps_csv(const IntentRun& run);

/// Writes the intent artifacts into `dir`; returns the file names.
std::vector<std::string> write_intent(const IntentRun& run, const std::string& dir);

}  // namespace pgir

#endif  // PGIR_INTENT_HPP
