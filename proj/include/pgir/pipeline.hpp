// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PGIR_PIPELINE_HPP
#define PGIR_PIPELINE_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pgir/analytics.hpp"
#include "pgir/ingest.hpp"
#include "pgir/intent.hpp"
#include "pgir/labeler.hpp"

namespace pgir {

struct RepoSpec {
  std::string path;
  std::string snapshot_ref = "HEAD";
  std::string resolved_commit;  // filled in by run_pipeline
};

/// Everything a run depends on. The resolved form is written next to the
/// outputs as config.json.
struct RunConfig {
  std::vector<RepoSpec> repos;
  std::vector<std::string> path_filters = ScanOptions{}.path_filters;
  std::string convert_cmd;
  AlignParams align;
  CostWeights weights;
  double theta_flip = 0.5;
  double rename_threshold = 0.6;
  LabelerConfig llm;
  /// Answer intent prompts from this transcript instead of the network.
  std::string replay_transcript;
  bool skip_intent = false;
  /// Also write canonical.jsonl with every version's canonical graph.
  bool dump_canonical = false;
  std::string output_dir;
  unsigned parallelism = 4;
  /// Only used by randomized test corpora; recorded for completeness.
  std::uint64_t seed = 0;

  /// Throws InputError on out-of-range values.
  void validate() const;
  /// Stable JSON; never contains the credential itself. The output
  /// directory is left out so reruns elsewhere hash the same.
  std::string to_json() const;
};

struct ManifestEntry {
  std::string path;
  std::size_t bytes = 0;
  std::string sha256;
};

struct RunResult {
  std::string output_dir;
  std::vector<ManifestEntry> manifest;  // sorted by path; excludes manifest.json
  std::size_t lineages = 0;
  std::size_t steps = 0;
  std::size_t warnings = 0;
};

/// Builds the manifest for the listed files under `dir`.
std::vector<ManifestEntry> build_manifest(const std::string& dir, std::vector<std::string> files);
std::string manifest_json(const std::vector<ManifestEntry>& entries);

/// Picks the labeler a config asks for: replay when a transcript is set,
/// else the HTTP client. Throws FatalError when neither is configured.
std::unique_ptr<Labeler> make_labeler(const RunConfig& config);

/// ingest -> lineages.jsonl -> analytics -> intent, written into a sibling
/// staging directory that replaces `config.output_dir` only on success. An
/// existing output directory is replaced only if it holds a previous run
/// (a manifest.json) or is empty.
RunResult run_pipeline(const RunConfig& config);

/// Analytics over a lineages file; writes the analysis artifacts.
std::vector<std::string> analyze_to_dir(const std::vector<Lineage>& lineages, const AnalysisOptions& options,
                                        const std::string& dir);

/// Intent labeling over a lineages file; writes the intent artifacts and,
/// for live runs, transcript.jsonl.
std::vector<std::string> intent_to_dir(const std::vector<Lineage>& lineages, const AnalysisOptions& options,
                                       Labeler& labeler, const LabelerConfig& llm, bool write_transcript,
                                       const std::string& dir);

/// Reports for two single rules, as printed by the CLI.
std::string parse_report(std::string_view spl_text);
std::string canon_report(std::string_view spl_text);
std::string align_report(std::string_view spl_a, std::string_view spl_b, const AlignParams& params);
std::string diff_report(std::string_view spl_a, std::string_view spl_b, const AlignParams& params,
                        const CostWeights& weights, double theta_flip);
std::string ops_report(std::string_view spl_a, std::string_view spl_b, const AlignParams& params,
                       const CostWeights& weights, double theta_flip);
/// Co-occurrence matrix over the predicate-changing records of steps.jsonl.
std::string ops_matrix_from_steps(std::string_view steps_jsonl);

/// Canonical graph of a rule; throws InputError when there is no usable
/// detection logic.
PredicateGraph graph_of(std::string_view spl_text);

}  // namespace pgir

#endif  // PGIR_PIPELINE_HPP
