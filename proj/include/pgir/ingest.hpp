// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PGIR_INGEST_HPP
#define PGIR_INGEST_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pgir/align.hpp"
#include "pgir/util.hpp"

namespace pgir {

/// `**` spans directories, `*` and `?` stay inside one path segment.
bool glob_match(std::string_view pattern, std::string_view path);

struct ScanOptions {
  std::string snapshot_ref = "HEAD";
  std::vector<std::string> path_filters = {"**/*.yml", "**/*.yaml", "**/*.spl"};
  /// Shell command fed each raw rule body on stdin; prints SPL on stdout.
  std::string convert_cmd;
};

enum class EventKind { Added, Modified, Deleted };

struct FileEvent {
  EventKind kind = EventKind::Modified;
  std::string path;
  /// In-file identifier (`id`, else `name`) of YAML rules; empty otherwise.
  std::string rule_id;
  /// Rule body as SPL. Empty for deletions.
  std::string text;
};

struct CommitEvents {
  std::string commit;
  Timestamp time = 0;
  std::vector<FileEvent> files;
};

struct ScanWarning {
  std::string commit;
  std::string path;
  std::string message;
};

struct ScanResult {
  std::string repo;
  std::string snapshot_commit;
  Timestamp snapshot_time = 0;
  std::vector<CommitEvents> commits;  // first-parent order, oldest first
  std::vector<ScanWarning> warnings;
};

/// Throws FatalError for an unreadable repository or unresolvable ref.
ScanResult scan_repository(const std::string& repo_path, const ScanOptions& options = {});

/// Pulls the SPL out of a rule file body: the `search` key of a YAML rule,
/// the converter output when a command is configured, or the text as is for
/// `.spl` files. Returns nullopt when nothing usable is found.
struct ExtractedRule {
  std::string text;
  std::string rule_id;
};
std::optional<ExtractedRule> extract_rule(std::string_view path, std::string_view body,
                                          const std::string& convert_cmd, std::string* error = nullptr);

struct RuleVersion {
  std::string commit;
  Timestamp time = 0;
  std::string path;
  std::string rule_id;
  std::string text;
  std::string text_digest;  // sha256 of text
};

enum class LineageStatus { Active, Deleted };
std::string_view to_string(LineageStatus s);

struct Lineage {
  std::string id;  // first path @ first commit (12 hex)
  std::string repo;
  LineageStatus status = LineageStatus::Active;
  Timestamp created_at = 0;
  Timestamp last_seen = 0;
  /// Snapshot time of the scan, the end of observation for active lineages.
  Timestamp snapshot_time = 0;
  std::vector<RuleVersion> versions;  // version_index = position

  /// Observed lifetime in days: up to the deletion, else up to the snapshot.
  double lifetime_days() const;
};

struct LineageOptions {
  double rename_threshold = 0.6;
  AlignParams align;
};

/// Matched-leaf fraction of the alignment between the two rule texts:
/// matched leaf pairs / max(leaf counts). Unparseable texts score 1 when
/// byte-identical, else 0.
double rename_similarity(std::string_view text_a, std::string_view text_b, const AlignParams& params = {});

std::vector<Lineage> build_lineages(const ScanResult& scan, const LineageOptions& options = {});

std::string lineages_to_jsonl(const std::vector<Lineage>& lineages);
/// Throws InputError on malformed lines.
std::vector<Lineage> lineages_from_jsonl(std::string_view text);

}  // namespace pgir

#endif  // PGIR_INGEST_HPP
