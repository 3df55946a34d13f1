// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PGIR_GIT_HPP
#define PGIR_GIT_HPP

#include <string>
#include <string_view>
#include <vector>

#include "pgir/util.hpp"

namespace pgir {

struct ProcessResult {
  int status = 0;  // exit code, or 128 + signal
  std::string out;
  std::string err;
};

/// Runs argv[0] (looked up on PATH) without a shell, feeding `input` on
/// stdin. Throws FatalError only when the process cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, std::string_view input = {},
                          const std::string& cwd = {});

struct CommitInfo {
  std::string id;
  std::vector<std::string> parents;
  Timestamp time = 0;  // author time
};

enum class ChangeKind { Added, Modified, Deleted };

struct FileChange {
  ChangeKind kind = ChangeKind::Modified;
  std::string path;
};

/// Read-only view of a repository through the git executable. Never touches
/// the index or the working tree.
class GitRepo {
 public:
  /// Throws FatalError if `path` is not a readable repository.
  explicit GitRepo(std::string path);

  const std::string& path() const { return path_; }

  /// Full commit id of `ref`. Throws FatalError if it does not resolve.
  std::string resolve(std::string_view ref) const;

  /// Commits reachable from `commit` along first parents, oldest first.
  std::vector<CommitInfo> first_parent_history(const std::string& commit) const;

  /// Files changed by `c` relative to its first parent (every file for a
  /// root commit). For a merge, only paths that also differ from every other
  /// parent are reported, so content brought in from a side branch alone
  /// does not show up.
  std::vector<FileChange> changes(const CommitInfo& c) const;

  std::string blob(const std::string& commit, const std::string& path) const;

 private:
  std::string git(const std::vector<std::string>& args) const;
  std::vector<FileChange> diff(const std::string& from, const std::string& to) const;

  std::string path_;
};

}  // namespace pgir

#endif  // PGIR_GIT_HPP
