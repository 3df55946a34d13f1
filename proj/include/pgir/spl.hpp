// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PGIR_SPL_HPP
#define PGIR_SPL_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pgir/predicate.hpp"
#include "pgir/util.hpp"

namespace pgir::spl {

/// Rule text that the front end cannot handle (unbalanced quotes, unknown
/// comparator, subsearch, ...). The whole version is marked unparseable.
class ParseFailure : public InputError {
 public:
  using InputError::InputError;
};

enum class StageKind { Filtering, NonFiltering };

std::string_view to_string(StageKind k);

struct Stage {
  std::size_t index = 0;
  /// Stage text with surrounding whitespace removed.
  std::string text;
  StageKind kind = StageKind::NonFiltering;
  /// Lower-cased command word, or empty for a leading bare search.
  std::string command;
};

/// Splits on top-level `|` (never inside double quotes, backtick macros,
/// parentheses or brackets) and classifies each stage.
/// Throws ParseFailure on unbalanced quotes or brackets.
std::vector<Stage> split_stages(std::string_view spl_text);

/// Parses a filtering stage into a Boolean expression. NOT binds tighter than
/// AND (explicit or implicit by adjacency), which binds tighter than OR.
/// Returns nullopt for a filtering stage that carries no predicate (for
/// instance a `tstats` stage without a where-clause).
/// Throws ParseFailure on malformed input.
std::optional<RawExpr> parse_filter(const Stage& stage);

enum class DetectionStatus { Ok, ParseFailure, EmptyDetection };

std::string_view to_string(DetectionStatus s);

struct Detection {
  DetectionStatus status = DetectionStatus::EmptyDetection;
  /// Conjunction of every filtering stage; set iff status == Ok.
  std::optional<RawExpr> expr;
  std::string error;
};

/// Extracts the detection logic of a whole pipeline. Multiple filtering
/// stages are conjoined under a single root AND. Never throws on bad input;
/// failures are reported through the status.
Detection extract_detection(std::string_view spl_text);

}  // namespace pgir::spl

#endif  // PGIR_SPL_HPP
