// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PGIR_COST_HPP
#define PGIR_COST_HPP

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "pgir/align.hpp"
#include "pgir/graph.hpp"

namespace pgir {

struct CostWeights {
  double pred_insert = 1.0;
  double pred_delete = 1.0;
  double field_update = 0.2;
  double operator_update = 0.5;
  double value_update = 0.8;
  double bool_insert = 3.0;
  double bool_delete = 3.0;
  double bool_relabel = 4.5;
  double update_cap = 2.0;

  void validate() const;
  CostWeights scaled(double factor) const;
  /// Applies `key=value` overrides separated by commas or newlines, e.g.
  /// "value_update=0.6,bool_insert=2.5".
  void apply_overrides(std::string_view spec);
};

enum class EditKind { PredInsert, PredDelete, PredUpdate, OpInsert, OpDelete, OpRelabel };
inline constexpr std::size_t kEditKinds = 6;

std::string_view to_string(EditKind k);

struct Edit {
  EditKind kind = EditKind::PredInsert;
  NodeId a = kNoNode;  // node in A (deletes, updates, relabels)
  NodeId b = kNoNode;  // node in B (inserts, updates, relabels)
  // PredUpdate components
  bool field_changed = false;
  bool comparator_changed = false;
  bool value_changed = false;
  bool polarity_changed = false;
  double cost = 0.0;
};

struct Breakdown {
  std::array<std::size_t, kEditKinds> count{};
  std::array<double, kEditKinds> cost{};
  std::size_t field_updates = 0;
  std::size_t operator_updates = 0;
  std::size_t value_updates = 0;
};

/// A re-paired pair of opposite-label scopes (one unmatched operator in each
/// tree) reported as an AND/OR relabel.
struct FlipPair {
  NodeId a = kNoNode;
  NodeId b = kNoNode;
  double overlap = 0.0;
};

struct EditScript {
  std::vector<Edit> edits;
  double total = 0.0;
  Breakdown breakdown;
};

/// Derives the edit script of an alignment. Unmatched operators listed in
/// `flips` become OpRelabel edits instead of a delete plus an insert.
/// Throws FatalError when `aln` was not computed over (a, b).
EditScript edit_script(const Alignment& aln, const PredicateGraph& a, const PredicateGraph& b,
                       const CostWeights& weights = {}, const std::vector<FlipPair>& flips = {});

struct DistanceResult {
  double d_pred = 0.0;
  Alignment alignment;
  std::vector<FlipPair> flips;
  EditScript script;
};

/// align + flip detection + edit_script.
DistanceResult predicate_distance(const PredicateGraph& a, const PredicateGraph& b,
                                  const AlignParams& params = {}, const CostWeights& weights = {},
                                  double theta_flip = 0.5);

/// Rebuilds B from A's node content, the script's updates and inserts, and
/// B's shape. Throws FatalError if the script misses an edit it needs.
RawExpr replay_script(const Alignment& aln, const PredicateGraph& a, const PredicateGraph& b,
                      const EditScript& script);

}  // namespace pgir

#endif  // PGIR_COST_HPP
