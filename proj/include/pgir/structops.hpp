// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PGIR_STRUCTOPS_HPP
#define PGIR_STRUCTOPS_HPP

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pgir/align.hpp"
#include "pgir/cost.hpp"
#include "pgir/graph.hpp"

namespace pgir {

enum class StructOp { AndPlus, AndMinus, OrPlus, OrMinus, BranchPlus, BranchMinus, Move, Flip, ValUpdate };

inline constexpr std::size_t kStructOpCount = 9;
/// The first eight ops are structural; val-update is not.
inline constexpr std::size_t kStructuralOpCount = 8;

std::string_view to_string(StructOp op);
std::optional<StructOp> struct_op_from_string(std::string_view s);

inline bool is_expansion(StructOp op) {
  return op == StructOp::AndPlus || op == StructOp::OrPlus || op == StructOp::BranchPlus;
}
inline bool is_contraction(StructOp op) {
  return op == StructOp::AndMinus || op == StructOp::OrMinus || op == StructOp::BranchMinus;
}
inline bool is_reorganization(StructOp op) {
  return op == StructOp::Move || op == StructOp::Flip;
}

struct StructuralOpSet {
  std::array<std::size_t, kStructOpCount> counts{};
  /// Scope pairs behind every flip.
  std::vector<FlipPair> flip_witness;

  std::size_t count(StructOp op) const { return counts[static_cast<std::size_t>(op)]; }
  bool has(StructOp op) const { return count(op) > 0; }
  /// Ops present, in enum order.
  std::vector<StructOp> present() const;
  /// Number of distinct structural labels present.
  std::size_t distinct_structural() const;
  bool structural_empty() const { return distinct_structural() == 0; }

  friend bool operator==(const StructuralOpSet& x, const StructuralOpSet& y) {
    return x.counts == y.counts;
  }
};

/// Opposite-label unmatched scope pairs whose matched-leaf descendants
/// overlap in at least `theta_flip` of the smaller set. Greedy by overlap;
/// each scope joins at most one flip.
std::vector<FlipPair> detect_flip(const Alignment& aln, const PredicateGraph& a,
                                  const PredicateGraph& b, double theta_flip = 0.5);

StructuralOpSet label_step(const Alignment& aln, const EditScript& script, const PredicateGraph& a,
                           const PredicateGraph& b, const std::vector<FlipPair>& flips);

/// P(column | row) over steps carrying at least two distinct structural
/// labels. Rows never observed have no entries.
struct CooccurrenceMatrix {
  std::size_t multi_label_steps = 0;
  std::array<std::size_t, kStructuralOpCount> row_steps{};
  std::array<std::array<std::size_t, kStructuralOpCount>, kStructuralOpCount> joint{};

  std::optional<double> probability(StructOp row, StructOp col) const;
  std::string to_csv() const;
};

CooccurrenceMatrix cooccurrence_matrix(const std::vector<StructuralOpSet>& steps);

}  // namespace pgir

#endif  // PGIR_STRUCTOPS_HPP
