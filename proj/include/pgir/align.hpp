// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PGIR_ALIGN_HPP
#define PGIR_ALIGN_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pgir/graph.hpp"

namespace pgir {

enum class Phase { P1, P2, P3, P4, P2b };

std::string_view to_string(Phase p);

struct AlignParams {
  int min_anchors = 1;
  double theta_sup = 0.5;
  double theta_cov = 0.5;
  double fuzzy_floor = 0.7;
  int candidate_cap = 8;

  /// Throws InputError when a value is outside its domain.
  void validate() const;
};

struct MatchPair {
  NodeId a = kNoNode;
  NodeId b = kNoNode;
  Phase phase = Phase::P1;
};

/// Partial injective mapping between the nodes of two canonical graphs.
class Alignment {
 public:
  Alignment() = default;
  Alignment(const PredicateGraph& a, const PredicateGraph& b);

  NodeId image(NodeId a) const { return a_to_b_[static_cast<std::size_t>(a)]; }
  NodeId preimage(NodeId b) const { return b_to_a_[static_cast<std::size_t>(b)]; }
  bool matched_a(NodeId a) const { return image(a) != kNoNode; }
  bool matched_b(NodeId b) const { return preimage(b) != kNoNode; }
  std::optional<Phase> phase(NodeId a) const;

  /// Pairs in increasing A id.
  std::vector<MatchPair> pairs() const;
  std::vector<NodeId> unmatched_a() const;
  std::vector<NodeId> unmatched_b() const;

  std::size_t size_a() const { return a_to_b_.size(); }
  std::size_t size_b() const { return b_to_a_.size(); }
  /// Content digests of the graphs this alignment was computed over.
  const std::string& fingerprint_a() const { return fp_a_; }
  const std::string& fingerprint_b() const { return fp_b_; }

  /// Records a pair. Callers are responsible for the consistency checks.
  void add(NodeId a, NodeId b, Phase phase);

 private:
  std::vector<NodeId> a_to_b_;
  std::vector<NodeId> b_to_a_;
  std::vector<std::optional<Phase>> phase_;
  std::string fp_a_;
  std::string fp_b_;
};

/// Digest identifying a graph's logic (metadata excluded).
std::string graph_fingerprint(const PredicateGraph& g);

Alignment align(const PredicateGraph& a, const PredicateGraph& b, const AlignParams& params = {});

/// Nearest matched proper ancestor of `a` in A, or kNoNode.
NodeId nearest_matched_ancestor_a(const PredicateGraph& a, const Alignment& aln, NodeId id);
/// Nearest matched proper ancestor of `b` in B, or kNoNode.
NodeId nearest_matched_ancestor_b(const PredicateGraph& b, const Alignment& aln, NodeId id);

/// Whether adding (i -> j) keeps the mapping ancestry-consistent with the
/// pairs already present.
bool ancestry_consistent(const PredicateGraph& a, const PredicateGraph& b, const Alignment& aln,
                         NodeId i, NodeId j);

/// Checks injectivity, label agreement and ancestry consistency of every
/// pair. Returns an empty string when valid, else a description.
std::string verify_alignment(const PredicateGraph& a, const PredicateGraph& b,
                             const Alignment& aln);

/// Normalized edit similarity for scalars; Jaccard over member sets for lists.
double value_similarity(const ValuePayload& x, const ValuePayload& y);

}  // namespace pgir

#endif  // PGIR_ALIGN_HPP
