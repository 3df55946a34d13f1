// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PGIR_GRAPH_HPP
#define PGIR_GRAPH_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "pgir/predicate.hpp"

namespace pgir {

enum class OpLabel { And, Or };

std::string_view to_string(OpLabel l);

using NodeId = int;
inline constexpr NodeId kNoNode = -1;

struct Node {
  bool leaf = false;
  OpLabel label = OpLabel::And;        // operators only
  AtomicPredicate predicate;           // leaves only
  Polarity polarity = Polarity::Positive;
  std::vector<NodeId> children;
  NodeId parent = kNoNode;
  int depth = 0;
  /// 0 for leaves, 1 + max child height for operators.
  int height = 0;
  /// Number of nodes in the subtree rooted here (preorder range length).
  int size = 1;

  friend bool operator==(const Node&, const Node&) = default;
};

struct GraphMeta {
  std::string rule;
  std::string repo;
  std::string version;
  std::string commit;

  friend bool operator==(const GraphMeta&, const GraphMeta&) = default;
};

/// Canonical predicate tree. Nodes are stored in preorder, root at index 0,
/// so a subtree occupies a contiguous id range.
class PredicateGraph {
 public:
  PredicateGraph() = default;

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  NodeId root() const { return nodes_.empty() ? kNoNode : 0; }

  GraphMeta meta;

  std::size_t predicate_count() const;
  std::vector<NodeId> leaves() const;
  std::vector<NodeId> operators() const;

  /// True iff `anc` is a proper ancestor of `id`.
  bool is_ancestor(NodeId anc, NodeId id) const {
    return anc < id && id < anc + node(anc).size;
  }
  /// Leaf ids under `id` (including `id` itself if it is a leaf).
  std::vector<NodeId> leaves_under(NodeId id) const;

  /// Compact, unambiguous serialization of a subtree; equal strings iff
  /// structurally identical subtrees.
  std::string subtree_key(NodeId id) const;

  /// The graph viewed as an expression; negative leaves carry polarity.
  RawExpr to_expr() const;

  /// Structural equality of the logic, ignoring metadata.
  bool same_logic(const PredicateGraph& other) const { return nodes_ == other.nodes_; }

  friend bool operator==(const PredicateGraph&, const PredicateGraph&) = default;

  /// Builds a graph from an expression exactly as given (no reordering). The
  /// expression must not contain NOT nodes. Used by the text reader.
  static PredicateGraph from_expr_verbatim(const RawExpr& expr);

 private:
  friend PredicateGraph canonicalize(const RawExpr& expr, GraphMeta meta);
  void finalize();

  std::vector<Node> nodes_;
};

/// NOT elimination (De Morgan + leaf polarity), associative flattening,
/// duplicate removal, single-child collapse and canonical child order.
/// Field names are lower-cased and values normalized.
PredicateGraph canonicalize(const RawExpr& expr, GraphMeta meta = {});

/// Leaf identity used for exact matching:
/// (field, comparator, normalized value, polarity).
std::string exact_key(const Node& leaf);

}  // namespace pgir

#endif  // PGIR_GRAPH_HPP
