// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#include "pgir/graph.hpp"

#include <algorithm>
#include <tuple>
#include <utility>

#include "pgir/util.hpp"

namespace pgir {

std::string_view to_string(OpLabel l) { return l == OpLabel::And ? "AND" : "OR"; }

namespace {

void append_field(std::string& out, std::string_view s) {
  out += std::to_string(s.size());
  out.push_back(':');
  out.append(s);
}

std::string leaf_serial(const AtomicPredicate& p, Polarity pol) {
  std::string out = "P";
  append_field(out, p.field);
  out += std::to_string(static_cast<int>(p.comparator));
  out.push_back(p.value.is_list() ? 'L' : 'S');
  if (p.value.is_list()) {
    out += std::to_string(p.value.members.size());
    for (const auto& m : p.value.members) {
      out += std::to_string(static_cast<int>(m.kind));
      append_field(out, m.text);
    }
  } else {
    out += std::to_string(static_cast<int>(p.value.kind));
    append_field(out, p.value.text);
  }
  out.push_back(pol == Polarity::Negative ? '-' : '+');
  return out;
}

// Working tree used during canonicalization.
struct CNode {
  bool leaf = false;
  OpLabel label = OpLabel::And;
  AtomicPredicate predicate;
  Polarity polarity = Polarity::Positive;
  std::vector<CNode> children;
  std::string serial;  // filled by finish()
  std::string norm_value;
};

OpLabel flip(OpLabel l) { return l == OpLabel::And ? OpLabel::Or : OpLabel::And; }

CNode push_negation(const RawExpr& e, bool negated) {
  CNode n;
  switch (e.kind) {
    case RawExpr::Kind::Predicate: {
      n.leaf = true;
      n.predicate.field = to_lower(e.predicate.field);
      n.predicate.comparator = e.predicate.comparator;
      n.predicate.value = normalized_payload(e.predicate.value);
      bool neg = (e.polarity == Polarity::Negative) != negated;
      n.polarity = neg ? Polarity::Negative : Polarity::Positive;
      return n;
    }
    case RawExpr::Kind::Not:
      if (e.children.size() != 1) throw InputError("NOT must have exactly one operand");
      return push_negation(e.children.front(), !negated);
    case RawExpr::Kind::And:
    case RawExpr::Kind::Or: {
      OpLabel l = e.kind == RawExpr::Kind::And ? OpLabel::And : OpLabel::Or;
      n.label = negated ? flip(l) : l;
      for (const auto& c : e.children) n.children.push_back(push_negation(c, negated));
      if (n.children.empty()) throw InputError("operator without operands");
      return n;
    }
  }
  return n;
}

void finish(CNode& n) {
  if (n.leaf) {
    n.serial = leaf_serial(n.predicate, n.polarity);
    n.norm_value = value_normalize(n.predicate.value);
    return;
  }
  n.serial = n.label == OpLabel::And ? "A(" : "O(";
  for (const auto& c : n.children) {
    append_field(n.serial, c.serial);
  }
  n.serial.push_back(')');
}

int kind_rank(const CNode& n) {
  if (!n.leaf) return 2;
  return n.predicate.value.is_list() ? 1 : 0;
}

bool sort_less(const CNode& a, const CNode& b) {
  int ra = kind_rank(a), rb = kind_rank(b);
  if (ra != rb) return ra < rb;
  if (a.leaf) {
    auto ka = std::tie(a.predicate.field, a.predicate.comparator, a.norm_value, a.polarity);
    auto kb = std::tie(b.predicate.field, b.predicate.comparator, b.norm_value, b.polarity);
    if (ka != kb) return ka < kb;
  } else if (a.label != b.label) {
    return a.label < b.label;
  }
  return a.serial < b.serial;
}

CNode normalize(CNode n) {
  if (n.leaf) {
    finish(n);
    return n;
  }
  std::vector<CNode> flat;
  for (auto& c : n.children) {
    CNode nc = normalize(std::move(c));
    if (!nc.leaf && nc.label == n.label) {
      for (auto& g : nc.children) flat.push_back(std::move(g));
    } else {
      flat.push_back(std::move(nc));
    }
  }
  std::sort(flat.begin(), flat.end(), sort_less);
  flat.erase(std::unique(flat.begin(), flat.end(),
                         [](const CNode& a, const CNode& b) { return a.serial == b.serial; }),
             flat.end());
  if (flat.size() == 1) return std::move(flat.front());
  n.children = std::move(flat);
  finish(n);
  return n;
}

void emit(const CNode& n, NodeId parent, std::vector<Node>& out) {
  auto id = static_cast<NodeId>(out.size());
  Node node;
  node.leaf = n.leaf;
  node.label = n.label;
  node.predicate = n.predicate;
  node.polarity = n.polarity;
  node.parent = parent;
  out.push_back(std::move(node));
  for (const auto& c : n.children) {
    out[static_cast<std::size_t>(id)].children.push_back(static_cast<NodeId>(out.size()));
    emit(c, id, out);
  }
}

void emit_verbatim(const RawExpr& e, NodeId parent, std::vector<Node>& out) {
  auto id = static_cast<NodeId>(out.size());
  Node node;
  node.parent = parent;
  switch (e.kind) {
    case RawExpr::Kind::Predicate:
      node.leaf = true;
      node.predicate = e.predicate;
      node.polarity = e.polarity;
      break;
    case RawExpr::Kind::And:
      node.label = OpLabel::And;
      break;
    case RawExpr::Kind::Or:
      node.label = OpLabel::Or;
      break;
    case RawExpr::Kind::Not:
      throw InputError("NOT is not allowed in a predicate graph");
  }
  out.push_back(std::move(node));
  for (const auto& c : e.children) {
    out[static_cast<std::size_t>(id)].children.push_back(static_cast<NodeId>(out.size()));
    emit_verbatim(c, id, out);
  }
}

}  // namespace

void PredicateGraph::finalize() {
  for (auto i = static_cast<NodeId>(nodes_.size()) - 1; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    n.size = 1;
    n.height = 0;
    for (NodeId c : n.children) {
      const Node& cn = node(c);
      n.size += cn.size;
      n.height = std::max(n.height, cn.height + 1);
    }
  }
  for (Node& n : nodes_) {
    n.depth = n.parent == kNoNode ? 0 : node(n.parent).depth + 1;
  }
}

std::size_t PredicateGraph::predicate_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf; }));
}

std::vector<NodeId> PredicateGraph::leaves() const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].leaf) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

std::vector<NodeId> PredicateGraph::operators() const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].leaf) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

std::vector<NodeId> PredicateGraph::leaves_under(NodeId id) const {
  std::vector<NodeId> out;
  for (NodeId i = id; i < id + node(id).size; ++i) {
    if (node(i).leaf) out.push_back(i);
  }
  return out;
}

std::string PredicateGraph::subtree_key(NodeId id) const {
  const Node& n = node(id);
  if (n.leaf) return leaf_serial(n.predicate, n.polarity);
  std::string out = n.label == OpLabel::And ? "A(" : "O(";
  for (NodeId c : n.children) append_field(out, subtree_key(c));
  out.push_back(')');
  return out;
}

RawExpr PredicateGraph::to_expr() const {
  if (nodes_.empty()) return {};
  auto build = [this](auto&& self, NodeId id) -> RawExpr {
    const Node& n = node(id);
    if (n.leaf) return RawExpr::leaf(n.predicate, n.polarity);
    std::vector<RawExpr> kids;
    for (NodeId c : n.children) kids.push_back(self(self, c));
    return RawExpr::op(n.label == OpLabel::And ? RawExpr::Kind::And : RawExpr::Kind::Or,
                       std::move(kids));
  };
  return build(build, 0);
}

PredicateGraph PredicateGraph::from_expr_verbatim(const RawExpr& expr) {
  PredicateGraph g;
  emit_verbatim(expr, kNoNode, g.nodes_);
  g.finalize();
  return g;
}

PredicateGraph canonicalize(const RawExpr& expr, GraphMeta meta) {
  CNode root = normalize(push_negation(expr, false));
  PredicateGraph g;
  g.meta = std::move(meta);
  emit(root, kNoNode, g.nodes_);
  g.finalize();
  return g;
}

std::string exact_key(const Node& leaf) {
  std::string out;
  append_field(out, leaf.predicate.field);
  out.push_back('|');
  out.append(to_string(leaf.predicate.comparator));
  out.push_back('|');
  out.append(to_string(leaf.predicate.value.kind));
  out.push_back('|');
  append_field(out, value_normalize(leaf.predicate.value));
  out.push_back(leaf.polarity == Polarity::Negative ? '-' : '+');
  return out;
}

}  // namespace pgir
