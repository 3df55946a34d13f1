// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#include "pgir/structops.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

#include "pgir/util.hpp"

namespace pgir {

namespace {

constexpr std::array<std::string_view, kStructOpCount> kOpNames{
    "and+", "and-", "or+", "or-", "branch+", "branch-", "move", "flip", "val-update"};

}  // namespace

std::string_view to_string(StructOp op) { return kOpNames[static_cast<std::size_t>(op)]; }

std::optional<StructOp> struct_op_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kOpNames.size(); ++i) {
    if (kOpNames[i] == s) return static_cast<StructOp>(i);
  }
  return std::nullopt;
}

std::vector<StructOp> StructuralOpSet::present() const {
  std::vector<StructOp> out;
  for (std::size_t i = 0; i < kStructOpCount; ++i) {
    if (counts[i] > 0) out.push_back(static_cast<StructOp>(i));
  }
  return out;
}

std::size_t StructuralOpSet::distinct_structural() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < kStructuralOpCount; ++i) n += counts[i] > 0;
  return n;
}

std::vector<FlipPair> detect_flip(const Alignment& aln, const PredicateGraph& a,
                                  const PredicateGraph& b, double theta_flip) {
  struct Cand {
    double ratio;
    NodeId a, b;
  };
  std::vector<Cand> cands;
  for (NodeId oa : a.operators()) {
    if (aln.matched_a(oa)) continue;
    std::vector<NodeId> la;
    for (NodeId l : a.leaves_under(oa)) {
      if (aln.matched_a(l)) la.push_back(l);
    }
    if (la.empty()) continue;
    for (NodeId ob : b.operators()) {
      if (aln.matched_b(ob) || b.node(ob).label == a.node(oa).label) continue;
      std::size_t lb = 0;
      for (NodeId l : b.leaves_under(ob)) lb += aln.matched_b(l);
      if (lb == 0) continue;
      std::size_t overlap = 0;
      for (NodeId p : la) overlap += b.is_ancestor(ob, aln.image(p));
      if (overlap == 0) continue;
      double ratio = static_cast<double>(overlap) / static_cast<double>(std::min(la.size(), lb));
      if (ratio >= theta_flip) cands.push_back({ratio, oa, ob});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
    return std::make_tuple(-x.ratio, x.a, x.b) < std::make_tuple(-y.ratio, y.a, y.b);
  });
  std::vector<FlipPair> out;
  std::vector<bool> used_a(a.size(), false), used_b(b.size(), false);
  for (const Cand& c : cands) {
    if (used_a[static_cast<std::size_t>(c.a)] || used_b[static_cast<std::size_t>(c.b)]) continue;
    used_a[static_cast<std::size_t>(c.a)] = true;
    used_b[static_cast<std::size_t>(c.b)] = true;
    out.push_back({c.a, c.b, c.ratio});
  }
  std::sort(out.begin(), out.end(), [](const FlipPair& x, const FlipPair& y) { return x.a < y.a; });
  return out;
}

namespace {

// One side of the step: the tree, its correspondences and which unmatched
// operators start a branch.
struct Side {
  const PredicateGraph& g;
  std::vector<NodeId> corr;  // image/preimage, or flip partner, else kNoNode
  std::vector<bool> branch_root;
  std::vector<bool> in_branch;
};

Side make_side(const PredicateGraph& g, std::vector<NodeId> corr, bool leaf_root_growth) {
  Side s{g, std::move(corr), std::vector<bool>(g.size(), false),
         std::vector<bool>(g.size(), false)};
  for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
    const Node& n = g.node(id);
    bool unmatched_op = !n.leaf && s.corr[static_cast<std::size_t>(id)] == kNoNode;
    if (id == g.root() && leaf_root_growth) continue;  // the grown root is not a branch
    NodeId p = n.parent;
    bool parent_in_branch = p != kNoNode && (s.branch_root[static_cast<std::size_t>(p)] ||
                                             s.in_branch[static_cast<std::size_t>(p)]);
    if (parent_in_branch) {
      s.in_branch[static_cast<std::size_t>(id)] = true;
    } else if (unmatched_op) {
      s.branch_root[static_cast<std::size_t>(id)] = true;
    }
  }
  return s;
}

NodeId nearest_corresponding_ancestor(const Side& s, NodeId id) {
  for (NodeId p = s.g.node(id).parent; p != kNoNode; p = s.g.node(p).parent) {
    if (s.corr[static_cast<std::size_t>(p)] != kNoNode) return p;
  }
  return kNoNode;
}

void count_side(const Side& s, StructuralOpSet& ops, bool plus) {
  for (NodeId id = 0; id < static_cast<NodeId>(s.g.size()); ++id) {
    auto i = static_cast<std::size_t>(id);
    if (s.branch_root[i]) {
      ++ops.counts[static_cast<std::size_t>(plus ? StructOp::BranchPlus : StructOp::BranchMinus)];
      continue;
    }
    const Node& n = s.g.node(id);
    if (!n.leaf || s.corr[i] != kNoNode || s.in_branch[i]) continue;
    bool disjunctive = n.parent != kNoNode && s.g.node(n.parent).label == OpLabel::Or;
    StructOp op = disjunctive ? (plus ? StructOp::OrPlus : StructOp::OrMinus)
                              : (plus ? StructOp::AndPlus : StructOp::AndMinus);
    ++ops.counts[static_cast<std::size_t>(op)];
  }
}

}  // namespace

StructuralOpSet label_step(const Alignment& aln, const EditScript& script, const PredicateGraph& a,
                           const PredicateGraph& b, const std::vector<FlipPair>& flips) {
  StructuralOpSet ops;
  if (a.empty() || b.empty()) return ops;
  std::vector<NodeId> corr_a(a.size(), kNoNode), corr_b(b.size(), kNoNode);
  for (const MatchPair& p : aln.pairs()) {
    corr_a[static_cast<std::size_t>(p.a)] = p.b;
    corr_b[static_cast<std::size_t>(p.b)] = p.a;
  }
  for (const FlipPair& f : flips) {
    corr_a[static_cast<std::size_t>(f.a)] = f.b;
    corr_b[static_cast<std::size_t>(f.b)] = f.a;
  }
  // a single-leaf rule growing into a scope: the new root is plain growth
  bool grow = a.node(a.root()).leaf && !b.node(b.root()).leaf &&
              corr_b[static_cast<std::size_t>(b.root())] == kNoNode;
  bool shrink = b.node(b.root()).leaf && !a.node(a.root()).leaf &&
                corr_a[static_cast<std::size_t>(a.root())] == kNoNode;
  Side sa = make_side(a, corr_a, shrink);
  Side sb = make_side(b, corr_b, grow);
  count_side(sb, ops, true);
  count_side(sa, ops, false);

  for (const MatchPair& p : aln.pairs()) {
    if (!a.node(p.a).leaf) continue;
    NodeId anc_a = nearest_corresponding_ancestor(sa, p.a);
    NodeId anc_b = nearest_corresponding_ancestor(sb, p.b);
    NodeId expected = anc_a == kNoNode ? kNoNode : corr_a[static_cast<std::size_t>(anc_a)];
    if (expected != anc_b) ++ops.counts[static_cast<std::size_t>(StructOp::Move)];
  }
  ops.counts[static_cast<std::size_t>(StructOp::Flip)] = flips.size();
  ops.flip_witness = flips;
  ops.counts[static_cast<std::size_t>(StructOp::ValUpdate)] =
      script.breakdown.count[static_cast<std::size_t>(EditKind::PredUpdate)];
  return ops;
}

std::optional<double> CooccurrenceMatrix::probability(StructOp row, StructOp col) const {
  auto r = static_cast<std::size_t>(row);
  auto c = static_cast<std::size_t>(col);
  if (r >= kStructuralOpCount || c >= kStructuralOpCount || row_steps[r] == 0) return std::nullopt;
  return static_cast<double>(joint[r][c]) / static_cast<double>(row_steps[r]);
}

std::string CooccurrenceMatrix::to_csv() const {
  std::ostringstream out;
  out << "row";
  for (std::size_t c = 0; c < kStructuralOpCount; ++c) out << ',' << kOpNames[c];
  out << ",n\n";
  for (std::size_t r = 0; r < kStructuralOpCount; ++r) {
    out << kOpNames[r];
    for (std::size_t c = 0; c < kStructuralOpCount; ++c) {
      out << ',';
      if (auto p = probability(static_cast<StructOp>(r), static_cast<StructOp>(c))) {
        out << format_number(*p);
      }
    }
    out << ',' << row_steps[r] << '\n';
  }
  return out.str();
}

CooccurrenceMatrix cooccurrence_matrix(const std::vector<StructuralOpSet>& steps) {
  CooccurrenceMatrix m;
  for (const StructuralOpSet& s : steps) {
    if (s.distinct_structural() < 2) continue;
    ++m.multi_label_steps;
    for (std::size_t r = 0; r < kStructuralOpCount; ++r) {
      if (s.counts[r] == 0) continue;
      ++m.row_steps[r];
      for (std::size_t c = 0; c < kStructuralOpCount; ++c) {
        if (s.counts[c] > 0) ++m.joint[r][c];
      }
    }
  }
  return m;
}

}  // namespace pgir
