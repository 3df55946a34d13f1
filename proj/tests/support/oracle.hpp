// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PGIR_TESTS_ORACLE_HPP
#define PGIR_TESTS_ORACLE_HPP

#include <algorithm>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pgir/cost.hpp"
#include "pgir/graph.hpp"
#include "support/random_trees.hpp"

namespace pgir::testing {

// Exhaustive minimum over injective, ancestry-consistent node mappings: the
// nearest matched ancestor of every matched node maps above its image.
// Leaves pair with leaves that pass the fuzzy gates; operators pair with
// operators of the same label. Nothing here calls the aligner.

inline double plain_similarity(const std::string& x, const std::string& y) {
  std::vector<std::size_t> prev(y.size() + 1), cur(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x[i - 1] == y[j - 1] ? 0u : 1u)});
    }
    std::swap(prev, cur);
  }
  std::size_t n = std::max(x.size(), y.size());
  return n == 0 ? 1.0 : 1.0 - static_cast<double>(prev[y.size()]) / static_cast<double>(n);
}

inline bool same_class(Comparator x, Comparator y) {
  auto cls = [](Comparator c) {
    switch (c) {
      case Comparator::Eq:
      case Comparator::Neq:
        return 0;
      case Comparator::Lt:
      case Comparator::Le:
      case Comparator::Gt:
      case Comparator::Ge:
        return 1;
      case Comparator::In:
      case Comparator::NotIn:
        return 2;
      case Comparator::Contains:
        return 3;
      case Comparator::Regex:
        return 4;
    }
    return -1;
  };
  return cls(x) == cls(y);
}

class BruteForce {
 public:
  BruteForce(const PredicateGraph& a, const PredicateGraph& b, CostWeights w = {}, double floor = 0.7,
             bool relabel = false)
      : a_(a), b_(b), w_(w), floor_(floor), relabel_(relabel), map_(a.size(), kNoNode), used_(b.size(), false) {}

  double minimum() {
    best_ = std::numeric_limits<double>::infinity();
    search(0, 0.0);
    return best_;
  }

 private:
  bool anc(const PredicateGraph& g, NodeId x, NodeId y) const {
    for (NodeId p = g.node(y).parent; p != kNoNode; p = g.node(p).parent) {
      if (p == x) return true;
    }
    return false;
  }

  bool admissible(NodeId i, NodeId j) const {
    const Node& x = a_.node(i);
    const Node& y = b_.node(j);
    if (x.leaf != y.leaf) return false;
    if (!x.leaf) return relabel_ || x.label == y.label;
    if (x.polarity != y.polarity || x.predicate.value.kind != y.predicate.value.kind) return false;
    if (!same_class(x.predicate.comparator, y.predicate.comparator)) return false;
    if (x.predicate.value.is_list()) return x.predicate.value == y.predicate.value;
    return plain_similarity(x.predicate.value.text, y.predicate.value.text) >= floor_;
  }

  double pair_cost(NodeId i, NodeId j) const {
    const Node& x = a_.node(i);
    const Node& y = b_.node(j);
    if (!x.leaf) return x.label == y.label ? 0.0 : w_.bool_relabel;
    double c = 0.0;
    if (x.predicate.field != y.predicate.field) c += w_.field_update;
    if (x.predicate.comparator != y.predicate.comparator || x.polarity != y.polarity) c += w_.operator_update;
    if (!(x.predicate.value == y.predicate.value)) c += w_.value_update;
    return std::min(c, w_.update_cap);
  }

  // ancestors precede i in preorder, so its nearest matched ancestor is known
  bool consistent(NodeId i, NodeId j) const {
    for (NodeId p = a_.node(i).parent; p != kNoNode; p = a_.node(p).parent) {
      NodeId m = map_[static_cast<std::size_t>(p)];
      if (m != kNoNode) return anc(b_, m, j);
    }
    return true;
  }

  void search(NodeId i, double cost) {
    if (cost >= best_) return;
    if (i == static_cast<NodeId>(a_.size())) {
      double total = cost;
      for (NodeId j = 0; j < static_cast<NodeId>(b_.size()); ++j) {
        if (!used_[static_cast<std::size_t>(j)]) total += b_.node(j).leaf ? w_.pred_insert : w_.bool_insert;
      }
      best_ = std::min(best_, total);
      return;
    }
    for (NodeId j = 0; j < static_cast<NodeId>(b_.size()); ++j) {
      if (used_[static_cast<std::size_t>(j)] || !admissible(i, j) || !consistent(i, j)) continue;
      used_[static_cast<std::size_t>(j)] = true;
      map_[static_cast<std::size_t>(i)] = j;
      search(i + 1, cost + pair_cost(i, j));
      map_[static_cast<std::size_t>(i)] = kNoNode;
      used_[static_cast<std::size_t>(j)] = false;
    }
    search(i + 1, cost + (a_.node(i).leaf ? w_.pred_delete : w_.bool_delete));
  }

  const PredicateGraph& a_;
  const PredicateGraph& b_;
  CostWeights w_;
  double floor_;
  bool relabel_;  // operators may pair across labels at the relabel weight
  std::vector<NodeId> map_;
  std::vector<bool> used_;
  double best_ = 0.0;
};

inline double brute_force_distance(const PredicateGraph& a, const PredicateGraph& b, const CostWeights& w = {},
                                   bool relabel = false) {
  return BruteForce(a, b, w, 0.7, relabel).minimum();
}

// Pair generator: A has unique fields and random ten-letter values; B is A
// after one to three local edits (retune, comparator swap, rename, delete,
// insert, wrap). Fresh values are random, so unrelated leaves stay far apart.

inline std::string random_word(std::mt19937& rng, std::size_t len = 10) {
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s.push_back(static_cast<char>('a' + pick(rng, 26)));
  return s;
}

inline RawExpr fresh_leaf(std::mt19937& rng, int& next_field) {
  AtomicPredicate p{"f" + std::to_string(next_field++), pick(rng, 3) == 0 ? Comparator::Neq : Comparator::Eq,
                    ValuePayload::scalar(ValueKind::String, random_word(rng))};
  return RawExpr::leaf(std::move(p));
}

inline RawExpr random_tree(std::mt19937& rng, int leaves, RawExpr::Kind label, int& next_field) {
  if (leaves == 1) return fresh_leaf(rng, next_field);
  RawExpr::Kind other = label == RawExpr::Kind::And ? RawExpr::Kind::Or : RawExpr::Kind::And;
  int parts = 2 + static_cast<int>(pick(rng, static_cast<std::size_t>(std::min(leaves, 3) - 1)));
  std::vector<int> share(static_cast<std::size_t>(parts), 1);
  for (int k = parts; k < leaves; ++k) share[pick(rng, share.size())] += 1;
  std::vector<RawExpr> kids;
  for (int s : share) kids.push_back(random_tree(rng, s, other, next_field));
  return RawExpr::op(label, std::move(kids));
}

inline void collect(RawExpr& e, std::vector<RawExpr*>& leaves, std::vector<RawExpr*>& ops) {
  (e.is_leaf() ? leaves : ops).push_back(&e);
  for (auto& c : e.children) collect(c, leaves, ops);
}

inline std::pair<RawExpr, RawExpr> random_edit_pair(std::mt19937& rng, int max_leaves = 6) {
  int next_field = 0;
  int n = 1 + static_cast<int>(pick(rng, static_cast<std::size_t>(max_leaves)));
  RawExpr a = random_tree(rng, n, pick(rng, 2) ? RawExpr::Kind::And : RawExpr::Kind::Or, next_field);
  RawExpr b = a;
  int edits = 1 + static_cast<int>(pick(rng, 3));
  for (int e = 0; e < edits; ++e) {
    std::vector<RawExpr*> leaves, ops;
    collect(b, leaves, ops);
    switch (pick(rng, 6)) {
      case 0: {  // retune one character
        std::string& v = leaves[pick(rng, leaves.size())]->predicate.value.text;
        v[pick(rng, v.size())] = static_cast<char>('A' + pick(rng, 26));
        break;
      }
      case 1: {
        Comparator& c = leaves[pick(rng, leaves.size())]->predicate.comparator;
        c = c == Comparator::Eq ? Comparator::Neq : Comparator::Eq;
        break;
      }
      case 2:
        leaves[pick(rng, leaves.size())]->predicate.field = "g" + std::to_string(next_field++);
        break;
      case 3: {  // delete, never collapsing a scope
        std::vector<RawExpr*> roomy;
        for (RawExpr* o : ops) {
          for (const auto& c : o->children) {
            if (o->children.size() >= 3 && c.is_leaf()) {
              roomy.push_back(o);
              break;
            }
          }
        }
        if (roomy.empty()) break;
        RawExpr* o = roomy[pick(rng, roomy.size())];
        std::vector<std::size_t> idx;
        for (std::size_t k = 0; k < o->children.size(); ++k) {
          if (o->children[k].is_leaf()) idx.push_back(k);
        }
        o->children.erase(o->children.begin() + static_cast<long>(idx[pick(rng, idx.size())]));
        break;
      }
      case 4: {
        if (static_cast<int>(leaves.size()) >= max_leaves) break;
        if (ops.empty()) {
          b = RawExpr::op(RawExpr::Kind::And, {b, fresh_leaf(rng, next_field)});
        } else {
          ops[pick(rng, ops.size())]->children.push_back(fresh_leaf(rng, next_field));
        }
        break;
      }
      case 5: {  // group two operands under a new opposite-label scope
        std::vector<RawExpr*> wide;
        for (RawExpr* o : ops) {
          if (o->children.size() >= 3) wide.push_back(o);
        }
        if (wide.empty()) break;
        RawExpr* o = wide[pick(rng, wide.size())];
        std::shuffle(o->children.begin(), o->children.end(), rng);
        RawExpr::Kind other = o->kind == RawExpr::Kind::And ? RawExpr::Kind::Or : RawExpr::Kind::And;
        std::vector<RawExpr> grouped(o->children.end() - 2, o->children.end());
        o->children.erase(o->children.end() - 2, o->children.end());
        o->children.push_back(RawExpr::op(other, std::move(grouped)));
        break;
      }
    }
  }
  return {a, b};
}

// Two independently shaped trees over one pool of distinct leaves; some
// leaves are shared, the rest belong to one side only.
inline RawExpr random_shape(std::mt19937& rng, std::vector<RawExpr> leaves) {
  while (leaves.size() > 1) {
    std::size_t k = 2 + pick(rng, std::min<std::size_t>(2, leaves.size() - 1));
    std::shuffle(leaves.begin(), leaves.end(), rng);
    std::vector<RawExpr> kids(leaves.end() - static_cast<long>(k), leaves.end());
    leaves.resize(leaves.size() - k);
    leaves.push_back(RawExpr::op(pick(rng, 2) ? RawExpr::Kind::And : RawExpr::Kind::Or, std::move(kids)));
  }
  return leaves[0];
}

inline std::pair<RawExpr, RawExpr> random_unrelated_pair(std::mt19937& rng, int max_leaves = 6) {
  int next_field = 0;
  std::vector<RawExpr> pool;
  for (int i = 0; i < 2 * max_leaves; ++i) pool.push_back(fresh_leaf(rng, next_field));
  std::size_t na = 1 + pick(rng, static_cast<std::size_t>(max_leaves));
  std::size_t nb = 1 + pick(rng, static_cast<std::size_t>(max_leaves));
  std::size_t shared = pick(rng, std::min(na, nb) + 1);
  std::vector<RawExpr> la(pool.begin(), pool.begin() + static_cast<long>(na));
  std::vector<RawExpr> lb(pool.begin(), pool.begin() + static_cast<long>(shared));
  for (std::size_t i = 0; i < nb - shared; ++i) lb.push_back(pool[na + i]);
  return {random_shape(rng, std::move(la)), random_shape(rng, std::move(lb))};
}

}  // namespace pgir::testing

#endif  // PGIR_TESTS_ORACLE_HPP
