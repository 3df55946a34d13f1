// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#include "pgir/align.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

#include "pgir/util.hpp"

namespace pgir {

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::P1:
      return "P1";
    case Phase::P2:
      return "P2";
    case Phase::P3:
      return "P3";
    case Phase::P4:
      return "P4";
    case Phase::P2b:
      return "P2b";
  }
  return "?";
}

void AlignParams::validate() const {
  auto fraction = [](double v, const char* name) {
    if (!(v > 0.0 && v <= 1.0)) {
      throw InputError(std::string(name) + " must be in (0, 1]");
    }
  };
  fraction(theta_sup, "theta_sup");
  fraction(theta_cov, "theta_cov");
  fraction(fuzzy_floor, "fuzzy_floor");
  if (min_anchors < 1) throw InputError("min_anchors must be >= 1");
  if (candidate_cap < 1) throw InputError("candidate_cap must be >= 1");
}

std::string graph_fingerprint(const PredicateGraph& g) {
  return g.empty() ? sha256_hex("") : sha256_hex(g.subtree_key(g.root()));
}

Alignment::Alignment(const PredicateGraph& a, const PredicateGraph& b)
    : a_to_b_(a.size(), kNoNode),
      b_to_a_(b.size(), kNoNode),
      phase_(a.size()),
      fp_a_(graph_fingerprint(a)),
      fp_b_(graph_fingerprint(b)) {}

std::optional<Phase> Alignment::phase(NodeId a) const { return phase_[static_cast<std::size_t>(a)]; }

void Alignment::add(NodeId a, NodeId b, Phase phase) {
  a_to_b_[static_cast<std::size_t>(a)] = b;
  b_to_a_[static_cast<std::size_t>(b)] = a;
  phase_[static_cast<std::size_t>(a)] = phase;
}

std::vector<MatchPair> Alignment::pairs() const {
  std::vector<MatchPair> out;
  for (std::size_t i = 0; i < a_to_b_.size(); ++i) {
    if (a_to_b_[i] != kNoNode) out.push_back({static_cast<NodeId>(i), a_to_b_[i], *phase_[i]});
  }
  return out;
}

std::vector<NodeId> Alignment::unmatched_a() const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < a_to_b_.size(); ++i) {
    if (a_to_b_[i] == kNoNode) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

std::vector<NodeId> Alignment::unmatched_b() const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < b_to_a_.size(); ++i) {
    if (b_to_a_[i] == kNoNode) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

NodeId nearest_matched_ancestor_a(const PredicateGraph& a, const Alignment& aln, NodeId id) {
  for (NodeId p = a.node(id).parent; p != kNoNode; p = a.node(p).parent) {
    if (aln.matched_a(p)) return p;
  }
  return kNoNode;
}

NodeId nearest_matched_ancestor_b(const PredicateGraph& b, const Alignment& aln, NodeId id) {
  for (NodeId p = b.node(id).parent; p != kNoNode; p = b.node(p).parent) {
    if (aln.matched_b(p)) return p;
  }
  return kNoNode;
}

bool ancestry_consistent(const PredicateGraph& a, const PredicateGraph& b, const Alignment& aln,
                         NodeId i, NodeId j) {
  NodeId anc = nearest_matched_ancestor_a(a, aln, i);
  if (anc != kNoNode && !b.is_ancestor(aln.image(anc), j)) return false;
  // matched descendants that would now hang below i must land below j
  const NodeId end = i + a.node(i).size;
  for (NodeId d = i + 1; d < end;) {
    if (aln.matched_a(d)) {
      if (!b.is_ancestor(j, aln.image(d))) return false;
      d += a.node(d).size;
    } else {
      ++d;
    }
  }
  return true;
}

std::string verify_alignment(const PredicateGraph& a, const PredicateGraph& b,
                             const Alignment& aln) {
  if (aln.size_a() != a.size() || aln.size_b() != b.size()) return "size mismatch";
  std::set<NodeId> seen_b;
  for (const MatchPair& p : aln.pairs()) {
    if (!seen_b.insert(p.b).second) return "node used twice in B";
    if (aln.preimage(p.b) != p.a) return "inverse map out of sync";
    const Node& na = a.node(p.a);
    const Node& nb = b.node(p.b);
    if (na.leaf != nb.leaf) return "leaf matched to operator";
    if (!na.leaf && na.label != nb.label) return "operator labels differ";
    NodeId anc = nearest_matched_ancestor_a(a, aln, p.a);
    if (anc != kNoNode && !b.is_ancestor(aln.image(anc), p.b)) {
      return "pair (" + std::to_string(p.a) + "," + std::to_string(p.b) +
             ") is not ancestry-consistent";
    }
  }
  return {};
}

double value_similarity(const ValuePayload& x, const ValuePayload& y) {
  if (x.is_list() && y.is_list()) {
    std::set<std::pair<ValueKind, std::string>> sx, sy;
    for (const auto& m : x.members) sx.emplace(m.kind, collapse_whitespace(m.text));
    for (const auto& m : y.members) sy.emplace(m.kind, collapse_whitespace(m.text));
    std::size_t inter = 0;
    for (const auto& m : sx) inter += sy.count(m);
    std::size_t uni = sx.size() + sy.size() - inter;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  }
  if (x.is_list() || y.is_list()) return 0.0;
  return edit_similarity(value_normalize(x), value_normalize(y));
}

namespace {

enum class Evidence { Exact, All };

class Aligner {
 public:
  Aligner(const PredicateGraph& a, const PredicateGraph& b, const AlignParams& params)
      : a_(a), b_(b), params_(params), aln_(a, b), anchor_b_(b.size(), false) {}

  Alignment run() {
    if (a_.empty() || b_.empty()) return aln_;
    phase1();
    match_operators(Evidence::Exact, Phase::P2);
    phase3();
    phase4();
    match_operators(Evidence::All, Phase::P2b);
    return aln_;
  }

 private:
  bool try_add(NodeId i, NodeId j, Phase phase) {
    if (aln_.matched_a(i) || aln_.matched_b(j)) return false;
    if (!ancestry_consistent(a_, b_, aln_, i, j)) return false;
    aln_.add(i, j, phase);
    return true;
  }

  void phase1() {
    std::map<std::string, std::vector<NodeId>> ka, kb;
    for (NodeId l : a_.leaves()) ka[exact_key(a_.node(l))].push_back(l);
    for (NodeId l : b_.leaves()) kb[exact_key(b_.node(l))].push_back(l);
    std::vector<std::pair<NodeId, NodeId>> anchors;
    for (const auto& [key, ids] : ka) {
      auto it = kb.find(key);
      if (ids.size() == 1 && it != kb.end() && it->second.size() == 1) {
        anchors.emplace_back(ids.front(), it->second.front());
      }
    }
    std::sort(anchors.begin(), anchors.end());
    for (auto [i, j] : anchors) {
      if (try_add(i, j, Phase::P1)) anchor_b_[static_cast<std::size_t>(j)] = true;
    }
  }

  bool is_evidence_a(NodeId leaf, Evidence mode) const {
    if (!aln_.matched_a(leaf)) return false;
    return mode == Evidence::All || aln_.phase(leaf) == Phase::P1;
  }

  bool is_evidence_b(NodeId leaf, Evidence mode) const {
    if (!aln_.matched_b(leaf)) return false;
    return mode == Evidence::All || anchor_b_[static_cast<std::size_t>(leaf)];
  }

  void match_operators(Evidence mode, Phase tag) {
    std::vector<NodeId> ops_a = a_.operators();
    std::stable_sort(ops_a.begin(), ops_a.end(), [&](NodeId x, NodeId y) {
      return a_.node(x).height < a_.node(y).height;
    });
    std::vector<NodeId> ops_b = b_.operators();
    std::unordered_map<NodeId, std::string> key_cache;
    auto key_of = [&](NodeId id) -> const std::string& {
      auto it = key_cache.find(id);
      if (it == key_cache.end()) it = key_cache.emplace(id, b_.subtree_key(id)).first;
      return it->second;
    };

    for (NodeId oa : ops_a) {
      if (aln_.matched_a(oa)) continue;
      std::vector<NodeId> ea;
      for (NodeId l : a_.leaves_under(oa)) {
        if (is_evidence_a(l, mode)) ea.push_back(l);
      }
      if (static_cast<int>(ea.size()) < params_.min_anchors) continue;

      NodeId best = kNoNode;
      double best_support = -1;
      int best_dh = 0;
      for (NodeId ob : ops_b) {
        const Node& nb = b_.node(ob);
        if (nb.label != a_.node(oa).label || aln_.matched_b(ob)) continue;
        if (!ancestry_consistent(a_, b_, aln_, oa, ob)) continue;
        std::size_t eb = 0;
        for (NodeId l : b_.leaves_under(ob)) {
          if (is_evidence_b(l, mode)) ++eb;
        }
        if (static_cast<int>(eb) < params_.min_anchors) continue;
        std::size_t overlap = 0;
        for (NodeId p : ea) {
          if (b_.is_ancestor(ob, aln_.image(p))) ++overlap;
        }
        double ov = static_cast<double>(overlap);
        double support = ov / static_cast<double>(std::min(ea.size(), eb));
        double cov_a = ov / static_cast<double>(ea.size());
        double cov_b = ov / static_cast<double>(eb);
        if (support < params_.theta_sup || cov_a < params_.theta_cov ||
            cov_b < params_.theta_cov) {
          continue;
        }
        int dh = std::abs(a_.node(oa).height - nb.height);
        bool better = false;
        if (best == kNoNode || support > best_support) {
          better = true;
        } else if (support == best_support) {
          if (dh != best_dh) {
            better = dh < best_dh;
          } else {
            const std::string& kc = key_of(ob);
            const std::string& kbest = key_of(best);
            better = kc < kbest || (kc == kbest && ob < best);
          }
        }
        if (better) {
          best = ob;
          best_support = support;
          best_dh = dh;
        }
      }
      if (best != kNoNode) aln_.add(oa, best, tag);
    }
  }

  void phase3() {
    std::vector<NodeId> ops_a;
    for (NodeId o : a_.operators()) {
      if (aln_.matched_a(o)) ops_a.push_back(o);
    }
    std::stable_sort(ops_a.begin(), ops_a.end(), [&](NodeId x, NodeId y) {
      return a_.node(x).height < a_.node(y).height;
    });
    for (NodeId oa : ops_a) {
      NodeId ob = aln_.image(oa);
      std::map<std::string, std::vector<NodeId>> ka, kb;
      for (NodeId l : a_.leaves_under(oa)) {
        if (!aln_.matched_a(l)) ka[exact_key(a_.node(l))].push_back(l);
      }
      for (NodeId l : b_.leaves_under(ob)) {
        if (!aln_.matched_b(l)) kb[exact_key(b_.node(l))].push_back(l);
      }
      for (const auto& [key, ids] : ka) {
        auto it = kb.find(key);
        if (it == kb.end() || it->second.size() != ids.size()) continue;
        for (std::size_t t = 0; t < ids.size(); ++t) {
          try_add(ids[t], it->second[t], Phase::P3);
        }
      }
    }
  }

  struct Candidate {
    NodeId id;
    double sim;
  };

  std::optional<NodeId> best_match(NodeId p, const std::vector<Candidate>& cands) const {
    NodeId anc = nearest_matched_ancestor_a(a_, aln_, p);
    NodeId anc_image = anc == kNoNode ? kNoNode : aln_.image(anc);
    const Node& np = a_.node(p);
    std::optional<NodeId> best;
    double best_score = -1;
    double best_sim = -1;
    for (const Candidate& c : cands) {
      if (c.sim < params_.fuzzy_floor) continue;
      const Node& nq = b_.node(c.id);
      double scope = nearest_matched_ancestor_b(b_, aln_, c.id) == anc_image ? 1.0 : 0.0;
      double cmp_eq = np.predicate.comparator == nq.predicate.comparator ? 1.0 : 0.0;
      double score = 0.6 * c.sim + 0.3 * scope + 0.1 * cmp_eq;
      if (!best || score > best_score || (score == best_score && c.sim > best_sim)) {
        best = c.id;
        best_score = score;
        best_sim = c.sim;
      }
    }
    return best;
  }

  void phase4() {
    std::vector<NodeId> leaves_b = b_.leaves();
    for (NodeId p : a_.leaves()) {
      if (aln_.matched_a(p)) continue;
      const Node& np = a_.node(p);
      std::vector<Candidate> cands;
      for (NodeId q : leaves_b) {
        if (aln_.matched_b(q)) continue;
        const Node& nq = b_.node(q);
        if (nq.polarity != np.polarity) continue;
        if (nq.predicate.value.kind != np.predicate.value.kind) continue;
        if (comparator_class(nq.predicate.comparator) !=
            comparator_class(np.predicate.comparator)) {
          continue;
        }
        if (!ancestry_consistent(a_, b_, aln_, p, q)) continue;
        cands.push_back({q, value_similarity(np.predicate.value, nq.predicate.value)});
      }
      std::stable_sort(cands.begin(), cands.end(),
                       [](const Candidate& x, const Candidate& y) { return x.sim > y.sim; });
      if (cands.size() > static_cast<std::size_t>(params_.candidate_cap)) {
        cands.resize(static_cast<std::size_t>(params_.candidate_cap));
      }
      std::vector<Candidate> same, cross;
      for (const Candidate& c : cands) {
        (b_.node(c.id).predicate.field == np.predicate.field ? same : cross).push_back(c);
      }
      std::optional<NodeId> q = best_match(p, same);
      if (!q) q = best_match(p, cross);
      if (q) aln_.add(p, *q, Phase::P4);
    }
  }

  const PredicateGraph& a_;
  const PredicateGraph& b_;
  AlignParams params_;
  Alignment aln_;
  std::vector<bool> anchor_b_;
};

}  // namespace

Alignment align(const PredicateGraph& a, const PredicateGraph& b, const AlignParams& params) {
  params.validate();
  return Aligner(a, b, params).run();
}

}  // namespace pgir
