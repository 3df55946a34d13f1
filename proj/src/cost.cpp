// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#include "pgir/cost.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "pgir/structops.hpp"
#include "pgir/util.hpp"

namespace pgir {

namespace {

struct WeightField {
  std::string_view name;
  double CostWeights::*member;
};

constexpr std::array<WeightField, 9> kWeightFields{{
    {"pred_insert", &CostWeights::pred_insert},
    {"pred_delete", &CostWeights::pred_delete},
    {"field_update", &CostWeights::field_update},
    {"operator_update", &CostWeights::operator_update},
    {"value_update", &CostWeights::value_update},
    {"bool_insert", &CostWeights::bool_insert},
    {"bool_delete", &CostWeights::bool_delete},
    {"bool_relabel", &CostWeights::bool_relabel},
    {"update_cap", &CostWeights::update_cap},
}};

}  // namespace

void CostWeights::validate() const {
  for (const auto& f : kWeightFields) {
    if (!(this->*f.member > 0.0)) throw InputError("weight " + std::string(f.name) + " must be > 0");
  }
  if (update_cap < field_update || update_cap < operator_update || update_cap < value_update) {
    throw InputError("update_cap must be at least every single update weight");
  }
}

CostWeights CostWeights::scaled(double factor) const {
  CostWeights w = *this;
  for (const auto& f : kWeightFields) w.*f.member *= factor;
  return w;
}

void CostWeights::apply_overrides(std::string_view spec) {
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    std::size_t end = spec.find_first_of(",\n", pos);
    if (end == std::string_view::npos) end = spec.size();
    std::string_view item = trim(spec.substr(pos, end - pos));
    pos = end + 1;
    if (item.empty() || item.front() == '#') continue;
    std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) throw InputError("weight override needs key=value: " + std::string(item));
    std::string key(trim(item.substr(0, eq)));
    auto value = parse_number(trim(item.substr(eq + 1)));
    if (!value) throw InputError("weight '" + key + "' is not a number");
    auto it = std::find_if(kWeightFields.begin(), kWeightFields.end(),
                           [&](const WeightField& f) { return f.name == key; });
    if (it == kWeightFields.end()) throw InputError("unknown weight '" + key + "'");
    this->*(it->member) = *value;
  }
  validate();
}

std::string_view to_string(EditKind k) {
  switch (k) {
    case EditKind::PredInsert:
      return "PredInsert";
    case EditKind::PredDelete:
      return "PredDelete";
    case EditKind::PredUpdate:
      return "PredUpdate";
    case EditKind::OpInsert:
      return "OpInsert";
    case EditKind::OpDelete:
      return "OpDelete";
    case EditKind::OpRelabel:
      return "OpRelabel";
  }
  return "?";
}

EditScript edit_script(const Alignment& aln, const PredicateGraph& a, const PredicateGraph& b,
                       const CostWeights& weights, const std::vector<FlipPair>& flips) {
  if (aln.size_a() != a.size() || aln.size_b() != b.size() ||
      aln.fingerprint_a() != graph_fingerprint(a) || aln.fingerprint_b() != graph_fingerprint(b)) {
    throw FatalError("alignment was not computed over these graphs");
  }
  std::map<NodeId, NodeId> relabel_a, relabel_b;
  for (const FlipPair& f : flips) {
    if (aln.matched_a(f.a) || aln.matched_b(f.b) || a.node(f.a).leaf || b.node(f.b).leaf) {
      throw FatalError("flip pair must join two unmatched operators");
    }
    relabel_a[f.a] = f.b;
    relabel_b[f.b] = f.a;
  }

  EditScript s;
  auto push = [&s](Edit e) {
    auto k = static_cast<std::size_t>(e.kind);
    s.breakdown.count[k] += 1;
    s.breakdown.cost[k] += e.cost;
    s.total += e.cost;
    s.edits.push_back(e);
  };

  for (NodeId i = 0; i < static_cast<NodeId>(a.size()); ++i) {
    const Node& na = a.node(i);
    if (!aln.matched_a(i)) {
      if (na.leaf) {
        push({EditKind::PredDelete, i, kNoNode, false, false, false, false, weights.pred_delete});
      } else if (auto it = relabel_a.find(i); it != relabel_a.end()) {
        push({EditKind::OpRelabel, i, it->second, false, false, false, false, weights.bool_relabel});
      } else {
        push({EditKind::OpDelete, i, kNoNode, false, false, false, false, weights.bool_delete});
      }
      continue;
    }
    if (!na.leaf) continue;
    NodeId j = aln.image(i);
    const Node& nb = b.node(j);
    Edit e{EditKind::PredUpdate, i, j};
    e.field_changed = na.predicate.field != nb.predicate.field;
    e.comparator_changed = na.predicate.comparator != nb.predicate.comparator;
    e.value_changed = !(na.predicate.value == nb.predicate.value);
    e.polarity_changed = na.polarity != nb.polarity;
    if (!e.field_changed && !e.comparator_changed && !e.value_changed && !e.polarity_changed) {
      continue;
    }
    double c = 0.0;
    if (e.field_changed) c += weights.field_update;
    if (e.comparator_changed || e.polarity_changed) c += weights.operator_update;
    if (e.value_changed) c += weights.value_update;
    e.cost = std::min(c, weights.update_cap);
    s.breakdown.field_updates += e.field_changed;
    s.breakdown.operator_updates += (e.comparator_changed || e.polarity_changed);
    s.breakdown.value_updates += e.value_changed;
    push(e);
  }
  for (NodeId j = 0; j < static_cast<NodeId>(b.size()); ++j) {
    if (aln.matched_b(j) || relabel_b.count(j)) continue;
    if (b.node(j).leaf) {
      push({EditKind::PredInsert, kNoNode, j, false, false, false, false, weights.pred_insert});
    } else {
      push({EditKind::OpInsert, kNoNode, j, false, false, false, false, weights.bool_insert});
    }
  }
  return s;
}

DistanceResult predicate_distance(const PredicateGraph& a, const PredicateGraph& b,
                                  const AlignParams& params, const CostWeights& weights,
                                  double theta_flip) {
  weights.validate();
  DistanceResult r;
  r.alignment = align(a, b, params);
  r.flips = detect_flip(r.alignment, a, b, theta_flip);
  r.script = edit_script(r.alignment, a, b, weights, r.flips);
  r.d_pred = r.script.total;
  return r;
}

RawExpr replay_script(const Alignment& aln, const PredicateGraph& a, const PredicateGraph& b,
                      const EditScript& script) {
  std::map<NodeId, const Edit*> by_b;
  std::vector<bool> a_removed(a.size(), false);
  for (const Edit& e : script.edits) {
    if (e.b != kNoNode) by_b[e.b] = &e;
    if (e.kind == EditKind::PredDelete || e.kind == EditKind::OpDelete ||
        e.kind == EditKind::OpRelabel) {
      a_removed[static_cast<std::size_t>(e.a)] = true;
    }
  }
  for (NodeId i = 0; i < static_cast<NodeId>(a.size()); ++i) {
    if (!aln.matched_a(i) && !a_removed[static_cast<std::size_t>(i)]) {
      throw FatalError("script leaves unmatched node " + std::to_string(i) + " of A in place");
    }
  }
  auto build = [&](auto&& self, NodeId j) -> RawExpr {
    const Node& nb = b.node(j);
    auto it = by_b.find(j);
    const Edit* e = it == by_b.end() ? nullptr : it->second;
    RawExpr out;
    if (aln.matched_b(j)) {
      const Node& na = a.node(aln.preimage(j));
      if (na.leaf) {
        AtomicPredicate p = na.predicate;
        Polarity pol = na.polarity;
        if (e && e->kind == EditKind::PredUpdate) {
          if (e->field_changed) p.field = nb.predicate.field;
          if (e->comparator_changed) p.comparator = nb.predicate.comparator;
          if (e->value_changed) p.value = nb.predicate.value;
          if (e->polarity_changed) pol = nb.polarity;
        }
        return RawExpr::leaf(std::move(p), pol);
      }
      out.kind = na.label == OpLabel::And ? RawExpr::Kind::And : RawExpr::Kind::Or;
    } else {
      if (!e) throw FatalError("script has no insert for node " + std::to_string(j) + " of B");
      if (nb.leaf) {
        if (e->kind != EditKind::PredInsert) throw FatalError("leaf insert expected");
        return RawExpr::leaf(nb.predicate, nb.polarity);
      }
      if (e->kind != EditKind::OpInsert && e->kind != EditKind::OpRelabel) {
        throw FatalError("operator insert expected");
      }
      out.kind = nb.label == OpLabel::And ? RawExpr::Kind::And : RawExpr::Kind::Or;
    }
    for (NodeId c : nb.children) out.children.push_back(self(self, c));
    return out;
  };
  if (b.empty()) return {};
  return build(build, b.root());
}

}  // namespace pgir
