// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include "doctest.h"
#include "pgir/cost.hpp"
#include "pgir/text_format.hpp"
#include "support/fixtures.hpp"
#include "support/oracle.hpp"
#include "support/random_trees.hpp"

using namespace pgir;

namespace {

PredicateGraph g(std::string_view spl_text) { return testing::graph_from_spl(spl_text); }

double d(std::string_view x, std::string_view y) { return predicate_distance(g(x), g(y)).d_pred; }

}  // namespace

TEST_CASE("single edits cost their weight") {
  CHECK(d("a=1 b=2", "a=1 b=2 c=3") == 1.0);
  CHECK(d("a=1 b=2 c=3", "a=1 b=2") == 1.0);
  CHECK(d("k=1 v=\"threshold-10\"", "k=1 v=\"threshold-15\"") == doctest::Approx(0.8));
  CHECK(d("k=1 v=\"abcdefgh\"", "k=1 v!=\"abcdefgh\"") == doctest::Approx(0.5));
  CHECK(d("k=1 v=\"abcdefgh\"", "k=1 w=\"abcdefgh\"") == doctest::Approx(0.2));
  CHECK(d("a=1 OR b=2 OR c=3", "a=1 OR (b=2 c=3)") == doctest::Approx(3.0));
  CHECK(d("a=1 OR (b=2 c=3)", "a=1 OR b=2 OR c=3") == doctest::Approx(3.0));
  CHECK(d("a=1 (b=2 OR c=3)", "a=1 (b=2 OR c=3)") == 0.0);
}

TEST_CASE("polarity change is an operator update") {
  CHECK(d("k=1 v=\"abcdefgh\"", "k=1 NOT v=\"abcdefgh\"") == 2.0);  // gated out of fuzzy matching
}

TEST_CASE("reference pair script") {
  PredicateGraph a = testing::load_graph("ref_pair/v31.spl");
  PredicateGraph b = testing::load_graph("ref_pair/v33.spl");
  DistanceResult r = predicate_distance(a, b);
  CHECK(r.d_pred == doctest::Approx(5.6));
  const Breakdown& bd = r.script.breakdown;
  CHECK(bd.count[static_cast<std::size_t>(EditKind::OpInsert)] == 1);
  CHECK(bd.count[static_cast<std::size_t>(EditKind::PredInsert)] == 1);
  CHECK(bd.count[static_cast<std::size_t>(EditKind::PredUpdate)] == 2);
  CHECK(bd.value_updates == 2);
  CHECK(r.script.edits.size() == 4);
  CHECK(canonicalize(replay_script(r.alignment, a, b, r.script)) == b);
}

TEST_CASE("update cost is capped") {
  CostWeights w;
  w.apply_overrides("field_update=1.5,operator_update=1.5,value_update=1.5,update_cap=2.0");
  auto r = predicate_distance(g("k=1 v=\"abcdefgh\""), g("k=1 w!=\"abcdefgX\""), {}, w);
  CHECK(r.d_pred == doctest::Approx(2.0));
  CHECK_THROWS_AS(w.apply_overrides("bogus=1"), InputError);
  CHECK_THROWS_AS(w.apply_overrides("pred_insert=-1"), InputError);
}

TEST_CASE("edit script rejects a foreign alignment") {
  PredicateGraph a = g("a=1 b=2");
  PredicateGraph b = g("a=1 c=3");
  Alignment aln = align(a, b);
  CHECK_THROWS_AS(edit_script(aln, a, g("a=1 d=4")), FatalError);
}

TEST_CASE("replay reproduces B on random pairs") {
  std::mt19937 rng(31);
  for (int i = 0; i < 300; ++i) {
    PredicateGraph a = canonicalize(testing::random_raw_expr(rng, 8, true));
    PredicateGraph b = canonicalize(testing::random_raw_expr(rng, 8, true));
    DistanceResult r = predicate_distance(a, b);
    CHECK(r.d_pred >= 0.0);
    CHECK(canonicalize(replay_script(r.alignment, a, b, r.script)) == b);
    CHECK((r.d_pred == 0.0) == a.same_logic(b));
    double sum = 0;
    for (const Edit& e : r.script.edits) sum += e.cost;
    CHECK(sum == doctest::Approx(r.d_pred));
  }
}

TEST_CASE("scaling weights scales the distance") {
  std::mt19937 rng(41);
  CostWeights base;
  for (int i = 0; i < 100; ++i) {
    PredicateGraph a = canonicalize(testing::random_raw_expr(rng, 7, true));
    PredicateGraph b = canonicalize(testing::random_raw_expr(rng, 7, true));
    double d1 = predicate_distance(a, b, {}, base).d_pred;
    for (double lambda : {0.5, 2.0, 3.7}) {
      double dl = predicate_distance(a, b, {}, base.scaled(lambda)).d_pred;
      CHECK(dl == doctest::Approx(lambda * d1));
      CHECK((dl > 0) == (d1 > 0));
    }
  }
}

TEST_CASE("distance is symmetric on mirror alignments") {
  std::mt19937 rng(43);
  int mirrored = 0;
  for (int i = 0; i < 200; ++i) {
    auto [ea, eb] = testing::random_edit_pair(rng);
    PredicateGraph a = canonicalize(ea);
    PredicateGraph b = canonicalize(eb);
    DistanceResult ab = predicate_distance(a, b);
    DistanceResult ba = predicate_distance(b, a);
    bool mirror = ab.alignment.pairs().size() == ba.alignment.pairs().size();
    for (const auto& p : ab.alignment.pairs()) mirror = mirror && ba.alignment.image(p.b) == p.a;
    if (!mirror) continue;
    ++mirrored;
    CHECK(ab.d_pred == doctest::Approx(ba.d_pred));
  }
  CHECK(mirrored > 100);
}

TEST_CASE("distance equals the exhaustive minimum on edited pairs") {
  std::mt19937 rng(47);
  for (int i = 0; i < 200; ++i) {
    auto [ea, eb] = testing::random_edit_pair(rng);
    PredicateGraph a = canonicalize(ea);
    PredicateGraph b = canonicalize(eb);
    CHECK(predicate_distance(a, b).d_pred == doctest::Approx(testing::brute_force_distance(a, b)).epsilon(1e-12));
  }
  // hand-checked oracle values
  CHECK(testing::brute_force_distance(g("a=1 b=2"), g("a=1 b=2 c=3")) == 1.0);
  CHECK(testing::brute_force_distance(g("a=1 OR b=2 OR c=3"), g("a=1 OR (b=2 c=3)")) == 3.0);
}
