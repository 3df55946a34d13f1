// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include "doctest.h"
#include "pgir/graph.hpp"
#include "pgir/text_format.hpp"
#include "support/fixtures.hpp"
#include "support/random_trees.hpp"
#include "support/truth_table.hpp"

using namespace pgir;

namespace {

PredicateGraph g(std::string_view spl_text) { return testing::graph_from_spl(spl_text); }

int negation_parity_leaves(const RawExpr& e, bool negated) {
  if (e.is_leaf()) return (negated != (e.polarity == Polarity::Negative)) ? 1 : 0;
  bool n = e.kind == RawExpr::Kind::Not ? !negated : negated;
  int total = 0;
  for (const auto& c : e.children) total += negation_parity_leaves(c, n);
  return total;
}

}  // namespace

TEST_CASE("commutative operands give one graph") {
  CHECK(serialize_body(g("b=2 OR a=1")) == serialize_body(g("a=1 OR b=2")));
}

TEST_CASE("nested scopes flatten") {
  PredicateGraph x = g("a=1 (b=2 c=3)");
  CHECK(x.size() == 4);
  CHECK(x.node(0).children.size() == 3);
  CHECK(serialize_body(x) == serialize_body(g("a=1 b=2 c=3")));
}

TEST_CASE("De Morgan pushes NOT to leaf polarity") {
  PredicateGraph x = g("NOT (a=1 OR b=2)");
  REQUIRE(x.size() == 3);
  CHECK(x.node(0).label == OpLabel::And);
  CHECK(x.node(1).polarity == Polarity::Negative);
  CHECK(x.node(2).polarity == Polarity::Negative);
  CHECK(testing::truth_equivalent(x.to_expr(), *spl::extract_detection("NOT (a=1 OR b=2)").expr));

  PredicateGraph y = g("NOT (a=1 b=2)");
  CHECK(y.node(0).label == OpLabel::Or);
  CHECK(serialize_body(g("NOT NOT a=1")) == serialize_body(g("a=1")));
}

TEST_CASE("duplicates collapse") {
  CHECK(serialize_body(g("a=1 a=1")) == serialize_body(g("a=1")));
  CHECK(serialize_body(g("(a=1 OR b=2) (b=2 OR a=1)")) == serialize_body(g("a=1 OR b=2")));
}

TEST_CASE("field names fold case, values do not") {
  CHECK(serialize_body(g("Image=x")) == serialize_body(g("image=x")));
  CHECK(serialize_body(g("image=X")) != serialize_body(g("image=x")));
}

TEST_CASE("value normalization") {
  CHECK(value_normalize(ValuePayload::literal(" auditd ", true)) == "auditd");
  CHECK(value_normalize(ValuePayload::literal("a   b", true)) == "a b");
  CHECK(value_normalize(ValuePayload::literal("015", false)) == "15");
  CHECK(value_normalize(ValuePayload::literal("* -e*", true)) != value_normalize(ValuePayload::literal("*-e*", true)));
  auto l1 = ValuePayload::list({ValuePayload::literal("*su *", true), ValuePayload::literal("*sudo *", true)});
  auto l2 = ValuePayload::list({ValuePayload::literal("*sudo *", true), ValuePayload::literal("*su *", true)});
  CHECK(value_normalize(l1) == value_normalize(l2));
  CHECK(serialize_body(g("p IN (\"*su *\", \"*sudo *\")")) == serialize_body(g("p IN (\"*sudo *\",\"*su *\")")));
}

TEST_CASE("auditd rule serializes to the reference listing") {
  PredicateGraph x = testing::load_graph("auditd/linux_auditd_sudo_or_su_execution.spl");
  x.meta = {"detections/endpoint/linux_auditd_sudo_or_su_execution.yml", "SSC", "31",
            "11c909f725435e69e87cc7fde4558fb366432dc1"};
  std::string expected = read_file(testing::data_path("auditd/expected.pgir"));
  CHECK(serialize(x) == expected);
  CHECK(x.predicate_count() == 2);
  CHECK(parse_canonical(expected) == x);
}

TEST_CASE("single-leaf rule has no EXPR line") {
  PredicateGraph x = g("a=1");
  std::string body = serialize_body(x);
  CHECK(body.find("EXPR") == std::string::npos);
  CHECK(body.rfind("PRED(field=a,", 0) == 0);
  CHECK(parse_canonical(serialize(x)) == x);
}

TEST_CASE("negative leaves and odd fields survive the text form") {
  PredicateGraph x = g("NOT \"New Value\"=\"a \\\"b\\\"\" OR c IN (1, 2)");
  std::string text = serialize(x);
  CHECK(text.find("polarity=neg") != std::string::npos);
  CHECK(parse_canonical(text) == x);
}

TEST_CASE("malformed canonical text reports a line") {
  CHECK_THROWS_WITH_AS(parse_canonical("Rule: x\n\nPredicate graph:\nEXPR(op=XOR)\n  PRED(field=a,\n"),
                       doctest::Contains("line 4"), InputError);
  CHECK_THROWS_AS(parse_canonical("Rule: x\n"), InputError);
  // valid text that is not canonical (unsorted) is rejected
  CHECK_THROWS_AS(parse_canonical("Predicate graph:\nEXPR(op=OR)\n  PRED(field=b,\n       operator=EQ,\n"
                                  "       value=STRING(\"x\"))\n  PRED(field=a,\n       operator=EQ,\n"
                                  "       value=STRING(\"x\"))\n"),
                  InputError);
}

TEST_CASE("random graphs round-trip through text") {
  std::mt19937 rng(3);
  for (int i = 0; i < 100; ++i) {
    PredicateGraph x = canonicalize(testing::random_raw_expr(rng, 8, true));
    x.meta.rule = "r" + std::to_string(i);
    CHECK(parse_canonical(serialize(x)) == x);
  }
}

TEST_CASE("canonical form invariants") {
  std::mt19937 rng(5);
  for (int i = 0; i < 300; ++i) {
    RawExpr e = testing::random_raw_expr(rng, 9, true);
    PredicateGraph x = canonicalize(e);
    for (const Node& n : x.nodes()) {
      if (n.leaf) continue;
      CHECK(n.children.size() >= 2);
      for (NodeId c : n.children) {
        CHECK((x.node(c).leaf || x.node(c).label != n.label));
      }
    }
    CHECK(canonicalize(x.to_expr()) == x);
    CHECK(serialize_body(canonicalize(testing::scramble(e, rng))) == serialize_body(x));
  }
}

TEST_CASE("polarity is conserved") {
  std::mt19937 rng(9);
  for (int i = 0; i < 200; ++i) {
    int next = 0;
    RawExpr e = testing::random_unique_expr(rng, 1 + static_cast<int>(rng() % 7), true, next);
    PredicateGraph x = canonicalize(e);
    int neg = 0;
    for (const Node& n : x.nodes()) neg += n.leaf && n.polarity == Polarity::Negative;
    CHECK(neg == negation_parity_leaves(e, false));
  }
}
