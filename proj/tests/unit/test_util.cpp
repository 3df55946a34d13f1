// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "pgir/util.hpp"

using namespace pgir;

TEST_CASE("timestamps round-trip through ISO text") {
  Timestamp t = parse_utc("2021-12-20T10:11:12");
  CHECK(format_utc(t) == "2021-12-20T10:11:12Z");
  CHECK(parse_utc("2016-12-27") == parse_utc("2016-12-27T00:00:00Z"));
  CHECK(calendar_quarter(parse_utc("2016-12-27")) == "2016Q4");
  CHECK(calendar_quarter(parse_utc("2018-01-01")) == "2018Q1");
  CHECK_THROWS_AS(parse_utc("yesterday"), InputError);
}

TEST_CASE("whitespace helpers") {
  CHECK(collapse_whitespace("  a \t b\n\nc  ") == "a b c");
  CHECK(collapse_whitespace("* -e*") == "* -e*");
  CHECK(trim("  x ") == "x");
  CHECK(equals_icase("Search", "sEARCH"));
}

TEST_CASE("edit similarity") {
  CHECK(edit_distance("kitten", "sitting") == 3);
  CHECK(edit_similarity("* -e*", "*-e*") == doctest::Approx(0.8));
  CHECK(edit_similarity("", "") == 1.0);
}

TEST_CASE("numbers render in shortest round-trip form") {
  CHECK(format_number(15.0) == "15");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-0.0) == "0");
  CHECK(parse_number("015").value() == 15.0);
  CHECK_FALSE(parse_number("1e").has_value());
  CHECK_FALSE(parse_number("abc").has_value());
  CHECK_FALSE(parse_number("").has_value());
}

TEST_CASE("type-7 quantiles") {
  CHECK(*quantile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
  CHECK(*quantile({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 0.9) == doctest::Approx(9.1));
  CHECK(*quantile({7}, 0.25) == 7);
  CHECK_FALSE(quantile({}, 0.5).has_value());
}

TEST_CASE("sha256 of a known vector") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("csv cells are quoted only when needed") {
  CHECK(csv_cell("plain") == "plain");
  CHECK(csv_cell("a,b") == "\"a,b\"");
  CHECK(csv_cell("say \"hi\"") == "\"say \"\"hi\"\"\"");
}
