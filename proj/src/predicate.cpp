// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#include "pgir/predicate.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "pgir/util.hpp"

namespace pgir {

namespace {

constexpr std::array<std::pair<Comparator, std::string_view>, 10> kComparatorNames{{
    {Comparator::Eq, "EQ"},
    {Comparator::Neq, "NEQ"},
    {Comparator::Lt, "LT"},
    {Comparator::Le, "LE"},
    {Comparator::Gt, "GT"},
    {Comparator::Ge, "GE"},
    {Comparator::In, "IN"},
    {Comparator::NotIn, "NOT_IN"},
    {Comparator::Contains, "CONTAINS"},
    {Comparator::Regex, "REGEX"},
}};

constexpr std::array<std::pair<ValueKind, std::string_view>, 5> kKindNames{{
    {ValueKind::String, "STRING"},
    {ValueKind::Wildcard, "WILDCARD"},
    {ValueKind::Number, "NUMBER"},
    {ValueKind::Regex, "REGEX"},
    {ValueKind::List, "LIST"},
}};

}  // namespace

std::string_view to_string(Comparator c) {
  for (const auto& [cmp, name] : kComparatorNames) {
    if (cmp == c) return name;
  }
  return "?";
}

std::optional<Comparator> comparator_from_string(std::string_view s) {
  for (const auto& [cmp, name] : kComparatorNames) {
    if (name == s) return cmp;
  }
  return std::nullopt;
}

ComparatorClass comparator_class(Comparator c) {
  switch (c) {
    case Comparator::Eq:
    case Comparator::Neq:
      return ComparatorClass::Equality;
    case Comparator::Lt:
    case Comparator::Le:
    case Comparator::Gt:
    case Comparator::Ge:
      return ComparatorClass::Ordering;
    case Comparator::In:
    case Comparator::NotIn:
      return ComparatorClass::Membership;
    case Comparator::Contains:
      return ComparatorClass::Containment;
    case Comparator::Regex:
      return ComparatorClass::Regex;
  }
  return ComparatorClass::Equality;
}

std::string_view to_string(ValueKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "?";
}

std::optional<ValueKind> value_kind_from_string(std::string_view s) {
  for (const auto& [kind, name] : kKindNames) {
    if (name == s) return kind;
  }
  return std::nullopt;
}

ValuePayload ValuePayload::scalar(ValueKind kind, std::string text) {
  ValuePayload p;
  p.kind = kind;
  p.text = std::move(text);
  return p;
}

ValuePayload ValuePayload::literal(std::string text, bool quoted) {
  if (text.find_first_of("*?") != std::string::npos) {
    return scalar(ValueKind::Wildcard, std::move(text));
  }
  if (!quoted && parse_number(text)) {
    return scalar(ValueKind::Number, std::move(text));
  }
  return scalar(ValueKind::String, std::move(text));
}

ValuePayload ValuePayload::list(std::vector<ValuePayload> members) {
  ValuePayload p;
  p.kind = ValueKind::List;
  p.members = std::move(members);
  return p;
}

bool member_order_less(const ValuePayload& a, const ValuePayload& b) {
  if (a.text.size() != b.text.size()) return a.text.size() > b.text.size();
  if (a.text != b.text) return a.text < b.text;
  return a.kind < b.kind;
}

ValuePayload normalized_payload(const ValuePayload& payload) {
  if (payload.is_list()) {
    std::vector<ValuePayload> members;
    members.reserve(payload.members.size());
    for (const auto& m : payload.members) members.push_back(normalized_payload(m));
    std::sort(members.begin(), members.end(), member_order_less);
    members.erase(std::unique(members.begin(), members.end()), members.end());
    return ValuePayload::list(std::move(members));
  }
  if (payload.kind == ValueKind::Number) {
    if (auto v = parse_number(trim(payload.text))) {
      return ValuePayload::scalar(ValueKind::Number, format_number(*v));
    }
  }
  return ValuePayload::scalar(payload.kind, collapse_whitespace(payload.text));
}

namespace {

void append_quoted(std::string& out, std::string_view text) {
  out.push_back('"');
  for (char c : text) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

std::string value_normalize(const ValuePayload& payload) {
  ValuePayload norm = normalized_payload(payload);
  if (!norm.is_list()) return norm.text;
  std::string out = "[";
  for (std::size_t i = 0; i < norm.members.size(); ++i) {
    if (i > 0) out += ", ";
    out += to_string(norm.members[i].kind);
    out.push_back('(');
    append_quoted(out, norm.members[i].text);
    out.push_back(')');
  }
  out.push_back(']');
  return out;
}

RawExpr RawExpr::leaf(AtomicPredicate p, Polarity polarity) {
  RawExpr e;
  e.kind = Kind::Predicate;
  e.predicate = std::move(p);
  e.polarity = polarity;
  return e;
}

RawExpr RawExpr::op(Kind kind, std::vector<RawExpr> children) {
  RawExpr e;
  e.kind = kind;
  e.children = std::move(children);
  return e;
}

RawExpr RawExpr::negate(RawExpr child) {
  std::vector<RawExpr> children;
  children.push_back(std::move(child));
  return op(Kind::Not, std::move(children));
}

std::size_t RawExpr::leaf_count() const {
  if (is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : children) n += c.leaf_count();
  return n;
}

}  // namespace pgir
