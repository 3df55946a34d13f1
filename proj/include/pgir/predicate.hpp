// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PGIR_PREDICATE_HPP
#define PGIR_PREDICATE_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pgir {

enum class Comparator { Eq, Neq, Lt, Le, Gt, Ge, In, NotIn, Contains, Regex };

/// Coarse comparator families used to gate fuzzy leaf matching.
enum class ComparatorClass { Equality, Ordering, Membership, Containment, Regex };

enum class ValueKind { String, Wildcard, Number, Regex, List };

enum class Polarity { Positive, Negative };

std::string_view to_string(Comparator c);
std::optional<Comparator> comparator_from_string(std::string_view s);
ComparatorClass comparator_class(Comparator c);

std::string_view to_string(ValueKind k);
std::optional<ValueKind> value_kind_from_string(std::string_view s);

/// A literal operand. Scalars carry `text`; lists carry `members`, each of
/// which is a scalar payload.
struct ValuePayload {
  ValueKind kind = ValueKind::String;
  std::string text;
  std::vector<ValuePayload> members;

  static ValuePayload scalar(ValueKind kind, std::string text);
  /// Classifies a quoted or bare literal: WILDCARD iff it contains `*` or `?`.
  static ValuePayload literal(std::string text, bool quoted);
  static ValuePayload list(std::vector<ValuePayload> members);

  bool is_list() const { return kind == ValueKind::List; }
  friend bool operator==(const ValuePayload&, const ValuePayload&) = default;
};

/// (field, comparator, value). Bare search terms use the `_raw` pseudo-field.
struct AtomicPredicate {
  std::string field;
  Comparator comparator = Comparator::Eq;
  ValuePayload value;

  friend bool operator==(const AtomicPredicate&, const AtomicPredicate&) = default;
};

inline constexpr std::string_view kRawField = "_raw";

/// Boolean expression over atomic predicates as parsed, before
/// canonicalization. NOT nodes have exactly one child. Leaves normally carry
/// positive polarity; negative polarity appears only when a canonical graph
/// is viewed as an expression.
struct RawExpr {
  enum class Kind { Predicate, And, Or, Not };

  Kind kind = Kind::Predicate;
  AtomicPredicate predicate;
  Polarity polarity = Polarity::Positive;
  std::vector<RawExpr> children;

  static RawExpr leaf(AtomicPredicate p, Polarity polarity = Polarity::Positive);
  static RawExpr op(Kind kind, std::vector<RawExpr> children);
  static RawExpr negate(RawExpr child);

  bool is_leaf() const { return kind == Kind::Predicate; }
  std::size_t leaf_count() const;

  friend bool operator==(const RawExpr&, const RawExpr&) = default;
};

/// Normalized literal text: unescaped, whitespace runs collapsed, trimmed.
/// Numbers use their shortest round-trip form; list members are normalized
/// individually and put in canonical member order.
std::string value_normalize(const ValuePayload& payload);

/// Returns a copy with every scalar normalized and list members ordered.
ValuePayload normalized_payload(const ValuePayload& payload);

/// Canonical list-member order: longer literals first, then byte order.
bool member_order_less(const ValuePayload& a, const ValuePayload& b);

}  // namespace pgir

#endif  // PGIR_PREDICATE_HPP
