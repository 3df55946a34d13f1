// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PGIR_TEXT_FORMAT_HPP
#define PGIR_TEXT_FORMAT_HPP

#include <string>
#include <string_view>

#include "pgir/graph.hpp"
#include "pgir/predicate.hpp"

namespace pgir {

/// Version tag of the canonical text form; printed by `pgir --version`.
inline constexpr std::string_view kCanonicalFormatVersion = "pgir-text/1";

/// Indented EXPR/PRED body for an expression (NOT allowed, printed as
/// EXPR(op=NOT)). Leaves with negative polarity get a `polarity=neg` line.
std::string serialize_expr(const RawExpr& expr);

/// Reads a body produced by serialize_expr. Throws InputError with a line
/// number on malformed text.
RawExpr parse_expr(std::string_view body);

/// Header plus `Predicate graph:` body.
std::string serialize(const PredicateGraph& g);
/// Body only.
std::string serialize_body(const PredicateGraph& g);

/// Inverse of serialize(). The body must already be canonical; anything
/// else is rejected so that parse_canonical(serialize(g)) == g is the only
/// accepted round trip.
PredicateGraph parse_canonical(std::string_view text);

}  // namespace pgir

#endif  // PGIR_TEXT_FORMAT_HPP
