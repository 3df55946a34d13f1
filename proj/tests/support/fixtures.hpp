// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PGIR_TESTS_FIXTURES_HPP
#define PGIR_TESTS_FIXTURES_HPP

#include <stdexcept>
#include <string>

#include "pgir/graph.hpp"
#include "pgir/spl.hpp"
#include "pgir/util.hpp"

namespace pgir::testing {

inline std::string data_path(const std::string& rel) { return std::string(PGIR_TEST_DATA) + "/" + rel; }

inline PredicateGraph graph_from_spl(std::string_view text) {
  spl::Detection d = spl::extract_detection(text);
  if (d.status != spl::DetectionStatus::Ok) throw std::runtime_error("fixture does not parse: " + d.error);
  return canonicalize(*d.expr);
}

inline PredicateGraph load_graph(const std::string& rel) { return graph_from_spl(read_file(data_path(rel))); }

}  // namespace pgir::testing

#endif  // PGIR_TESTS_FIXTURES_HPP
