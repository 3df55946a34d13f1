// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PGIR_UTIL_HPP
#define PGIR_UTIL_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pgir {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

constexpr double kSecondsPerDay = 86400.0;
/// Fixed quarter length used for lag windows (365.25 / 4 days).
constexpr double kQuarterDays = 91.3125;

/// Raised for unrecoverable conditions (unreadable repository, bad ref,
/// malformed configuration). The CLI maps it to exit code 1.
class FatalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed user input (rule text, canonical text, JSONL).
/// The CLI maps it to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_utc(Timestamp t);
Timestamp parse_utc(std::string_view iso);

double days_between(Timestamp from, Timestamp to);

/// Calendar quarter label, e.g. "2016Q4".
std::string calendar_quarter(Timestamp t);

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
/// Trims and collapses every internal run of whitespace to a single space.
std::string collapse_whitespace(std::string_view s);
bool starts_with_icase(std::string_view s, std::string_view prefix);
bool equals_icase(std::string_view a, std::string_view b);

/// Levenshtein distance over bytes.
std::size_t edit_distance(std::string_view a, std::string_view b);
/// 1 - edit_distance / max(len). Two empty strings are identical.
double edit_similarity(std::string_view a, std::string_view b);

/// Shortest decimal form that round-trips through a double.
std::string format_number(double v);
std::optional<double> parse_number(std::string_view s);

std::string sha256_hex(std::string_view data);

/// Linear-interpolation quantile (the common "type 7" definition) over an
/// unsorted sample. Returns nullopt for an empty sample.
std::optional<double> quantile(std::vector<double> values, double q);
std::optional<double> mean(std::span<const double> values);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

/// Quotes a CSV cell when it contains a delimiter, quote or newline.
std::string csv_cell(std::string_view s);

}  // namespace pgir

#endif  // PGIR_UTIL_HPP
