// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PGIR_LABELER_HPP
#define PGIR_LABELER_HPP

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pgir {

/// Network or HTTP-level failure; worth another attempt.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LabelerConfig {
  /// Chat-completions URL, e.g. https://api.openai.com/v1/chat/completions
  std::string endpoint;
  std::string model;
  /// Name of the environment variable holding the bearer credential.
  std::string api_key_env = "PGIR_LLM_API_KEY";
  double temperature = 0.0;
  int max_attempts = 3;
  int backoff_ms = 1000;  // doubled after every failed attempt
  int timeout_s = 300;
  unsigned parallelism = 4;
  /// Minimum spacing between request starts; 0 disables the limit.
  int min_interval_ms = 0;
  /// Prompts above this many tokens (bytes / 4) are not sent.
  std::size_t context_budget_tokens = 200000;
};

/// One completed exchange.
struct TranscriptEntry {
  std::string pair_id;
  std::string request;   // rendered prompt
  std::string response;  // raw message content
  std::string timestamp;
};

/// Returns the model's message content for a prompt.
class Labeler {
 public:
  virtual ~Labeler() = default;
  /// Throws TransportError on failures that may succeed when retried, and
  /// InputError on ones that will not.
  virtual std::string complete(const std::string& pair_id, const std::string& prompt) = 0;
  /// Whether failed or malformed answers are worth asking again.
  virtual bool retryable() const { return true; }
};

/// OpenAI-style chat completions over HTTPS with a strict JSON response
/// mode. The credential is read from the environment at construction.
class HttpLabeler : public Labeler {
 public:
  /// Throws FatalError for a malformed endpoint, a missing model name or an
  /// unset credential variable.
  explicit HttpLabeler(LabelerConfig config);
  std::string complete(const std::string& pair_id, const std::string& prompt) override;

 private:
  LabelerConfig config_;
  std::string scheme_host_;
  std::string path_;
  std::string api_key_;
  std::mutex pace_mu_;
  std::chrono::steady_clock::time_point next_start_{};
};

/// Answers from a transcript, keyed by pair id (the last entry wins). A
/// missing pair or a prompt that differs from the recorded one is an error.
class ReplayLabeler : public Labeler {
 public:
  /// Throws InputError on a malformed transcript line.
  explicit ReplayLabeler(const std::string& transcript_text);
  std::string complete(const std::string& pair_id, const std::string& prompt) override;
  bool retryable() const override { return false; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, TranscriptEntry> entries_;
};

/// Appends entries as JSON lines; safe to call from several threads.
class TranscriptWriter {
 public:
  /// Truncates `path` unless `append` is set.
  TranscriptWriter(std::string path, bool append = false);
  void add(const TranscriptEntry& e);

 private:
  std::string path_;
  std::mutex mu_;
};

std::string transcript_line(const TranscriptEntry& e);

struct LabelJob {
  std::string pair_id;
  std::string prompt;
};

struct LabelResult {
  std::string pair_id;
  std::optional<std::string> response;  // content of the last answer that passed `accept`
  std::string error;                    // why there is none
  int attempts = 0;
};

/// Runs every job through `labeler` with bounded parallelism and
/// exponential backoff. `accept` validates an answer (throwing InputError
/// to reject it). Results come back in job order.
std::vector<LabelResult> label_all(const std::vector<LabelJob>& jobs, Labeler& labeler, const LabelerConfig& config,
                                   const std::function<void(const std::string&)>& accept,
                                   TranscriptWriter* transcript = nullptr);

}  // namespace pgir

#endif  // PGIR_LABELER_HPP
