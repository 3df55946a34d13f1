// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#include "pgir/labeler.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "pgir/util.hpp"

namespace pgir {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string now_utc() {
  return format_utc(static_cast<Timestamp>(std::time(nullptr)));
}

}  // namespace

// ---------------------------------------------------------------------------

HttpLabeler::HttpLabeler(LabelerConfig config) : config_(std::move(config)) {
  const std::string& url = config_.endpoint;
  std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw FatalError("endpoint must be an absolute URL: " + url);
  std::string scheme = to_lower(url.substr(0, scheme_end));
  if (scheme != "https" && scheme != "http") throw FatalError("unsupported endpoint scheme: " + scheme);
  std::size_t path_start = url.find('/', scheme_end + 3);
  scheme_host_ = path_start == std::string::npos ? url : url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (scheme_host_.size() <= scheme_end + 3) throw FatalError("endpoint has no host: " + url);
  if (config_.model.empty()) throw FatalError("no model name configured");
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (!key || !*key) throw FatalError("environment variable " + config_.api_key_env + " is not set");
  api_key_ = key;
}

std::string HttpLabeler::complete(const std::string& /*pair_id*/, const std::string& prompt) {
  if (config_.min_interval_ms > 0) {
    std::chrono::steady_clock::time_point start;
    {
      std::lock_guard lock(pace_mu_);
      start = std::max(std::chrono::steady_clock::now(), next_start_);
      next_start_ = start + std::chrono::milliseconds(config_.min_interval_ms);
    }
    std::this_thread::sleep_until(start);
  }

  ordered_json body = {{"model", config_.model},
                       {"temperature", config_.temperature},
                       {"response_format", {{"type", "json_object"}}},
                       {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
  httplib::Client client(scheme_host_);
  client.set_connection_timeout(30);
  client.set_read_timeout(config_.timeout_s);
  client.set_write_timeout(60);
  httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500) {
    throw TransportError("HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw InputError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  }
  try {
    json j = json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed completion body: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

ReplayLabeler::ReplayLabeler(const std::string& transcript_text) {
  std::size_t pos = 0, line_no = 0;
  while (pos < transcript_text.size()) {
    std::size_t nl = transcript_text.find('\n', pos);
    if (nl == std::string::npos) nl = transcript_text.size();
    std::string_view line = trim(std::string_view(transcript_text).substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      TranscriptEntry e;
      e.pair_id = j.at("pair_id").get<std::string>();
      e.request = j.at("request").get<std::string>();
      e.response = j.at("response").get<std::string>();
      e.timestamp = j.value("timestamp", "");
      entries_[e.pair_id] = std::move(e);
    } catch (const json::exception& e) {
      throw InputError("transcript line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string ReplayLabeler::complete(const std::string& pair_id, const std::string& prompt) {
  auto it = entries_.find(pair_id);
  if (it == entries_.end()) throw InputError("no transcript entry for " + pair_id);
  if (it->second.request != prompt) throw InputError("recorded prompt differs for " + pair_id);
  return it->second.response;
}

// ---------------------------------------------------------------------------

std::string transcript_line(const TranscriptEntry& e) {
  ordered_json j = {{"pair_id", e.pair_id}, {"request", e.request}, {"response", e.response}, {"timestamp", e.timestamp}};
  return j.dump() + "\n";
}

TranscriptWriter::TranscriptWriter(std::string path, bool append) : path_(std::move(path)) {
  if (!append) write_file(path_, "");
}

void TranscriptWriter::add(const TranscriptEntry& e) {
  std::string line = transcript_line(e);
  std::lock_guard lock(mu_);
  std::FILE* f = std::fopen(path_.c_str(), "ab");
  if (!f) throw FatalError("cannot append to " + path_);
  std::size_t n = std::fwrite(line.data(), 1, line.size(), f);
  std::fclose(f);
  if (n != line.size()) throw FatalError("short write to " + path_);
}

// ---------------------------------------------------------------------------

std::vector<LabelResult> label_all(const std::vector<LabelJob>& jobs, Labeler& labeler, const LabelerConfig& config,
                                   const std::function<void(const std::string&)>& accept,
                                   TranscriptWriter* transcript) {
  std::vector<LabelResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  int attempts_allowed = labeler.retryable() ? std::max(1, config.max_attempts) : 1;

  auto run_one = [&](const LabelJob& job, LabelResult& out) {
    out.pair_id = job.pair_id;
    int delay = std::max(0, config.backoff_ms);
    for (int attempt = 1; attempt <= attempts_allowed; ++attempt) {
      out.attempts = attempt;
      bool again = false;
      try {
        std::string content = labeler.complete(job.pair_id, job.prompt);
        if (transcript) transcript->add({job.pair_id, job.prompt, content, now_utc()});
        accept(content);
        out.response = std::move(content);
        out.error.clear();
        return;
      } catch (const TransportError& e) {
        out.error = e.what();
        again = true;
      } catch (const InputError& e) {
        // a malformed answer may come out right on a second try
        out.error = e.what();
        again = labeler.retryable();
      }
      if (!again || attempt == attempts_allowed) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      delay *= 2;
    }
  };

  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) run_one(jobs[i], results[i]);
  };
  unsigned n = std::max(1u, config.parallelism);
  n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(1, jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace pgir
