// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#include "pgir/ingest.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <map>
#include <tuple>

#include "json.hpp"
#include "pgir/git.hpp"
#include "pgir/graph.hpp"
#include "pgir/spl.hpp"

namespace pgir {

using nlohmann::json;

namespace {

bool match_segment(std::string_view pat, std::string_view s) {
  // classic wildcard match, no '/' inside a segment
  std::size_t p = 0, i = 0, star = std::string_view::npos, mark = 0;
  while (i < s.size()) {
    if (p < pat.size() && (pat[p] == '?' || pat[p] == s[i])) {
      ++p;
      ++i;
    } else if (p < pat.size() && pat[p] == '*') {
      star = p++;
      mark = i;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      i = ++mark;
    } else {
      return false;
    }
  }
  while (p < pat.size() && pat[p] == '*') ++p;
  return p == pat.size();
}

std::vector<std::string_view> split_path(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    std::size_t slash = s.find('/');
    out.push_back(s.substr(0, slash));
    if (slash == std::string_view::npos) break;
    s.remove_prefix(slash + 1);
  }
  return out;
}

bool match_parts(const std::vector<std::string_view>& pat, std::size_t pi,
                 const std::vector<std::string_view>& path, std::size_t si) {
  if (pi == pat.size()) return si == path.size();
  if (pat[pi] == "**") {
    for (std::size_t k = si; k <= path.size(); ++k) {
      if (match_parts(pat, pi + 1, path, k)) return true;
    }
    return false;
  }
  if (si == path.size()) return false;
  return match_segment(pat[pi], path[si]) && match_parts(pat, pi + 1, path, si + 1);
}

bool valid_utf8(std::string_view s) {
  for (std::size_t i = 0; i < s.size();) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t n = 0;
    if (c == 0) return false;
    if (c < 0x80) n = 0;
    else if ((c >> 5) == 0x6) n = 1;
    else if ((c >> 4) == 0xE) n = 2;
    else if ((c >> 3) == 0x1E) n = 3;
    else return false;
    if (i + n >= s.size() && n > 0) return false;
    for (std::size_t k = 1; k <= n; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    }
    i += n + 1;
  }
  return true;
}

bool ends_with_icase(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && equals_icase(s.substr(s.size() - suffix.size()), suffix);
}

std::string scalar_or_empty(const YAML::Node& doc, const char* key) {
  YAML::Node n = doc[key];
  if (n && n.IsScalar()) return n.as<std::string>();
  return {};
}

std::string short_id(const std::string& commit) { return commit.substr(0, std::min<std::size_t>(12, commit.size())); }

}  // namespace

bool glob_match(std::string_view pattern, std::string_view path) {
  return match_parts(split_path(pattern), 0, split_path(path), 0);
}

std::optional<ExtractedRule> extract_rule(std::string_view path, std::string_view body,
                                          const std::string& convert_cmd, std::string* error) {
  auto fail = [&](std::string msg) -> std::optional<ExtractedRule> {
    if (error) *error = std::move(msg);
    return std::nullopt;
  };
  if (!valid_utf8(body)) return fail("binary or undecodable content");
  if (ends_with_icase(path, ".spl")) return ExtractedRule{std::string(trim(body)), {}};

  YAML::Node doc;
  try {
    doc = YAML::Load(std::string(body));
  } catch (const YAML::Exception& e) {
    return fail(std::string("yaml: ") + e.what());
  }
  if (!doc.IsMap()) return fail("not a rule document");
  ExtractedRule rule;
  rule.rule_id = scalar_or_empty(doc, "id");
  if (rule.rule_id.empty()) rule.rule_id = scalar_or_empty(doc, "name");
  std::string search = scalar_or_empty(doc, "search");
  if (!search.empty()) {
    rule.text = std::string(trim(search));
    return rule;
  }
  if (convert_cmd.empty()) return fail("no search key");
  ProcessResult r = run_process({"/bin/sh", "-c", convert_cmd}, body);
  if (r.status != 0) return fail("converter exited with " + std::to_string(r.status) + ": " + std::string(trim(r.err)));
  rule.text = std::string(trim(r.out));
  return rule;
}

ScanResult scan_repository(const std::string& repo_path, const ScanOptions& options) {
  GitRepo repo(repo_path);
  ScanResult scan;
  scan.repo = repo_path;
  scan.snapshot_commit = repo.resolve(options.snapshot_ref);
  auto history = repo.first_parent_history(scan.snapshot_commit);
  if (!history.empty()) scan.snapshot_time = history.back().time;

  for (const CommitInfo& c : history) {
    CommitEvents ev;
    ev.commit = c.id;
    ev.time = c.time;
    for (const FileChange& fc : repo.changes(c)) {
      bool wanted = std::any_of(options.path_filters.begin(), options.path_filters.end(),
                                [&](const std::string& g) { return glob_match(g, fc.path); });
      if (!wanted) continue;
      FileEvent fe;
      fe.path = fc.path;
      if (fc.kind == ChangeKind::Deleted) {
        fe.kind = EventKind::Deleted;
        ev.files.push_back(std::move(fe));
        continue;
      }
      fe.kind = fc.kind == ChangeKind::Added ? EventKind::Added : EventKind::Modified;
      std::string error;
      auto rule = extract_rule(fc.path, repo.blob(c.id, fc.path), options.convert_cmd, &error);
      if (!rule) {
        // YAML without a search key is some other kind of content file
        if (error != "no search key" && error != "not a rule document") {
          scan.warnings.push_back({c.id, fc.path, error});
        }
        continue;
      }
      fe.text = std::move(rule->text);
      fe.rule_id = std::move(rule->rule_id);
      ev.files.push_back(std::move(fe));
    }
    scan.commits.push_back(std::move(ev));
  }
  return scan;
}

std::string_view to_string(LineageStatus s) { return s == LineageStatus::Active ? "active" : "deleted"; }

double Lineage::lifetime_days() const {
  Timestamp end = status == LineageStatus::Deleted ? last_seen : std::max(snapshot_time, last_seen);
  return days_between(created_at, end);
}

double rename_similarity(std::string_view text_a, std::string_view text_b, const AlignParams& params) {
  spl::Detection da = spl::extract_detection(text_a);
  spl::Detection db = spl::extract_detection(text_b);
  if (da.status != spl::DetectionStatus::Ok || db.status != spl::DetectionStatus::Ok) {
    return text_a == text_b ? 1.0 : 0.0;
  }
  PredicateGraph a = canonicalize(*da.expr);
  PredicateGraph b = canonicalize(*db.expr);
  Alignment aln = align(a, b, params);
  std::size_t matched = 0;
  for (const MatchPair& p : aln.pairs()) matched += a.node(p.a).leaf;
  std::size_t denom = std::max(a.predicate_count(), b.predicate_count());
  return denom == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(denom);
}

std::vector<Lineage> build_lineages(const ScanResult& scan, const LineageOptions& options) {
  std::vector<Lineage> lineages;
  std::map<std::string, std::size_t> active;  // path -> lineage

  auto append = [&](std::size_t li, const CommitEvents& ev, const FileEvent& fe) {
    Lineage& l = lineages[li];
    RuleVersion v;
    v.commit = ev.commit;
    // keep time monotone along the lineage
    v.time = l.versions.empty() ? ev.time : std::max(ev.time, l.versions.back().time);
    v.path = fe.path;
    v.rule_id = fe.rule_id;
    v.text = fe.text;
    v.text_digest = sha256_hex(fe.text);
    l.last_seen = v.time;
    l.versions.push_back(std::move(v));
  };
  auto start = [&](const CommitEvents& ev, const FileEvent& fe) {
    Lineage l;
    l.id = fe.path + "@" + short_id(ev.commit);
    l.repo = scan.repo;
    l.created_at = ev.time;
    l.snapshot_time = scan.snapshot_time;
    lineages.push_back(std::move(l));
    append(lineages.size() - 1, ev, fe);
    active[fe.path] = lineages.size() - 1;
  };

  for (const CommitEvents& ev : scan.commits) {
    std::vector<const FileEvent*> dels, adds;
    for (const FileEvent& fe : ev.files) {
      bool tracked = active.count(fe.path) > 0;
      if (fe.kind == EventKind::Deleted) {
        if (tracked) dels.push_back(&fe);
      } else if (tracked) {
        append(active[fe.path], ev, fe);
      } else {
        adds.push_back(&fe);
      }
    }

    // rename / split / merge: greedy pairing of deletions and additions
    std::vector<std::tuple<double, std::string, std::string, std::size_t, std::size_t>> cands;
    for (std::size_t i = 0; i < dels.size(); ++i) {
      const Lineage& l = lineages[active[dels[i]->path]];
      for (std::size_t j = 0; j < adds.size(); ++j) {
        double s = rename_similarity(l.versions.back().text, adds[j]->text, options.align);
        if (s >= options.rename_threshold) cands.emplace_back(s, dels[i]->path, adds[j]->path, i, j);
      }
    }
    std::sort(cands.begin(), cands.end(), [](const auto& x, const auto& y) {
      if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
      if (std::get<1>(x) != std::get<1>(y)) return std::get<1>(x) < std::get<1>(y);
      return std::get<2>(x) < std::get<2>(y);
    });
    std::vector<bool> del_used(dels.size()), add_used(adds.size());
    for (const auto& [s, dp, ap, i, j] : cands) {
      if (del_used[i] || add_used[j]) continue;
      del_used[i] = add_used[j] = true;
      std::size_t li = active[dp];
      active.erase(dp);
      active[ap] = li;
      append(li, ev, *adds[j]);
    }
    for (std::size_t i = 0; i < dels.size(); ++i) {
      if (del_used[i]) continue;
      std::size_t li = active[dels[i]->path];
      active.erase(dels[i]->path);
      Lineage& l = lineages[li];
      l.status = LineageStatus::Deleted;
      l.last_seen = std::max(ev.time, l.last_seen);
    }
    for (std::size_t j = 0; j < adds.size(); ++j) {
      if (!add_used[j]) start(ev, *adds[j]);
    }
  }
  return lineages;
}

std::string lineages_to_jsonl(const std::vector<Lineage>& lineages) {
  std::string out;
  for (const Lineage& l : lineages) {
    json versions = json::array();
    for (const RuleVersion& v : l.versions) {
      versions.push_back({{"commit", v.commit},
                          {"time", format_utc(v.time)},
                          {"path", v.path},
                          {"rule_id", v.rule_id},
                          {"text_digest", v.text_digest},
                          {"text", v.text}});
    }
    json j = {{"lineage_id", l.id},
              {"repo", l.repo},
              {"status", to_string(l.status)},
              {"created_at", format_utc(l.created_at)},
              {"last_seen", format_utc(l.last_seen)},
              {"snapshot_time", format_utc(l.snapshot_time)},
              {"versions", versions}};
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<Lineage> lineages_from_jsonl(std::string_view text) {
  std::vector<Lineage> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      Lineage l;
      l.id = j.at("lineage_id").get<std::string>();
      l.repo = j.value("repo", "");
      std::string status = j.at("status").get<std::string>();
      if (status != "active" && status != "deleted") throw InputError("bad status '" + status + "'");
      l.status = status == "active" ? LineageStatus::Active : LineageStatus::Deleted;
      l.created_at = parse_utc(j.at("created_at").get<std::string>());
      l.last_seen = parse_utc(j.at("last_seen").get<std::string>());
      l.snapshot_time = parse_utc(j.at("snapshot_time").get<std::string>());
      for (const json& v : j.at("versions")) {
        RuleVersion rv;
        rv.commit = v.at("commit").get<std::string>();
        rv.time = parse_utc(v.at("time").get<std::string>());
        rv.path = v.value("path", "");
        rv.rule_id = v.value("rule_id", "");
        rv.text = v.at("text").get<std::string>();
        rv.text_digest = v.value("text_digest", sha256_hex(rv.text));
        l.versions.push_back(std::move(rv));
      }
      if (l.versions.empty()) throw InputError("lineage without versions");
      out.push_back(std::move(l));
    } catch (const json::exception& e) {
      throw InputError("lineages line " + std::to_string(line_no) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError("lineages line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace pgir
