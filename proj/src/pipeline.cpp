// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#include "pgir/pipeline.hpp"

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "json.hpp"
#include "pgir/graph.hpp"
#include "pgir/spl.hpp"
#include "pgir/text_format.hpp"

namespace pgir {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json align_json(const AlignParams& p) {
  return {{"min_anchors", p.min_anchors},
          {"theta_sup", p.theta_sup},
          {"theta_cov", p.theta_cov},
          {"fuzzy_floor", p.fuzzy_floor},
          {"candidate_cap", p.candidate_cap}};
}

ordered_json weights_json(const CostWeights& w) {
  return {{"pred_insert", w.pred_insert},         {"pred_delete", w.pred_delete},
          {"field_update", w.field_update},       {"operator_update", w.operator_update},
          {"value_update", w.value_update},       {"bool_insert", w.bool_insert},
          {"bool_delete", w.bool_delete},         {"bool_relabel", w.bool_relabel},
          {"update_cap", w.update_cap}};
}

std::string describe_node(const PredicateGraph& g, NodeId id) {
  const Node& n = g.node(id);
  if (!n.leaf) return std::string(to_string(n.label));
  std::string s = n.polarity == Polarity::Negative ? "NOT " : "";
  s += n.predicate.field;
  s += ' ';
  s += to_string(n.predicate.comparator);
  s += ' ';
  s += value_normalize(n.predicate.value);
  return s;
}

ordered_json node_json(const PredicateGraph& g, NodeId id) { return {{"id", id}, {"node", describe_node(g, id)}}; }

ordered_json breakdown_json(const Breakdown& b) {
  ordered_json out = ordered_json::object();
  for (std::size_t k = 0; k < kEditKinds; ++k) {
    out[std::string(to_string(static_cast<EditKind>(k)))] = {{"count", b.count[k]}, {"cost", b.cost[k]}};
  }
  return out;
}

ordered_json ops_json(const StructuralOpSet& ops) {
  ordered_json out = ordered_json::object();
  for (StructOp op : ops.present()) out[std::string(to_string(op))] = ops.count(op);
  return out;
}

ordered_json flips_json(const std::vector<FlipPair>& flips) {
  ordered_json out = ordered_json::array();
  for (const FlipPair& f : flips) out.push_back({{"a", f.a}, {"b", f.b}, {"overlap", f.overlap}});
  return out;
}

// A staging directory next to `target`, so the final rename stays on one
// filesystem.
fs::path staging_dir(const fs::path& target) {
  std::random_device rd;
  fs::path parent = target.parent_path().empty() ? fs::path(".") : target.parent_path();
  fs::create_directories(parent);
  for (int i = 0; i < 100; ++i) {
    fs::path p = parent / ("." + target.filename().string() + ".partial-" + std::to_string(::getpid()) + "-" +
                           std::to_string(rd() % 1000000));
    if (fs::create_directory(p)) return p;
  }
  throw FatalError("cannot create a staging directory next to " + target.string());
}

void check_replaceable(const fs::path& out) {
  if (!fs::exists(out)) return;
  if (!fs::is_directory(out)) throw FatalError("output path exists and is not a directory: " + out.string());
  if (fs::is_empty(out) || fs::exists(out / "manifest.json")) return;
  throw FatalError("refusing to replace " + out.string() + ": not empty and not a previous run");
}

std::string canonical_jsonl(const std::vector<Lineage>& lineages, const std::vector<LineageAnalysis>& analyses) {
  std::string out;
  for (std::size_t i = 0; i < lineages.size(); ++i) {
    const LineageAnalysis& a = analyses[i];
    for (std::size_t v = 0; v < a.version_count; ++v) {
      ordered_json j = {{"lineage_id", a.lineage_id},
                        {"version", v},
                        {"commit", lineages[i].versions[v].commit},
                        {"status", spl::to_string(a.status[v])},
                        {"canonical", a.canonical[v]}};
      if (!a.parse_errors[v].empty()) j["error"] = a.parse_errors[v];
      out += j.dump() + "\n";
    }
  }
  return out;
}

std::string warnings_jsonl(const std::vector<ScanWarning>& warnings) {
  std::string out;
  for (const ScanWarning& w : warnings) {
    out += ordered_json{{"commit", w.commit}, {"path", w.path}, {"message", w.message}}.dump() + "\n";
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (repos.empty()) throw InputError("no repository given");
  if (output_dir.empty()) throw InputError("no output directory given");
  if (path_filters.empty()) throw InputError("at least one path filter is required");
  align.validate();
  weights.validate();
  if (!(theta_flip > 0.0 && theta_flip <= 1.0)) throw InputError("theta_flip must be in (0, 1]");
  if (!(rename_threshold >= 0.0 && rename_threshold <= 1.0)) throw InputError("rename threshold must be in [0, 1]");
  if (parallelism < 1) throw InputError("parallelism must be >= 1");
  if (llm.max_attempts < 1) throw InputError("max attempts must be >= 1");
}

std::string RunConfig::to_json() const {
  ordered_json rs = ordered_json::array();
  for (const RepoSpec& r : repos) {
    ordered_json j = {{"path", r.path}, {"snapshot_ref", r.snapshot_ref}};
    if (!r.resolved_commit.empty()) j["resolved_commit"] = r.resolved_commit;
    rs.push_back(j);
  }
  ordered_json j = {
      {"format", kCanonicalFormatVersion},
      {"repos", rs},
      {"path_filters", path_filters},
      {"convert_cmd", convert_cmd},
      {"align", align_json(align)},
      {"weights", weights_json(weights)},
      {"theta_flip", theta_flip},
      {"rename_threshold", rename_threshold},
      {"llm",
       {{"endpoint", llm.endpoint},
        {"model", llm.model},
        {"api_key_env", llm.api_key_env},
        {"temperature", llm.temperature},
        {"max_attempts", llm.max_attempts},
        {"backoff_ms", llm.backoff_ms},
        {"timeout_s", llm.timeout_s},
        {"min_interval_ms", llm.min_interval_ms},
        {"context_budget_tokens", llm.context_budget_tokens}}},
      {"replay_transcript", replay_transcript},
      {"skip_intent", skip_intent},
      {"dump_canonical", dump_canonical},
      {"parallelism", parallelism},
      {"seed", seed},
  };
  return j.dump(2) + "\n";
}

std::vector<ManifestEntry> build_manifest(const std::string& dir, std::vector<std::string> files) {
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  std::vector<ManifestEntry> out;
  for (const std::string& f : files) {
    std::string content = read_file(dir + "/" + f);
    out.push_back({f, content.size(), sha256_hex(content)});
  }
  return out;
}

std::string manifest_json(const std::vector<ManifestEntry>& entries) {
  ordered_json files = ordered_json::array();
  for (const ManifestEntry& e : entries) {
    files.push_back({{"path", e.path}, {"bytes", e.bytes}, {"sha256", e.sha256}});
  }
  return ordered_json{{"format", kCanonicalFormatVersion}, {"files", files}}.dump(2) + "\n";
}

std::unique_ptr<Labeler> make_labeler(const RunConfig& config) {
  if (!config.replay_transcript.empty()) {
    return std::make_unique<ReplayLabeler>(read_file(config.replay_transcript));
  }
  if (!config.llm.endpoint.empty()) return std::make_unique<HttpLabeler>(config.llm);
  throw FatalError("intent labeling needs a replay transcript or an LLM endpoint (or skip it)");
}

std::vector<std::string> analyze_to_dir(const std::vector<Lineage>& lineages, const AnalysisOptions& options,
                                        const std::string& dir) {
  fs::create_directories(dir);
  return write_analysis(analyze_lineages(lineages, options), dir);
}

std::vector<std::string> intent_to_dir(const std::vector<Lineage>& lineages, const AnalysisOptions& options,
                                       Labeler& labeler, const LabelerConfig& llm, bool write_transcript,
                                       const std::string& dir) {
  fs::create_directories(dir);
  std::vector<LineageAnalysis> analyses = analyze_lineages(lineages, options);
  std::optional<TranscriptWriter> transcript;
  if (write_transcript) transcript.emplace(dir + "/transcript.jsonl");
  IntentRun run = run_intent(lineages, analyses, labeler, llm, transcript ? &*transcript : nullptr);
  std::vector<std::string> names = write_intent(run, dir);
  if (write_transcript) names.push_back("transcript.jsonl");
  return names;
}

RunResult run_pipeline(const RunConfig& input) {
  RunConfig config = input;
  config.validate();
  config.llm.parallelism = config.parallelism;
  const fs::path out = config.output_dir;
  check_replaceable(out);

  // fail on a missing credential or transcript before any work
  std::unique_ptr<Labeler> labeler;
  if (!config.skip_intent) labeler = make_labeler(config);

  fs::path stage = staging_dir(out);
  try {
    RunResult result;
    std::vector<Lineage> lineages;
    std::vector<ScanWarning> warnings;
    ScanOptions scan_opts;
    scan_opts.path_filters = config.path_filters;
    scan_opts.convert_cmd = config.convert_cmd;
    LineageOptions lin_opts;
    lin_opts.rename_threshold = config.rename_threshold;
    lin_opts.align = config.align;
    for (RepoSpec& repo : config.repos) {
      scan_opts.snapshot_ref = repo.snapshot_ref;
      ScanResult scan = scan_repository(repo.path, scan_opts);
      repo.resolved_commit = scan.snapshot_commit;
      warnings.insert(warnings.end(), scan.warnings.begin(), scan.warnings.end());
      std::vector<Lineage> ls = build_lineages(scan, lin_opts);
      lineages.insert(lineages.end(), std::make_move_iterator(ls.begin()), std::make_move_iterator(ls.end()));
    }

    const std::string dir = stage.string();
    std::vector<std::string> files = {"config.json", "lineages.jsonl", "warnings.jsonl"};
    write_file(dir + "/config.json", config.to_json());
    write_file(dir + "/lineages.jsonl", lineages_to_jsonl(lineages));
    write_file(dir + "/warnings.jsonl", warnings_jsonl(warnings));

    AnalysisOptions an_opts;
    an_opts.align = config.align;
    an_opts.weights = config.weights;
    an_opts.theta_flip = config.theta_flip;
    an_opts.threads = config.parallelism;
    std::vector<LineageAnalysis> analyses = analyze_lineages(lineages, an_opts);
    for (std::string& f : write_analysis(analyses, dir)) files.push_back(std::move(f));
    if (config.dump_canonical) {
      write_file(dir + "/canonical.jsonl", canonical_jsonl(lineages, analyses));
      files.push_back("canonical.jsonl");
    }

    if (labeler) {
      // a replayed run must hash the same every time, so it records nothing
      std::optional<TranscriptWriter> transcript;
      if (config.replay_transcript.empty()) {
        transcript.emplace(dir + "/transcript.jsonl");
        files.push_back("transcript.jsonl");
      }
      IntentRun run = run_intent(lineages, analyses, *labeler, config.llm, transcript ? &*transcript : nullptr);
      for (std::string& f : write_intent(run, dir)) files.push_back(std::move(f));
    }

    result.manifest = build_manifest(dir, files);
    write_file(dir + "/manifest.json", manifest_json(result.manifest));
    result.lineages = lineages.size();
    for (const LineageAnalysis& a : analyses) result.steps += a.steps.size();
    result.warnings = warnings.size();

    check_replaceable(out);
    if (fs::exists(out)) fs::remove_all(out);
    fs::rename(stage, out);
    result.output_dir = out.string();
    return result;
  } catch (...) {
    std::error_code ec;
    fs::remove_all(stage, ec);
    throw;
  }
}

// ---------------------------------------------------------------------------

PredicateGraph graph_of(std::string_view spl_text) {
  spl::Detection d = spl::extract_detection(spl_text);
  if (d.status == spl::DetectionStatus::ParseFailure) throw spl::ParseFailure(d.error);
  if (d.status == spl::DetectionStatus::EmptyDetection) throw InputError("no detection logic in rule");
  return canonicalize(*d.expr);
}

std::string parse_report(std::string_view spl_text) {
  spl::Detection d = spl::extract_detection(spl_text);
  if (d.status == spl::DetectionStatus::ParseFailure) throw spl::ParseFailure(d.error);
  if (d.status == spl::DetectionStatus::EmptyDetection) throw InputError("no detection logic in rule");
  return serialize_expr(*d.expr);
}

std::string canon_report(std::string_view spl_text) { return serialize(graph_of(spl_text)); }

std::string align_report(std::string_view spl_a, std::string_view spl_b, const AlignParams& params) {
  PredicateGraph a = graph_of(spl_a);
  PredicateGraph b = graph_of(spl_b);
  Alignment aln = align(a, b, params);
  ordered_json pairs = ordered_json::array();
  for (const MatchPair& p : aln.pairs()) {
    pairs.push_back({{"a", p.a},
                     {"b", p.b},
                     {"phase", to_string(p.phase)},
                     {"a_node", describe_node(a, p.a)},
                     {"b_node", describe_node(b, p.b)}});
  }
  ordered_json ua = ordered_json::array(), ub = ordered_json::array();
  for (NodeId id : aln.unmatched_a()) ua.push_back(node_json(a, id));
  for (NodeId id : aln.unmatched_b()) ub.push_back(node_json(b, id));
  ordered_json j = {{"a_nodes", a.size()}, {"b_nodes", b.size()}, {"matched", pairs.size()},
                    {"pairs", pairs},      {"unmatched_a", ua},   {"unmatched_b", ub}};
  return j.dump(2) + "\n";
}

std::string diff_report(std::string_view spl_a, std::string_view spl_b, const AlignParams& params,
                        const CostWeights& weights, double theta_flip) {
  PredicateGraph a = graph_of(spl_a);
  PredicateGraph b = graph_of(spl_b);
  DistanceResult r = predicate_distance(a, b, params, weights, theta_flip);
  ordered_json edits = ordered_json::array();
  for (const Edit& e : r.script.edits) {
    ordered_json j = {{"kind", to_string(e.kind)}};
    if (e.a != kNoNode) j["a"] = node_json(a, e.a);
    if (e.b != kNoNode) j["b"] = node_json(b, e.b);
    if (e.kind == EditKind::PredUpdate) {
      ordered_json changed = ordered_json::array();
      if (e.field_changed) changed.push_back("field");
      if (e.comparator_changed) changed.push_back("comparator");
      if (e.value_changed) changed.push_back("value");
      if (e.polarity_changed) changed.push_back("polarity");
      j["changed"] = changed;
    }
    j["cost"] = e.cost;
    edits.push_back(j);
  }
  ordered_json j = {{"d_pred", r.d_pred},
                    {"breakdown", breakdown_json(r.script.breakdown)},
                    {"flips", flips_json(r.flips)},
                    {"edits", edits}};
  return j.dump(2) + "\n";
}

std::string ops_report(std::string_view spl_a, std::string_view spl_b, const AlignParams& params,
                       const CostWeights& weights, double theta_flip) {
  PredicateGraph a = graph_of(spl_a);
  PredicateGraph b = graph_of(spl_b);
  DistanceResult r = predicate_distance(a, b, params, weights, theta_flip);
  StructuralOpSet ops = label_step(r.alignment, r.script, a, b, r.flips);
  ordered_json j = {{"d_pred", r.d_pred}, {"ops", ops_json(ops)}, {"flips", flips_json(ops.flip_witness)}};
  return j.dump(2) + "\n";
}

std::string ops_matrix_from_steps(std::string_view steps_jsonl) {
  std::vector<StructuralOpSet> sets;
  std::size_t pos = 0, line_no = 0;
  while (pos < steps_jsonl.size()) {
    std::size_t nl = steps_jsonl.find('\n', pos);
    if (nl == std::string_view::npos) nl = steps_jsonl.size();
    std::string_view line = trim(steps_jsonl.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      if (!j.at("predicate_changing").get<bool>()) continue;
      StructuralOpSet s;
      for (const auto& [name, count] : j.at("ops").items()) {
        auto op = struct_op_from_string(name);
        if (!op) throw InputError("unknown op '" + name + "'");
        s.counts[static_cast<std::size_t>(*op)] = count.get<std::size_t>();
      }
      sets.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw InputError("steps line " + std::to_string(line_no) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError("steps line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cooccurrence_matrix(sets).to_csv();
}

}  // namespace pgir
