// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

// pgir command-line entry point. Exit codes: 0 success, 1 fatal, 2 bad input.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pgir/pipeline.hpp"
#include "pgir/spl.hpp"
#include "pgir/text_format.hpp"

namespace {

using namespace pgir;

struct AlignFlags {
  AlignParams align;
  double theta_flip = 0.5;
};

void add_align_flags(CLI::App* cmd, AlignFlags& f) {
  cmd->add_option("--theta-sup", f.align.theta_sup, "Phase 2 support threshold")->capture_default_str();
  cmd->add_option("--theta-cov", f.align.theta_cov, "Phase 2 coverage threshold")->capture_default_str();
  cmd->add_option("--min-anchors", f.align.min_anchors, "Matched leaves needed to pair operators")
      ->capture_default_str();
  cmd->add_option("--fuzzy-floor", f.align.fuzzy_floor, "Lowest similarity for fuzzy leaf matches")
      ->capture_default_str();
  cmd->add_option("--cap", f.align.candidate_cap, "Fuzzy candidates kept per leaf")->capture_default_str();
}

void add_flip_flag(CLI::App* cmd, AlignFlags& f) {
  cmd->add_option("--theta-flip", f.theta_flip, "Leaf overlap needed to report a flip")->capture_default_str();
}

// `--weights` takes a key=value list or the path of a file holding one.
CostWeights weights_from(const std::string& spec) {
  CostWeights w;
  if (spec.empty()) return w;
  std::error_code ec;
  if (std::filesystem::is_regular_file(spec, ec)) {
    w.apply_overrides(read_file(spec));
  } else {
    w.apply_overrides(spec);
  }
  return w;
}

void print(const std::string& s) { std::cout << s << std::flush; }

int report_error(const char* kind, const std::string& message, int code) {
  nlohmann::ordered_json j = {{"status", "error"}, {"kind", kind}, {"message", message}};
  std::cerr << j.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predicate-graph history analysis for detection rules", "pgir"};
  app.set_version_flag("--version", std::string(kCanonicalFormatVersion));
  app.require_subcommand(1);

  std::string file_a, file_b, out_dir, weights_spec;
  AlignFlags af;

  auto* parse = app.add_subcommand("parse", "Print the parsed detection expression of a rule");
  parse->add_option("file", file_a, "SPL rule file")->required()->check(CLI::ExistingFile);

  auto* canon = app.add_subcommand("canon", "Print the canonical predicate graph of a rule");
  canon->add_option("file", file_a, "SPL rule file")->required()->check(CLI::ExistingFile);

  auto* align_cmd = app.add_subcommand("align", "Align two rule versions");
  align_cmd->add_option("file_a", file_a)->required()->check(CLI::ExistingFile);
  align_cmd->add_option("file_b", file_b)->required()->check(CLI::ExistingFile);
  add_align_flags(align_cmd, af);

  auto* diff = app.add_subcommand("diff", "Predicate distance and edit script between two versions");
  diff->add_option("file_a", file_a)->required()->check(CLI::ExistingFile);
  diff->add_option("file_b", file_b)->required()->check(CLI::ExistingFile);
  diff->add_option("--weights", weights_spec, "Cost overrides: key=value[,key=value...] or a file of them");
  add_align_flags(diff, af);
  add_flip_flag(diff, af);

  auto* ops = app.add_subcommand("ops", "Structural operations between two versions");
  ops->add_option("file_a", file_a)->required()->check(CLI::ExistingFile);
  ops->add_option("file_b", file_b)->required()->check(CLI::ExistingFile);
  ops->add_option("--weights", weights_spec, "Cost overrides");
  add_align_flags(ops, af);
  add_flip_flag(ops, af);

  auto* ops_matrix = app.add_subcommand("ops-matrix", "Operation co-occurrence matrix from steps.jsonl");
  ops_matrix->add_option("steps", file_a, "steps.jsonl")->required()->check(CLI::ExistingFile);

  // lineages
  std::string repo, ref = "HEAD", convert_cmd, out_file;
  std::vector<std::string> filters;
  double rename_threshold = 0.6;
  auto* lineages_cmd = app.add_subcommand("lineages", "Reconstruct rule lineages from a git repository");
  lineages_cmd->add_option("repo", repo, "Repository path")->required()->check(CLI::ExistingDirectory);
  lineages_cmd->add_option("--ref", ref, "Snapshot ref")->capture_default_str();
  lineages_cmd->add_option("--filter", filters, "Path glob (repeatable; default **/*.yml **/*.yaml **/*.spl)");
  lineages_cmd->add_option("--convert-cmd", convert_cmd, "Shell command converting a rule body to SPL");
  lineages_cmd->add_option("--rename-threshold", rename_threshold, "Similarity needed to pair a rename")
      ->capture_default_str();
  lineages_cmd->add_option("-o,--output", out_file, "Write lineages.jsonl here instead of stdout");
  add_align_flags(lineages_cmd, af);

  // analyze
  unsigned parallelism = 4;
  auto* analyze = app.add_subcommand("analyze", "Longitudinal statistics over lineages.jsonl");
  analyze->add_option("lineages", file_a, "lineages.jsonl")->required()->check(CLI::ExistingFile);
  analyze->add_option("--out", out_dir, "Output directory")->required();
  analyze->add_option("--weights", weights_spec, "Cost overrides");
  analyze->add_option("-j,--parallelism", parallelism, "Worker threads")->capture_default_str();
  add_align_flags(analyze, af);
  add_flip_flag(analyze, af);

  // intent
  LabelerConfig llm;
  std::string replay;
  auto add_llm_flags = [&](CLI::App* cmd) {
    cmd->add_option("--replay", replay, "Answer from a recorded transcript (no network)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--llm-endpoint", llm.endpoint, "Chat-completions URL");
    cmd->add_option("--llm-model", llm.model, "Model name");
    cmd->add_option("--api-key-env", llm.api_key_env, "Variable holding the API credential")
        ->capture_default_str();
    cmd->add_option("--max-attempts", llm.max_attempts)->capture_default_str();
    cmd->add_option("--backoff-ms", llm.backoff_ms)->capture_default_str();
    cmd->add_option("--timeout", llm.timeout_s, "Per-request timeout in seconds")->capture_default_str();
    cmd->add_option("--min-interval-ms", llm.min_interval_ms, "Spacing between request starts")
        ->capture_default_str();
    cmd->add_option("--context-budget", llm.context_budget_tokens, "Largest prompt sent, in tokens")
        ->capture_default_str();
  };
  auto* intent = app.add_subcommand("intent", "Label the intent of every revision step");
  intent->add_option("lineages", file_a, "lineages.jsonl")->required()->check(CLI::ExistingFile);
  intent->add_option("--out", out_dir, "Output directory")->required();
  intent->add_option("-j,--parallelism", parallelism, "Concurrent requests")->capture_default_str();
  intent->add_option("--weights", weights_spec, "Cost overrides");
  add_llm_flags(intent);
  add_align_flags(intent, af);
  add_flip_flag(intent, af);

  // run
  RunConfig rc;
  std::vector<std::string> repos;
  auto* run = app.add_subcommand("run", "Full pipeline: ingest, analytics and intent");
  run->add_option("repos", repos, "Repository paths, optionally path@ref")->required();
  run->add_option("--out", rc.output_dir, "Output directory")->required();
  run->add_option("--ref", ref, "Default snapshot ref")->capture_default_str();
  run->add_option("--filter", filters, "Path glob (repeatable)");
  run->add_option("--convert-cmd", rc.convert_cmd, "Shell command converting a rule body to SPL");
  run->add_option("--rename-threshold", rc.rename_threshold)->capture_default_str();
  run->add_option("--weights", weights_spec, "Cost overrides");
  run->add_option("-j,--parallelism", rc.parallelism)->capture_default_str();
  run->add_option("--seed", rc.seed, "Recorded in config.json")->capture_default_str();
  run->add_flag("--skip-intent", rc.skip_intent, "Do not label intent");
  run->add_flag("--dump-canonical", rc.dump_canonical, "Also write canonical.jsonl");
  add_llm_flags(run);
  add_align_flags(run, af);
  add_flip_flag(run, af);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*parse) {
      print(parse_report(read_file(file_a)));
    } else if (*canon) {
      print(canon_report(read_file(file_a)));
    } else if (*align_cmd) {
      print(align_report(read_file(file_a), read_file(file_b), af.align));
    } else if (*diff) {
      print(diff_report(read_file(file_a), read_file(file_b), af.align, weights_from(weights_spec), af.theta_flip));
    } else if (*ops) {
      print(ops_report(read_file(file_a), read_file(file_b), af.align, weights_from(weights_spec), af.theta_flip));
    } else if (*ops_matrix) {
      print(ops_matrix_from_steps(read_file(file_a)));
    } else if (*lineages_cmd) {
      ScanOptions so;
      so.snapshot_ref = ref;
      if (!filters.empty()) so.path_filters = filters;
      so.convert_cmd = convert_cmd;
      LineageOptions lo;
      lo.rename_threshold = rename_threshold;
      lo.align = af.align;
      ScanResult scan = scan_repository(repo, so);
      for (const ScanWarning& w : scan.warnings) {
        std::cerr << "warning: " << w.commit.substr(0, 12) << " " << w.path << ": " << w.message << "\n";
      }
      std::string text = lineages_to_jsonl(build_lineages(scan, lo));
      if (out_file.empty()) {
        print(text);
      } else {
        write_file(out_file, text);
      }
    } else if (*analyze || *intent) {
      AnalysisOptions ao;
      ao.align = af.align;
      ao.weights = weights_from(weights_spec);
      ao.theta_flip = af.theta_flip;
      ao.threads = parallelism;
      std::vector<Lineage> lineages = lineages_from_jsonl(read_file(file_a));
      std::vector<std::string> files;
      if (*analyze) {
        files = analyze_to_dir(lineages, ao, out_dir);
      } else {
        RunConfig lc;
        lc.llm = llm;
        lc.llm.parallelism = parallelism;
        lc.replay_transcript = replay;
        std::unique_ptr<Labeler> labeler = make_labeler(lc);
        files = intent_to_dir(lineages, ao, *labeler, lc.llm, replay.empty(), out_dir);
      }
      for (const std::string& f : files) std::cout << out_dir << "/" << f << "\n";
    } else if (*run) {
      for (const std::string& r : repos) {
        // path@ref, unless the whole argument is an existing path
        std::size_t at = r.rfind('@');
        std::error_code ec;
        if (at != std::string::npos && at > 0 && !std::filesystem::exists(r, ec)) {
          rc.repos.push_back({r.substr(0, at), r.substr(at + 1), ""});
        } else {
          rc.repos.push_back({r, ref, ""});
        }
      }
      if (!filters.empty()) rc.path_filters = filters;
      rc.align = af.align;
      rc.theta_flip = af.theta_flip;
      rc.weights = weights_from(weights_spec);
      rc.llm = llm;
      rc.replay_transcript = replay;
      RunResult res = run_pipeline(rc);
      nlohmann::ordered_json j = {{"status", "ok"},
                                  {"output_dir", res.output_dir},
                                  {"lineages", res.lineages},
                                  {"steps", res.steps},
                                  {"warnings", res.warnings},
                                  {"files", res.manifest.size() + 1}};
      print(j.dump() + "\n");
    }
  } catch (const InputError& e) {
    return report_error("input", e.what(), 2);
  } catch (const FatalError& e) {
    return report_error("fatal", e.what(), 1);
  } catch (const std::exception& e) {
    return report_error("fatal", e.what(), 1);
  }
  return 0;
}
