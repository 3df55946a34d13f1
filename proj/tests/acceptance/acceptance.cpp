// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance runner: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria. `--known-failure N` (repeatable) names a
// criterion that is expected to fail: it still prints FAIL, but only counts
// against the exit status if it unexpectedly passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pgir/git.hpp"
#include "pgir/pipeline.hpp"
#include "pgir/text_format.hpp"
#include "support/e2e_fixture.hpp"
#include "support/fixtures.hpp"
#include "support/intent_fixtures.hpp"
#include "support/oracle.hpp"
#include "support/truth_table.hpp"

using namespace pgir;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and limits, fixed here.
constexpr double kExact = 1e-9;              // float sums of exact weights
constexpr double kRefPairSecondsLimit = 1.0;
constexpr int kOraclePairs = 500;
constexpr int kOracleMaxLeaves = 6;
constexpr double kOracleSecondsLimit = 60.0;
constexpr int kCanonGraphs = 1000;
constexpr double kMimikatzTolerance = 0.10;
constexpr double kMimikatzV27 = 195.0;
constexpr double kMimikatzV31 = 166.6;
constexpr int kTrajectoryRandom = 50;
constexpr double kE2ESecondsLimit = 30.0;

struct Check {
  std::string detail;
  bool ok = true;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

PredicateGraph g(std::string_view spl_text) { return testing::graph_from_spl(spl_text); }

ProcessResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), PGIR_CLI);
  return run_process(args);
}

// ---------------------------------------------------------------------------

Check reference_pair() {
  Check c;
  auto t0 = Clock::now();
  PredicateGraph a = testing::load_graph("ref_pair/v31.spl");
  PredicateGraph b = testing::load_graph("ref_pair/v33.spl");
  Alignment aln = align(a, b);
  double secs = seconds_since(t0);
  c.require(a.size() == 13 && b.size() == 15, "node counts " + std::to_string(a.size()) + "/" + std::to_string(b.size()));
  c.require(aln.unmatched_a().empty(), "unmatched nodes in A");
  auto ub = aln.unmatched_b();
  c.require(ub.size() == 2, std::to_string(ub.size()) + " unmatched nodes in B");
  if (ub.size() == 2) {
    int ands = 0, jab = 0;
    for (NodeId id : ub) {
      const Node& n = b.node(id);
      ands += !n.leaf && n.label == OpLabel::And;
      jab += n.leaf && n.predicate.value.text == "*JAB*";
    }
    c.require(ands == 1 && jab == 1, "unmatched B nodes are not AND + *JAB*");
  }
  bool ws = false;
  int lists = 0, lists_p4 = 0;
  for (NodeId l : a.leaves()) {
    const Node& n = a.node(l);
    if (n.predicate.value.text == "* -e*") {
      ws = aln.phase(l) == Phase::P4 && b.node(aln.image(l)).predicate.value.text == "*-e*";
    }
    if (n.predicate.value.is_list()) {
      ++lists;
      lists_p4 += aln.phase(l) == Phase::P4;
    }
  }
  c.require(ws, "whitespace variant not matched in the fuzzy phase");
  c.require(lists > 0 && lists == lists_p4, "list leaf not matched in the fuzzy phase");
  c.require(secs < kRefPairSecondsLimit, "took " + fmt(secs) + " s");
  if (c.ok) c.detail = "13/13 A matched, B unmatched = {AND, *JAB*}, " + fmt(secs) + " s";
  return c;
}

Check cost_weights() {
  Check c;
  auto d = [](std::string_view x, std::string_view y) { return predicate_distance(g(x), g(y)).d_pred; };
  struct Case {
    const char* name;
    const char* a;
    const char* b;
    double expected;
  };
  const Case cases[] = {
      {"conjunct insertion", "a=1 b=2", "a=1 b=2 c=3", 1.0},
      {"value retune", R"(k=1 v="threshold-10")", R"(k=1 v="threshold-15")", 0.8},
      {"comparator change", R"(k=1 v="abcdefgh")", R"(k=1 v!="abcdefgh")", 0.5},
      {"field change", R"(k=1 v="abcdefgh")", R"(k=1 w="abcdefgh")", 0.2},
      {"operator insertion", "a=1 OR b=2 OR c=3", "a=1 OR (b=2 c=3)", 3.0},
      {"identity", "a=1 (b=2 OR c=3)", "a=1 (c=3 OR b=2)", 0.0},
  };
  for (const Case& k : cases) {
    double got = d(k.a, k.b);
    c.require(std::abs(got - k.expected) <= kExact, std::string(k.name) + " = " + fmt(got));
  }
  if (c.ok) c.detail = "6 cases exact";
  return c;
}

bool unique_leaves(const PredicateGraph& x) {
  std::set<std::string> keys;
  for (NodeId l : x.leaves()) keys.insert(exact_key(x.node(l)));
  return keys.size() == x.leaves().size();
}

// Both halves must agree with the exhaustive search: pairs where B is a
// local edit of A, and arbitrary pairs over a shared leaf pool.
Check oracle() {
  Check c;
  std::mt19937 rng(20240611);
  auto t0 = Clock::now();
  int counts[2] = {0, 0};
  int disagree[2] = {0, 0};
  std::string first[2];
  for (int half = 0; half < 2; ++half) {
    while (counts[half] < kOraclePairs) {
      auto [ea, eb] = half == 0 ? testing::random_edit_pair(rng, kOracleMaxLeaves - 1)
                                : testing::random_unrelated_pair(rng, kOracleMaxLeaves);
      PredicateGraph a = canonicalize(ea);
      PredicateGraph b = canonicalize(eb);
      if (a.leaves().size() > kOracleMaxLeaves || b.leaves().size() > kOracleMaxLeaves) continue;
      if (!unique_leaves(a) || !unique_leaves(b)) continue;
      double got = predicate_distance(a, b).d_pred;
      double want = testing::brute_force_distance(a, b, {}, true);
      if (std::abs(got - want) > kExact) {
        if (disagree[half]++ == 0) first[half] = fmt(got) + " vs oracle " + fmt(want);
      }
      ++counts[half];
    }
  }
  double secs = seconds_since(t0);
  const char* names[2] = {"edited", "arbitrary"};
  for (int half = 0; half < 2; ++half) {
    c.require(disagree[half] == 0, std::string(names[half]) + " pairs: " + std::to_string(disagree[half]) + "/" +
                                       std::to_string(counts[half]) + " differ from the exhaustive minimum (first " +
                                       first[half] + ")");
  }
  c.require(secs < kOracleSecondsLimit, "took " + fmt(secs) + " s");
  if (c.ok) c.detail = std::to_string(counts[0] + counts[1]) + " pairs equal the exhaustive minimum, " + fmt(secs) + " s";
  return c;
}

// Expressions over four atoms a..d, built with AND/OR/NOT.
RawExpr atom(int i) {
  static const char* names[] = {"a", "b", "c", "d"};
  return RawExpr::leaf(AtomicPredicate{names[i], Comparator::Eq, ValuePayload::literal("v", false)});
}

RawExpr random_expr(std::mt19937& rng, int budget) {
  if (budget <= 1 || rng() % 3 == 0) {
    RawExpr leaf = atom(static_cast<int>(rng() % 4));
    return rng() % 4 == 0 ? RawExpr::negate(leaf) : leaf;
  }
  int left = 1 + static_cast<int>(rng() % static_cast<unsigned>(budget - 1));
  std::vector<RawExpr> kids = {random_expr(rng, left), random_expr(rng, budget - left)};
  RawExpr e = RawExpr::op(rng() % 2 ? RawExpr::Kind::And : RawExpr::Kind::Or, std::move(kids));
  return rng() % 5 == 0 ? RawExpr::negate(e) : e;
}

// Every expression with up to `leaves` leaf occurrences (binary AND/OR,
// optional NOT on leaves and on the root of each binary node).
std::vector<RawExpr> all_exprs(int leaves) {
  std::vector<std::vector<RawExpr>> by(leaves + 1);
  for (int i = 0; i < 4; ++i) {
    by[1].push_back(atom(i));
    by[1].push_back(RawExpr::negate(atom(i)));
  }
  for (int n = 2; n <= leaves; ++n) {
    for (int l = 1; l < n; ++l) {
      for (const RawExpr& x : by[l]) {
        for (const RawExpr& y : by[n - l]) {
          for (auto k : {RawExpr::Kind::And, RawExpr::Kind::Or}) {
            RawExpr e = RawExpr::op(k, {x, y});
            by[n].push_back(e);
            by[n].push_back(RawExpr::negate(e));
          }
        }
      }
    }
  }
  std::vector<RawExpr> out;
  for (auto& v : by) out.insert(out.end(), v.begin(), v.end());
  return out;
}

Check canonicalization() {
  Check c;
  std::mt19937 rng(77);
  std::mt19937 shuffle_rng(78);
  for (int i = 0; i < kCanonGraphs; ++i) {
    RawExpr e = random_expr(rng, 2 + static_cast<int>(rng() % 9));
    PredicateGraph x = canonicalize(e);
    c.require(canonicalize(x.to_expr()) == x, "not idempotent at graph " + std::to_string(i));
    // operand permutation
    std::function<RawExpr(RawExpr)> permute = [&](RawExpr r) {
      for (auto& ch : r.children) ch = permute(ch);
      std::shuffle(r.children.begin(), r.children.end(), shuffle_rng);
      return r;
    };
    c.require(serialize_body(canonicalize(permute(e))) == serialize_body(x),
              "permutation changed graph " + std::to_string(i));
  }
  // soundness: equal canonical forms must be equivalent
  std::map<std::string, RawExpr> seen;
  std::size_t exprs = 0;
  auto check = [&](const RawExpr& e) {
    ++exprs;
    std::string key = serialize_body(canonicalize(e));
    auto [it, fresh] = seen.emplace(key, e);
    if (!fresh) c.require(testing::truth_equivalent(it->second, e), "canonical-equal but not equivalent");
    c.require(testing::truth_equivalent(canonicalize(e).to_expr(), e), "canonical form changes meaning");
  };
  for (const RawExpr& e : all_exprs(3)) check(e);
  for (int i = 0; i < 3000; ++i) check(random_expr(rng, 6));
  if (c.ok) {
    c.detail = std::to_string(kCanonGraphs) + " graphs idempotent and permutation-invariant; " + std::to_string(exprs) +
               " expressions over 4 atoms, " + std::to_string(seen.size()) + " classes, all sound";
  }
  return c;
}

Check mimikatz() {
  Check c;
  auto step = [&](const char* from, const char* to, double target, StructOp op, const char* name) {
    PredicateGraph a = testing::load_graph(std::string("mimikatz/") + from);
    PredicateGraph b = testing::load_graph(std::string("mimikatz/") + to);
    DistanceResult r = predicate_distance(a, b);
    StructuralOpSet ops = label_step(r.alignment, r.script, a, b, r.flips);
    double rel = std::abs(r.d_pred - target) / target;
    c.require(rel <= kMimikatzTolerance, std::string(name) + " d_pred " + fmt(r.d_pred) + " off by " + fmt(rel * 100) + "%");
    c.require(ops.has(op), std::string(name) + " lacks " + std::string(to_string(op)));
    const auto& bd = r.script.breakdown;
    return std::string(name) + " d=" + fmt(r.d_pred) + " (+" +
           std::to_string(bd.count[static_cast<std::size_t>(EditKind::PredInsert)]) + "/-" +
           std::to_string(bd.count[static_cast<std::size_t>(EditKind::PredDelete)]) + ")";
  };
  std::string x = step("v26.spl", "v27.spl", kMimikatzV27, StructOp::OrPlus, "v26->v27");
  std::string y = step("v30.spl", "v31.spl", kMimikatzV31, StructOp::OrMinus, "v30->v31");
  if (c.ok) c.detail = x + ", " + y;
  return c;
}

Lineage synthetic(const std::string& id, const std::vector<std::string>& texts, const std::vector<Timestamp>& times) {
  Lineage l;
  l.id = id;
  l.created_at = times.front();
  for (std::size_t i = 0; i < texts.size(); ++i) {
    RuleVersion v;
    v.commit = std::string(40, static_cast<char>('a' + i));
    v.time = times[i];
    v.text = texts[i];
    l.versions.push_back(v);
  }
  l.last_seen = l.snapshot_time = times.back();
  return l;
}

Check aba() {
  Check c;
  const std::string A = "index=x a=1 b=2", B = "index=x a=1 b=2 c=3";
  const Timestamp t = 1500000000, h = 3600;
  Lineage one = synthetic("one", {A, B, A}, {t, t + 5 * h, t + 12 * h});
  Lineage three = synthetic("three", {A, B, A, B, A}, {t, t + 2 * h, t + 3 * h, t + 50 * h, t + 98 * h});
  auto r1 = detect_aba(analyze_lineage(one));
  auto r3 = detect_aba(analyze_lineage(three));
  c.require(r1.size() == 1, std::to_string(r1.size()) + " triplets in A,B,A");
  c.require(r3.size() == 3, std::to_string(r3.size()) + " triplets in A,B,A,B,A");
  if (r1.size() == 1) c.require(r1[0].restore_hours == 7.0, "restore " + fmt(r1[0].restore_hours));
  const double want[] = {1.0, 47.0, 48.0};
  for (std::size_t i = 0; i < r3.size() && i < 3; ++i) {
    c.require(r3[i].restore_hours == want[i], "restore " + fmt(r3[i].restore_hours));
  }
  if (c.ok) c.detail = "1 and 3 triplets, restore hours 7 | 1, 47, 48";
  return c;
}

// The priority rules restated over label strings.
std::string straight_line(const std::vector<std::string>& labels) {
  std::size_t substantive = 0, mt = 0;
  std::vector<std::string> dir;
  for (const std::string& l : labels) {
    if (l == "IE") continue;
    ++substantive;
    if (l == "MT") ++mt;
    else dir.push_back(l);
  }
  if (substantive == 0) return "IE-only";
  if (substantive == 1) return "Singleton";
  if (2 * mt >= substantive) return "Coupled";
  bool ce = std::count(dir.begin(), dir.end(), "CE") > 0;
  bool fpr = std::count(dir.begin(), dir.end(), "FPR") > 0;
  if (!fpr) return "CE-only";
  if (!ce) return "FPR-only";
  int tau = 0;
  for (std::size_t i = 1; i < dir.size(); ++i) tau += dir[i] != dir[i - 1];
  return std::string(tau >= 2 ? "Oscillating" : "Phased") + " tau=" + std::to_string(tau);
}

std::string render(const std::optional<Trajectory>& t) {
  if (!t) return "none";
  if (t->cohort != Cohort::MultiRevision) return std::string(to_string(t->cohort));
  std::string s(to_string(t->cls));
  if (t->tau) s += " tau=" + std::to_string(*t->tau);
  return s;
}

Check trajectories() {
  Check c;
  using R = Rationale;
  struct Row {
    std::vector<R> seq;
    const char* want;
  };
  const Row rows[] = {
      {{R::CE, R::FPR, R::CE}, "Oscillating tau=2"},
      {{R::CE, R::CE, R::FPR, R::FPR}, "Phased tau=1"},
      {{R::MT, R::MT, R::CE}, "Coupled"},
      {{R::MT, R::CE, R::FPR, R::MT}, "Coupled"},
      {{R::CE, R::IE, R::CE}, "CE-only"},
      {{R::FPR, R::FPR}, "FPR-only"},
      {{R::IE, R::CE}, "Singleton"},
      {{R::IE}, "IE-only"},
  };
  for (const Row& r : rows) {
    std::string got = render(classify_trajectory(r.seq));
    c.require(got == r.want, std::string("expected ") + r.want + ", got " + got);
  }
  std::mt19937 rng(4242);
  for (int i = 0; i < kTrajectoryRandom; ++i) {
    std::vector<R> seq;
    std::vector<std::string> names;
    for (int n = 1 + static_cast<int>(rng() % 10); n > 0; --n) {
      R r = static_cast<R>(rng() % 4);
      seq.push_back(r);
      names.emplace_back(short_name(r));
    }
    std::string got = render(classify_trajectory(seq)), want = straight_line(names);
    c.require(got == want, "random sequence " + std::to_string(i) + ": " + got + " vs " + want);
  }
  if (c.ok) c.detail = "8 table rows + " + std::to_string(kTrajectoryRandom) + " random sequences agree";
  return c;
}

Check intent_replay() {
  Check c;
  auto ex = testing::template_example();
  IntentRecord rec = parse_intent_record(ex.output);
  c.require(rec.rationale == Rationale::MT && rec.direction == Direction::Mixed, "example is not MT/mixed");
  c.require(rec.predicate_added && rec.predicate_removed && rec.predicate_modified_present, "example flags not all set");
  c.require(validate_internal(rec).consistent, "example not internally consistent");

  testing::TempDir tmp;
  const std::string dir = tmp.str();
  std::vector<Lineage> ls = {
      synthetic("L1", {"index=x a=1 b=2", "index=x a=1 b=2 c=3", "index=x a=1 b=2"}, {1500000000, 1500086400, 1500172800}),
      synthetic("L2", {"index=y p=1 q=2", "index=y (p=1 OR p=5) q=2"}, {1500000000, 1501000000})};
  write_file(dir + "/lineages.jsonl", lineages_to_jsonl(ls));
  {
    testing::StubLabeler stub;
    stub.fallback = testing::make_response("narrower", "false_positive_reduction", false, false, true);
    stub.answers["L1:0..1"] = ex.output;
    intent_to_dir(ls, {}, stub, LabelerConfig{}, true, dir + "/live");
  }
  const std::string transcript = dir + "/live/transcript.jsonl";
  // an unreachable endpoint and no credential: any network use would fail
  unsetenv("PGIR_LLM_API_KEY");
  std::vector<std::string> common = {"--replay", transcript, "--llm-endpoint", "http://127.0.0.1:9/v1/chat/completions",
                                     "--llm-model", "none"};
  for (const char* out : {"/r1", "/r2"}) {
    std::vector<std::string> args = {"intent", dir + "/lineages.jsonl", "--out", dir + out};
    args.insert(args.end(), common.begin(), common.end());
    ProcessResult p = cli(args);
    c.require(p.status == 0, "pgir intent exit " + std::to_string(p.status) + ": " + p.err);
  }
  std::size_t files = 0;
  for (const char* f : {"intent.jsonl", "validation.csv", "trajectories.csv", "lineage_trajectories.csv", "gaps.csv"}) {
    std::string x = read_file(dir + "/r1/" + f), y = read_file(dir + "/r2/" + f);
    c.require(x == y, std::string(f) + " differs between replays");
    c.require(x == read_file(dir + "/live/" + f), std::string(f) + " differs from the recorded run");
    ++files;
  }
  c.require(!fs::exists(dir + "/r1/transcript.jsonl"), "replay wrote a transcript");
  std::istringstream lines(read_file(dir + "/r1/intent.jsonl"));
  std::string first;
  std::getline(lines, first);
  auto j = nlohmann::json::parse(first);
  c.require(j["pair_id"] == "L1:0..1" && j["record"]["rationale_label"] == "mixed_tradeoff" &&
                j["internal"] == "consistent",
            "replayed example record: " + first);
  if (c.ok) c.detail = "example MT/mixed/all flags/consistent; " + std::to_string(files) + " artifacts identical over 2 replays";
  return c;
}

Check end_to_end() {
  Check c;
  testing::FixtureRepo repo;
  testing::build_e2e_repo(repo);
  testing::TempDir tmp;
  const std::string out = tmp.str() + "/run";
  auto t0 = Clock::now();
  ProcessResult p = cli({"run", repo.path(), "--out", out, "--skip-intent"});
  double secs = seconds_since(t0);
  c.require(p.status == 0, "pgir run exit " + std::to_string(p.status) + ": " + p.err);
  if (!c.ok) return c;
  c.require(read_file(out + "/archetypes.csv") == testing::kE2EArchetypes, "archetypes.csv differs");
  c.require(read_file(out + "/patterns.csv") == testing::kE2EPatterns, "patterns.csv differs");
  c.require(read_file(out + "/aba.csv") == testing::kE2EAba, "aba.csv differs");
  c.require(secs < kE2ESecondsLimit, "took " + fmt(secs) + " s");
  auto m = nlohmann::json::parse(read_file(out + "/manifest.json"));
  if (c.ok) c.detail = std::to_string(m["files"].size()) + " artifacts, tables exact, " + fmt(secs) + " s";
  return c;
}

// Every table-shaped report is produced from any corpus, even an empty one.
Check report_shapes() {
  Check c;
  testing::TempDir tmp;
  std::map<std::string, std::string> headers = {
      {"archetypes.csv", "archetype,l0,l1_7,l8_plus,count,percent"},
      {"patterns.csv", "pattern,count,percent"},
      {"aba.csv", "metric,value"},
      {"cohort_matrix.csv", "cohort,cohort_size,lag,total_d_pred,mean_d_pred"},
      {"validation.csv", "metric,count,supported,percent"},
      {"trajectories.csv", "section,category,count,percent"},
      {"gaps.csv", "metric,count,value"},
  };
  auto check_dir = [&](const std::string& dir, const std::string& label) {
    for (const auto& [f, h] : headers) {
      std::string text = fs::exists(dir + "/" + f) ? read_file(dir + "/" + f) : "";
      c.require(text.rfind(h + "\n", 0) == 0, label + ": " + f + " missing or malformed");
    }
    auto s = nlohmann::json::parse(read_file(dir + "/summary.json"));
    for (const char* k : {"total_rules", "revision_steps", "predicate_changing_revisions", "prevalence", "timing",
                          "magnitude", "structural_operations"}) {
      c.require(s.contains(k), label + ": summary.json lacks " + k);
    }
  };
  // empty corpus
  testing::FixtureRepo empty;
  empty.write("README.md", "nothing here\n");
  empty.commit(1500000000);
  testing::StubLabeler none;
  RunConfig cfg;
  cfg.repos = {{empty.path(), "HEAD", ""}};
  cfg.output_dir = tmp.str() + "/empty";
  cfg.replay_transcript = tmp.str() + "/empty.jsonl";
  write_file(cfg.replay_transcript, "");
  run_pipeline(cfg);
  check_dir(cfg.output_dir, "empty corpus");
  // the fixture corpus
  testing::FixtureRepo repo;
  testing::build_e2e_repo(repo);
  std::vector<Lineage> ls = build_lineages(scan_repository(repo.path()));
  testing::StubLabeler stub;
  stub.fallback = testing::make_response("broader", "coverage_expansion", false, true, false);
  intent_to_dir(ls, {}, stub, LabelerConfig{}, true, tmp.str() + "/live");
  cfg.repos = {{repo.path(), "HEAD", ""}};
  cfg.output_dir = tmp.str() + "/fixture";
  cfg.replay_transcript = tmp.str() + "/live/transcript.jsonl";
  run_pipeline(cfg);
  check_dir(cfg.output_dir, "fixture corpus");
  if (c.ok) c.detail = "population figures are not targets; all report shapes emitted for empty and fixture corpora";
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> known;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--known-failure" && i + 1 < argc) {
      known.insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: pgir_acceptance [--known-failure N]...\n");
      return 64;
    }
  }
  struct Criterion {
    int id;
    const char* name;
    Check (*fn)();
  };
  const Criterion criteria[] = {
      {1, "reference pair alignment", reference_pair},
      {2, "cost weights", cost_weights},
      {3, "brute-force oracle", oracle},
      {4, "canonicalization properties", canonicalization},
      {5, "mimikatz desk-scale pairs", mimikatz},
      {6, "A-B-A detection", aba},
      {7, "trajectory classification", trajectories},
      {8, "intent replay determinism", intent_replay},
      {9, "end-to-end fixture repo", end_to_end},
      {10, "report shapes on any corpus", report_shapes},
  };
  int failed = 0;
  for (const Criterion& k : criteria) {
    Check r;
    try {
      r = k.fn();
    } catch (const std::exception& e) {
      r.ok = false;
      r.detail = std::string("exception: ") + e.what();
    }
    bool expected = known.count(k.id) > 0;
    failed += expected ? r.ok : !r.ok;
    std::printf("%s %2d %s: %s%s\n", r.ok ? "PASS" : "FAIL", k.id, k.name, r.detail.c_str(),
                expected ? (r.ok ? " (listed as a known failure; remove it)" : " (known failure)") : "");
    std::fflush(stdout);
  }
  return failed;
}
