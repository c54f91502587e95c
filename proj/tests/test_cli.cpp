#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>

#include "clonekit/cli.hpp"

using namespace clonekit;

namespace {

std::string sample(const std::string& name) { return std::string(SAMPLES_DIR) + "/" + name; }

CliResult run(std::vector<std::string> args, const std::string& caps = "") { return run_cli(args, caps); }

std::size_t count(const Report& r, const std::string& kind) {
  std::size_t n = 0;
  for (const auto& x : r.records) n += x["record"] == kind;
  return n;
}

const Record& first(const Report& r, const std::string& kind) {
  for (const auto& x : r.records)
    if (x["record"] == kind) return x;
  FAIL("no record " << kind);
  return r.records.front();
}

std::string temp_file(const std::string& name, const std::string& text) {
  const std::string path = "/tmp/clonekit_test_" + name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("clone gen on NOT lists six members") {
  auto r = run({"clone", "gen", "--in", sample("nots.ops"), "--cap", "2"});
  CHECK(r.exit_code == 0);
  CHECK(count(r.report, "member") == 6);
  CHECK(first(r.report, "summary")["members"] == 6);
  CHECK(r.out.find("seed=1") != std::string::npos);
}

TEST_CASE("jep on triangle-free graphs fails with a counterexample") {
  auto r = run({"fraisse", "jep", "--spec", sample("triangle-free.age"), "--cap", "2", "--json"});
  CHECK(r.exit_code == 1);
  const auto& c = first(r.report, "counterexample");
  CHECK(c["domain_size"] == 2);
  CHECK(c["overlap"].empty());
  CHECK(Report::from_jsonl(r.out).to_jsonl() == r.out);
  CHECK(run({"fraisse", "jep", "--spec", "preset:graphs", "--cap", "2"}).exit_code == 0);
}

TEST_CASE("input errors exit 3 with a location") {
  auto bad = temp_file("bad.ops", "op 2 2\n0 1 1\n");
  auto r = run({"clone", "gen", "--in", bad, "--json"});
  CHECK(r.exit_code == 3);
  const auto& e = first(r.report, "error");
  CHECK(e["source"] == bad);
  CHECK(e["line"] == 2);
  CHECK(e["column"] == 6);
  CHECK(r.err.find(bad + ":2:6:") != std::string::npos);
  CHECK(Report::from_jsonl(r.out).verdict == Verdict::InputError);

  auto s = temp_file("bad.struct", "structure 2\nrel N 2\n0 5\n");
  CHECK(run({"struct", "pol", "--in", s}).exit_code == 3);
  CHECK(run({"clone", "gen", "--in", "/nonexistent/x.ops"}).exit_code == 3);
  CHECK(run({"clone", "gen"}).exit_code == 3);
  CHECK(run({"clone", "gen", "--in", sample("nots.ops"), "--cap", "9"}).exit_code == 3);
  CHECK(run({"clone", "frobnicate"}).exit_code == 3);
  CHECK(run({}).exit_code == 3);
  auto eq = run({"clone", "eq", "--in", sample("max2.ops"), "--eq", "f1(x1) = x1"});
  CHECK(eq.exit_code == 3);
  CHECK(first(eq.report, "error")["source"] == "--eq");
}

TEST_CASE("help exits 0") {
  auto r = run({"clone", "gen", "--help"});
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("--cap") != std::string::npos);
}

TEST_CASE("caps from the environment string, overridden by flags") {
  CHECK(count(run({"clone", "gen", "--in", sample("nots.ops")}, "cap=2").report, "member") == 6);
  CHECK(count(run({"clone", "gen", "--in", sample("nots.ops"), "--cap", "2"}, "cap=1").report, "member") == 6);
  CHECK(count(run({"clone", "gen", "--in", sample("nots.ops")}, "cap=1").report, "member") == 2);
  CHECK(run({"clone", "gen", "--in", sample("nots.ops")}, "seed=9,cap=1").report.seed == 9);
  CHECK(run({"clone", "gen", "--in", sample("nots.ops")}, "bogus=1").exit_code == 3);
  CHECK(run({"clone", "gen", "--in", sample("nots.ops")}, "cap").exit_code == 3);
  CHECK(run({"clone", "gen", "--in", sample("nots.ops")}, "cap=1,cap=2").exit_code == 3);
  CHECK(run({"clone", "gen", "--in", sample("nots.ops")}, "cap=99").exit_code == 3);
  CHECK(Caps::parse("").get("cap", 4) == 4);
}

TEST_CASE("same request and seed give the same report; the seed is recorded") {
  const std::vector<std::vector<std::string>> requests{
      {"fraisse", "build", "--spec", "preset:graphs", "--size", "40", "--dump"},
      {"bnf", "run-tu", "--steps", "100"},
      {"gate", "decompose", "--arity", "2"},
      {"gate", "graph-gate", "--dump"},
      {"monoid", "discont", "--pairs", "50"},
  };
  for (auto args : requests) {
    args.insert(args.end(), {"--seed", "4", "--json"});
    auto a = run(args), b = run(args);
    CHECK(a.out == b.out);
    CHECK(a.report.seed == 4);
    CHECK(Report::from_jsonl(a.out).to_jsonl() == a.out);
  }
  auto d1 = run({"fraisse", "build", "--spec", "preset:graphs", "--size", "40", "--seed", "1"});
  auto d2 = run({"fraisse", "build", "--spec", "preset:graphs", "--size", "40", "--seed", "2"});
  CHECK(first(d1.report, "limit")["digest"] != first(d2.report, "limit")["digest"]);
}

TEST_CASE("every subcommand dispatches with the expected verdict") {
  struct Case {
    std::vector<std::string> args;
    int exit;
  };
  const auto S = sample;
  const auto cg = temp_file("cg.struct", "structure 3\nrel S 2\n0 1\n1 0\n1 2\n2 1\nrel E 2\n0 1\n1 0\n1 2\n2 1\n");
  const auto fr = temp_file("fr.struct", "structure 3\nrel S 2\n0 0\n1 1\n2 2\n");
  const auto gs = temp_file("gs.ops", "op 2 1\n1 0\nop 2 1\n0 0\n");
  const auto bad_img = temp_file("bad_img.ops", "op 3 1\n2 0 1\nop 3 1\n0 0 2\n");
  const std::vector<Case> cases{
      {{"clone", "classify", "--in", S("nots.ops"), "--element", "1 0"}, 0},
      {{"clone", "classify", "--in", S("max2.ops"), "--element", "1 0"}, 1},
      {{"clone", "eq", "--in", S("max2.ops"), "--eq", "f1(x1,x2) = f1(x2,x1)"}, 0},
      {{"clone", "eq", "--in", S("max2.ops"), "--eq", "f1(x1,x2) = x1"}, 1},
      {{"clone", "hom", "--in", S("max2.ops"), "--images", S("min2.ops")}, 0},
      {{"clone", "hom", "--in", S("max2.ops"), "--images", S("proj2.ops")}, 1},
      {{"clone", "proj-hom", "--in", S("max2.ops")}, 1},
      {{"clone", "proj-hom", "--in", S("proj2.ops")}, 0},
      {{"top", "distance", "--f", S("max.eval"), "--g", S("proj.eval")}, 0},
      {{"top", "extend", "--target", S("prefix.eval"), "--precision", "4"}, 0},
      {{"top", "extend", "--target", S("prefix.eval"), "--precision", "40"}, 2},
      {{"struct", "pol", "--in", S("neq.struct")}, 0},
      {{"struct", "inv", "--in", S("nots.ops"), "--arity", "1"}, 0},
      {{"struct", "orbits", "--in", S("cycle3.ops"), "--n", "2"}, 0},
      {{"struct", "orbits", "--in", S("monoid-src.ops")}, 1},
      {{"struct", "transitive", "--in", S("cycle3.ops")}, 0},
      {{"struct", "transitive", "--in", S("max2.ops")}, 1},
      {{"struct", "pmap", "--f", S("max2.ops"), "--gs", gs}, 0},
      {{"struct", "openeq", "--in", S("nots-consts.ops"), "--args", "0 1", "--value", "1"}, 0},
      {{"alg", "sub", "--in", S("chain3.alg"), "--gens", "0 1"}, 0},
      {{"alg", "cong", "--in", S("chain3.alg"), "--pairs", "1 2"}, 0},
      {{"alg", "hsp", "--b", S("sl2.alg"), "--a", S("chain3.alg")}, 0},
      {{"alg", "hsp", "--b", S("z2.alg"), "--a", S("chain3.alg")}, 2},
      {{"alg", "eqinc", "--a", S("chain3.alg"), "--b", S("sl2.alg")}, 0},
      {{"alg", "eqinc", "--a", S("chain3.alg"), "--b", S("z2.alg")}, 1},
      {{"alg", "finrange", "--in", fr, "--unary"}, 0},
      {{"alg", "coordcong", "--in", cg, "--theta", "0 1 1 2"}, 0},
      {{"alg", "coordcong", "--in", cg, "--theta", "0 0 1 1"}, 1},
      {{"fraisse", "age", "--spec", S("graphs.age"), "--size", "3"}, 0},
      {{"fraisse", "amalg", "--spec", S("triangle-free.age")}, 0},
      {{"fraisse", "build", "--spec", "preset:graphs", "--size", "32", "--window", "16"}, 0},
      {{"fraisse", "rich", "--spec", "preset:graphs"}, 0},
      {{"fraisse", "jep", "--spec", "preset:tournaments"}, 0},
      {{"bnf", "run-extension", "--steps", "100"}, 0},
      {{"bnf", "run-tu", "--steps", "100"}, 0},
      {{"bnf", "recover", "--seed", "7"}, 0},
      {{"bnf", "recover", "--seed", "7", "--pairs", "0", "--window", "8"}, 2},
      {{"bnf", "recover3", "--seed", "14"}, 0},
      {{"bnf", "recover3", "--spec", S("triangle-free.age")}, 1},
      {{"gate", "horn-form", "--in", S("rank13.eval")}, 0},
      {{"gate", "horn-form", "--in", S("max.eval")}, 1},
      {{"gate", "horn-form", "--in", S("proj.eval"), "--width", "1"}, 2},
      {{"gate", "decompose", "--arity", "2"}, 0},
      {{"gate", "decompose", "--arity", "2", "--allow-u"}, 1},
      {{"gate", "decompose", "--arity", "1", "--endo"}, 0},
      {{"gate", "decompose", "--horn", S("rank13.eval")}, 0},
      {{"gate", "decompose", "--horn", S("max.eval")}, 1},
      {{"gate", "graph-gate", "--arity", "3"}, 0},
      {{"gate", "hf-split"}, 0},
      {{"monoid", "lift", "--source", S("monoid-src.ops"), "--images", S("monoid-img.ops")}, 0},
      {{"monoid", "lift", "--source", S("monoid-src.ops"), "--images", bad_img}, 1},
      {{"monoid", "discont", "--pairs", "100"}, 0},
  };
  std::set<std::string> covered;
  for (const auto& c : cases) {
    auto r = run(c.args);
    CHECK_MESSAGE(r.exit_code == c.exit, c.args[0] << " " << c.args[1] << ": " << r.out << r.err);
    covered.insert(c.args[0] + " " + c.args[1]);
  }
  covered.insert("clone gen");
  CHECK(covered.size() == 34);
}

TEST_CASE("subcommand details") {
  auto lift = run({"monoid", "lift", "--source", sample("monoid-src.ops"), "--images",
                   temp_file("bad_img2.ops", "op 3 1\n2 0 1\nop 3 1\n0 0 2\n")});
  // The 3-cycle conjugated, and the constant 0 sent to a non-constant idempotent.
  CHECK(lift.exit_code == 1);
  CHECK((count(lift.report, "constant-violation") + count(lift.report, "not-well-defined") +
         count(lift.report, "not-a-homomorphism")) == 1);

  auto nwd = run({"monoid", "lift", "--source", sample("cycle3.ops"), "--images", temp_file("nwd.ops", "op 2 1\n1 0\n")});
  CHECK(nwd.exit_code == 1);
  CHECK(count(nwd.report, "not-well-defined") == 1);

  auto d = run({"monoid", "discont", "--pairs", "100"});
  CHECK(first(d.report, "divergence")["index"] == 2);

  auto h = run({"gate", "horn-form", "--in", sample("rank13.eval")});
  CHECK(first(h.report, "form")["indices"] == Record::array({1, 3}));

  auto rec = run({"bnf", "recover", "--seed", "8"});
  const auto& x = first(rec.report, "recovery");
  CHECK(x["value"] == x["direct"]);

  auto x2 = run({"top", "extend", "--target", sample("prefix.eval"), "--precision", "6", "--swap", "0 1"});
  CHECK(first(x2.report, "values")["values"] == Record::array({0, 1, 2, 3, 4, 5}));
}
