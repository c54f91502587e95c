#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "clonekit/formats.hpp"
#include "clonekit/tuples.hpp"

using namespace clonekit;

namespace {

// Runs f, which must throw a ParseError, and returns it.
template <class F>
ParseError rejection(F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a ParseError");
  return ParseError("", 0, 0, "");
}

}  // namespace

TEST_CASE("op blocks") {
  auto ops = parse_ops("op 2 1\n1 0\n");
  REQUIRE(ops.size() == 1);
  CHECK(ops[0] == FiniteOperation(2, 1, {1, 0}));

  auto bundle = parse_ops("# two blocks\nop 2 1\n1 0\n\n\nop 3 2  # comment\n0 1 2 1 2 0 2 0 1\n");
  REQUIRE(bundle.size() == 2);
  CHECK(bundle[1]({1, 2}) == 0);

  auto short_table = rejection([] { parse_ops("op 2 2\n0 1 1\n", "t.ops"); });
  CHECK(short_table.line() == 2);
  CHECK(short_table.column() == 6);
  CHECK(short_table.message().find("d^arity = 4") != std::string::npos);

  auto long_table = rejection([] { parse_ops("op 2 1\n1 0 1\n"); });
  CHECK(long_table.line() == 2);
  CHECK(long_table.column() == 5);

  auto range = rejection([] { parse_ops("op 2 1\n1 2\n"); });
  CHECK(range.line() == 2);
  CHECK(range.column() == 3);

  CHECK(rejection([] { parse_ops("op 2 1\n\n1 0\n"); }).line() == 2);
  CHECK(rejection([] { parse_ops("op 2\n1 0\n"); }).column() == 5);
  CHECK(rejection([] { parse_ops("op 2 1 7\n1 0\n"); }).column() == 8);
  CHECK(rejection([] { parse_ops("op two 1\n1 0\n"); }).column() == 4);
  CHECK(rejection([] { parse_ops("op 0 1\n\n"); }).column() == 4);
  CHECK(rejection([] { parse_ops("op 2 1\n1 x\n"); }).column() == 3);
  CHECK(rejection([] { parse_ops("   \n# nothing\n"); }).message() == "no 'op' block");
  CHECK(rejection([] { parse_ops("rel R 2\n"); }).column() == 1);
}

TEST_CASE("structures") {
  auto s = parse_structure("structure 3\nrel R 2\n0 1\n1 2\nrel P 1\n2\n");
  CHECK(s.domain_size() == 3);
  CHECK(s.relation("R").tuples.size() == 2);
  CHECK(s.relation("P").tuples.count({2}));

  auto out = rejection([] { parse_structure("structure 2\nrel N 2\n0 1\n1 2\n", "n.struct"); });
  CHECK(out.line() == 4);
  CHECK(out.column() == 3);
  CHECK(out.source() == "n.struct");

  CHECK(rejection([] { parse_structure("structure 2\nrel N 2\n0 1\n0 1\n"); }).line() == 4);
  CHECK(rejection([] { parse_structure("structure 2\nrel N 2\n0\n"); }).column() == 2);
  CHECK(rejection([] { parse_structure("structure 2\nrel N 2\n0 1 1\n"); }).column() == 5);
  CHECK(rejection([] { parse_structure("structure 2\n0 1\n"); }).line() == 2);
  CHECK(rejection([] { parse_structure("structure 2\nrel N 2\nrel N 1\n"); }).line() == 3);
  CHECK(rejection([] { parse_structure("structure 2\nrel 9x 2\n"); }).column() == 5);
  CHECK(rejection([] { parse_structure("structure 2\nrel N 2\n0 1\n\n1 0\n"); }).line() == 5);
}

TEST_CASE("algebras") {
  auto a = parse_algebra("algebra 2 2\nop 2 2\n0 1 1 1\n\nop 2 1\n1 0\n");
  CHECK(a.domain_size == 2);
  CHECK(a.ops.size() == 2);
  CHECK(rejection([] { parse_algebra("algebra 2 2\nop 2 2\n0 1 1 1\n"); }).message().find("declares 2 slots") !=
        std::string::npos);
  CHECK(rejection([] { parse_algebra("algebra 2 1\nop 3 1\n0 1 2\n"); }).column() == 4);
  CHECK(rejection([] { parse_algebra("algebra 2 1\nop 2 1\n0 1\nop 2 1\n0 1\n"); }).line() == 4);
  CHECK(rejection([] { parse_algebra("op 2 1\n0 1\n"); }).line() == 1);
}

TEST_CASE("ages") {
  const std::string tri = "rel E 2 sym irrefl\n\nstructure 3\nrel E 2\n0 1\n0 2\n1 2\n";
  auto spec = parse_age(tri);
  REQUIRE(spec.signature.size() == 1);
  CHECK(spec.signature[0].symmetric);
  CHECK(spec.signature[0].irreflexive);
  REQUIRE(spec.forbidden.size() == 1);
  auto preset = AgeSpec::k3_free_graphs();
  for (int n = 0; n <= 4; ++n) CHECK(enumerate_age(spec, n).size() == enumerate_age(preset, n).size());
  CHECK(parse_age(format_age(spec)).forbidden[0] == spec.forbidden[0]);
  CHECK(format_age(parse_age(format_age(preset))) == format_age(preset));

  CHECK(rejection([] { parse_age("rel E 2 sym irrefl\n\nstructure 1\nrel E 2\n0 0\n"); }).line() == 5);
  CHECK(rejection([] { parse_age("rel E 2 sym\n\nstructure 2\nrel E 2\n0 1\n1 0\n"); }).line() == 6);
  CHECK(rejection([] { parse_age("rel E 3\n"); }).column() == 7);
  CHECK(rejection([] { parse_age("rel P 1 sym\n"); }).column() == 9);
  CHECK(rejection([] { parse_age("rel E 2 odd\n"); }).column() == 9);
  CHECK(rejection([] { parse_age("rel E 2\n\nstructure 2\nrel F 2\n"); }).line() == 4);
  CHECK(rejection([] { parse_age("rel E 2\n\nstructure 2\nrel E 1\n"); }).line() == 4);
  CHECK(rejection([] { parse_age("rel E 2\n\nstructure 2\nrel E 2\n\nrel F 2\n"); }).line() == 6);
  CHECK(rejection([] { parse_age("structure 2\n"); }).line() == 1);
  CHECK(rejection([] { load_age("preset:nope"); }).message().find("unknown preset") != std::string::npos);
  CHECK(enumerate_age(load_age("preset:tournaments"), 3).size() == 2);
}

TEST_CASE("format writers round-trip random values") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<FiniteOperation> ops;
    const int d = 1 + static_cast<int>(rng() % 12);
    for (int k = 0, m = 1 + static_cast<int>(rng() % 3); k < m; ++k) {
      const int n = 1 + static_cast<int>(rng() % 3);
      std::vector<Value> t(tuple_count(d, n));
      for (auto& v : t) v = static_cast<Value>(rng() % static_cast<std::uint64_t>(d));
      ops.emplace_back(d, n, t);
    }
    CHECK(parse_ops(format_ops(ops)) == ops);
    auto a = parse_algebra(format_algebra(Algebra(d, ops)));
    CHECK(a.ops == ops);

    RelationalStructure s(d);
    for (int r = 0, m = static_cast<int>(rng() % 3); r < m; ++r) {
      const int arity = 1 + static_cast<int>(rng() % 3);
      std::vector<Tuple> tuples;
      for (int k = 0, c = static_cast<int>(rng() % 6); k < c; ++k) {
        Tuple t(static_cast<std::size_t>(arity));
        for (auto& v : t) v = static_cast<Value>(rng() % static_cast<std::uint64_t>(d));
        tuples.push_back(t);
      }
      s.add_relation("R" + std::to_string(r), arity, tuples);
    }
    CHECK(format_structure(parse_structure(format_structure(s))) == format_structure(s));
  }
}

TEST_CASE("evaluator scripts") {
  auto evs = parse_evaluator_script("lazy rank 3 1 3\nop 2 1\n1 0\nlazy affine 2 3 1 2\nlazy swap 4 5\nlazy shift 2\n");
  REQUIRE(evs.size() == 5);
  const auto en = TupleEnumeration::countable(2);
  CHECK(evs[0].description == "lazy rank 3 1 3");
  CHECK(evs[0].evaluator({4, 9, 7}) == en.rank({4, 7}));
  CHECK(evs[1].evaluator.finite_domain == 2);
  CHECK(evs[1].evaluator({0}) == 1);
  CHECK(evs[2].evaluator({5, 6}) == 3 * TupleEnumeration::countable(1).rank({6}) + 1);
  CHECK(evs[3].evaluator({4}) == 5);
  CHECK(evs[3].evaluator({7}) == 7);
  CHECK(evs[4].evaluator({7}) == 9);
  auto m = parse_evaluator_script("lazy max 3\nlazy min 2\nlazy sum 2\nlazy constant 2 5\nlazy projection 3 2\n");
  CHECK(m[0].evaluator({1, 7, 3}) == 7);
  CHECK(m[1].evaluator({4, 2}) == 2);
  CHECK(m[2].evaluator({4, 2}) == 6);
  CHECK(m[3].evaluator({4, 2}) == 5);
  CHECK(m[4].evaluator({4, 2, 1}) == 2);

  CHECK(rejection([] { parse_evaluator_script("lazy spin 2\n"); }).column() == 6);
  CHECK(rejection([] { parse_evaluator_script("lazy rank 3 3 1\n"); }).column() == 15);
  CHECK(rejection([] { parse_evaluator_script("lazy rank 3 4\n"); }).column() == 13);
  CHECK(rejection([] { parse_evaluator_script("lazy rank 3\n"); }).column() == 12);
  CHECK(rejection([] { parse_evaluator_script("lazy projection 2 3\n"); }).column() == 19);
  CHECK(rejection([] { parse_evaluator_script("lazy max 2 1\n"); }).column() == 12);
  CHECK(rejection([] { parse_evaluator_script("lazy affine 2 0 1 1\n"); }).column() == 15);
  CHECK(rejection([] { parse_evaluator_script("table 2\n"); }).column() == 1);
  CHECK(rejection([] { parse_evaluator_script("\n"); }).message() == "no evaluator declared");
}

TEST_CASE("terms and equations") {
  const std::vector<int> ar{2, 1};
  auto t = parse_term("f1(x1, f2(x3))", ar);
  CHECK(term_to_string(t, generator_names(2)) == "f1(x1,f2(x3))");
  auto e = parse_equation(" f1(x1,x2) = f1( x2 , x1 ) ", ar);
  CHECK(e.arity == 2);
  CHECK(parse_equation("x1 = x1", ar, 3).arity == 3);

  CHECK(rejection([&] { parse_term("f3(x1)", ar); }).column() == 1);
  CHECK(rejection([&] { parse_term("f1(x1)", ar); }).message().find("takes 2 arguments") != std::string::npos);
  CHECK(rejection([&] { parse_term("f1(x1,x0)", ar); }).column() == 8);
  CHECK(rejection([&] { parse_term("f1(x1 x2)", ar); }).column() == 7);
  CHECK(rejection([&] { parse_term("y1", ar); }).column() == 1);
  CHECK(rejection([&] { parse_term("f2 x1", ar); }).column() == 4);
  CHECK(rejection([&] { parse_equation("x1 = x2 x3", ar); }).column() == 9);
  CHECK(rejection([&] { parse_equation("x1 x2", ar); }).column() == 4);

  CHECK(parse_int_list("1 2\n3", 0, 5, "l") == std::vector<int>{1, 2, 3});
  CHECK(rejection([] { parse_int_list("1 9", 0, 5, "l"); }).column() == 3);
}

TEST_CASE("reports round-trip bit-exact") {
  Report r;
  r.command = "clone gen";
  r.seed = 18446744073709551615ULL;
  auto& m = r.add("member");
  m["op"] = "2/1:10";
  m["term"] = "f1(x1)";
  m["nested"] = Record::array({Record::array({1, 2}), nullptr, true, "é\t\"q\""});
  r.add("empty");
  r.verdict = Verdict::Undetermined;
  const auto text = r.to_jsonl();
  CHECK(text.find("{\"schema\":\"clonekit.report/1\",\"command\":\"clone gen\",\"seed\":18446744073709551615}\n") == 0);
  auto back = Report::from_jsonl(text);
  CHECK(back.to_jsonl() == text);
  CHECK(back.verdict == Verdict::Undetermined);
  CHECK(back.records.size() == 2);
  CHECK(back == r);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    Report x;
    x.command = "cmd " + std::to_string(rng() % 100);
    x.seed = rng();
    x.verdict = static_cast<Verdict>(rng() % 4);
    for (int k = 0, n = static_cast<int>(rng() % 5); k < n; ++k) {
      auto& rec = x.add("r" + std::to_string(k));
      for (int f = 0, c = static_cast<int>(rng() % 4); f < c; ++f) {
        const auto key = "z" + std::to_string(rng() % 50);
        switch (rng() % 4) {
          case 0: rec[key] = static_cast<std::int64_t>(rng()) / 7; break;
          case 1: rec[key] = std::string(1 + rng() % 5, static_cast<char>('a' + rng() % 26)); break;
          case 2: rec[key] = Record::array({rng() % 9, rng() % 9}); break;
          default: rec[key] = nullptr;
        }
      }
    }
    const auto s = x.to_jsonl();
    CHECK(Report::from_jsonl(s).to_jsonl() == s);
  }

  CHECK_THROWS_AS(Report::from_jsonl(text.substr(0, text.size() - 1)), ParseError);
  std::string spaced = text;
  spaced.insert(1, " ");
  CHECK(rejection([&] { Report::from_jsonl(spaced); }).line() == 1);
  const auto first_nl = text.find('\n');
  CHECK_THROWS_AS(Report::from_jsonl(text.substr(0, first_nl + 1)), ParseError);
  std::string wrong_exit = text;
  wrong_exit.replace(wrong_exit.rfind("\"exit\":2"), 8, "\"exit\":1");
  CHECK(rejection([&] { Report::from_jsonl(wrong_exit); }).line() == 4);
  const std::string swapped = "{\"command\":\"x\",\"schema\":\"clonekit.report/1\",\"seed\":1}\n"
                              "{\"record\":\"verdict\",\"verdict\":\"true\",\"exit\":0}\n";
  CHECK(rejection([&] { Report::from_jsonl(swapped); }).line() == 1);
  const std::string early = "{\"schema\":\"clonekit.report/1\",\"command\":\"x\",\"seed\":1}\n"
                            "{\"record\":\"verdict\",\"verdict\":\"true\",\"exit\":0}\n"
                            "{\"record\":\"verdict\",\"verdict\":\"true\",\"exit\":0}\n";
  CHECK(rejection([&] { Report::from_jsonl(early); }).line() == 2);
  const std::string no_kind = "{\"schema\":\"clonekit.report/1\",\"command\":\"x\",\"seed\":1}\n"
                              "{\"value\":1,\"record\":\"a\"}\n"
                              "{\"record\":\"verdict\",\"verdict\":\"true\",\"exit\":0}\n";
  CHECK(rejection([&] { Report::from_jsonl(no_kind); }).line() == 2);
}
