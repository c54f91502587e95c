#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "clonekit/birkhoff.hpp"
#include "clonekit/structures.hpp"

using namespace clonekit;

namespace {

Algebra binary(int d, std::function<Value(Value, Value)> f) {
  return Algebra(d, {FiniteOperation::from_function(d, 2, [f](const Tuple& x) { return f(x[0], x[1]); })});
}
Algebra unary(int d, std::function<Value(Value)> f) {
  return Algebra(d, {FiniteOperation::from_function(d, 1, [f](const Tuple& x) { return f(x[0]); })});
}

}  // namespace

TEST_CASE("generated subuniverses") {
  auto meet3 = binary(3, [](Value a, Value b) { return std::min(a, b); });
  CHECK(generated_subuniverse(meet3, {0, 2}) == std::vector<int>{0, 2});
  CHECK(generated_subuniverse(meet3, {0, 1, 2}) == std::vector<int>{0, 1, 2});
  auto succ4 = unary(4, [](Value a) { return (a + 1) % 4; });
  CHECK(generated_subuniverse(succ4, {1}) == std::vector<int>{0, 1, 2, 3});
  auto s = generated_subuniverse(meet3, {2});
  CHECK(generated_subuniverse(meet3, s) == s);
}

TEST_CASE("congruences and quotients") {
  auto succ4 = unary(4, [](Value a) { return (a + 1) % 4; });
  CHECK(congruence_generated(succ4, {}) == identity_congruence(4));
  auto c = congruence_generated(succ4, {{0, 2}});
  CHECK(c.block == std::vector<int>{0, 1, 0, 1});
  auto q = quotient(succ4, c);
  CHECK(q.domain_size == 2);
  CHECK(find_isomorphism(q, unary(2, [](Value a) { return 1 - a; })).has_value());

  auto max2 = binary(2, [](Value a, Value b) { return std::max(a, b); });
  auto one = quotient(max2, congruence_generated(max2, {{0, 1}}));
  CHECK(one.domain_size == 1);

  Congruence bad{{0, 0, 1, 1}};
  try {
    quotient(succ4, bad);
    FAIL("expected a compatibility failure");
  } catch (const IncompatiblePartition& e) {
    CHECK(e.failure().slot == 0);
    CHECK_FALSE(bad.related(e.failure().out1, e.failure().out2));
  }
}

TEST_CASE("two-element join semilattice generates the three-chain") {
  auto max2 = binary(2, [](Value a, Value b) { return std::max(a, b); });
  auto chain3 = binary(3, [](Value a, Value b) { return std::max(a, b); });
  auto w = hsp_membership(chain3, max2);
  REQUIRE(w.has_value());
  CHECK(w->power == 2);
  CHECK(w->subuniverse == std::vector<Tuple>{{0, 0}, {0, 1}, {1, 1}});
  CHECK(verify_hsp_witness(chain3, max2, *w));
  CHECK(equational_inclusion(max2, chain3).holds);

  auto self = hsp_membership(max2, max2);
  REQUIRE(self.has_value());
  CHECK(self->power == 1);
}

TEST_CASE("xor does not generate max") {
  auto x = binary(2, [](Value a, Value b) { return a ^ b; });
  auto m = binary(2, [](Value a, Value b) { return std::max(a, b); });
  CHECK_FALSE(hsp_membership(m, x).has_value());
  auto inc = equational_inclusion(x, m);
  CHECK_FALSE(inc.holds);
  REQUIRE(inc.counterexample.has_value());
  CHECK(equation_to_string(*inc.counterexample, {"f"}) == "f(x1,x1) = f(x2,x2)");
  CHECK(equational_inclusion(x, x).holds);

  auto chain3 = binary(3, [](Value a, Value b) { return std::min(a, b); });
  auto chain2 = binary(2, [](Value a, Value b) { return std::min(a, b); });
  CHECK(equational_inclusion(chain3, chain2).holds);
  CHECK(hsp_membership(chain2, chain3).has_value());
}

TEST_CASE("tampered witnesses are rejected") {
  auto max2 = binary(2, [](Value a, Value b) { return std::max(a, b); });
  auto chain3 = binary(3, [](Value a, Value b) { return std::max(a, b); });
  auto w = *hsp_membership(chain3, max2);
  auto broken = w;
  std::swap(broken.iso[0], broken.iso[2]);
  CHECK_FALSE(verify_hsp_witness(chain3, max2, broken));
  broken = w;
  broken.subuniverse[1] = {1, 0};
  CHECK_FALSE(verify_hsp_witness(chain3, max2, broken));
}

TEST_CASE("finite range restriction") {
  std::set<Tuple> full;
  Tuple t(3, 0);
  do full.insert(t);
  while (next_tuple(t, 3));
  auto r = finite_range_restriction(full, 3, 3, true);
  CHECK(r.kernels_present.size() == 5);
  CHECK(r.kernel_dependent);
  CHECK(r.upward_closed);
  CHECK(*r.unary_closed);
  CHECK(r.filtration_sizes == std::vector<std::size_t>{3, 21, 27});

  std::set<Tuple> diag{{0, 0}, {1, 1}, {2, 2}};
  auto d = finite_range_restriction(diag, 3, 2, true);
  CHECK(d.kernels_present == std::vector<Kernel>{{0, 0}});
  CHECK(d.upward_closed);

  std::set<Tuple> split;
  for (const auto& u : full) {
    auto k = kernel_of(u);
    if (k == Kernel{0, 1, 2} || k == Kernel{0, 0, 0}) split.insert(u);
  }
  auto s = finite_range_restriction(split, 3, 3, false, {FiniteOperation(3, 1, {1, 2, 0})});
  CHECK(s.kernel_dependent);
  CHECK_FALSE(s.upward_closed);
  REQUIRE(s.upward_counterexample.has_value());
  CHECK(s.upward_counterexample->first == Kernel{0, 1, 2});
  CHECK(s.op_closure == std::vector<std::vector<bool>>{{true, true, true}});

  std::set<Tuple> odd{{0, 1}, {1, 0}, {0, 0}};
  auto o = finite_range_restriction(odd, 2, 2, false);
  CHECK_FALSE(o.kernel_dependent);
  CHECK(o.dependence_counterexample->first == Tuple{0, 0});
  CHECK(o.dependence_counterexample->second == Tuple{1, 1});
}

TEST_CASE("coordinate analysis on the path graph") {
  RelationalStructure path(3);
  path.add_relation("E", 2, {{0, 1}, {1, 0}, {1, 2}, {2, 1}});
  auto action = polymorphisms(path, 1).members;
  auto bin = polymorphisms(path, 2).members;
  action.insert(action.end(), bin.begin(), bin.end());
  std::vector<Tuple> pairs;
  Tuple t(2, 0);
  do pairs.push_back(t);
  while (next_tuple(t, 3));
  std::vector<int> first;
  for (const auto& p : pairs) first.push_back(p[0]);
  std::set<std::pair<Value, Value>> edges{{0, 1}, {1, 0}, {1, 2}, {2, 1}};
  auto r = coordinate_congruence_analysis(pairs, 3, normalize_partition(first), action, &edges);
  CHECK(r.failure.empty());
  REQUIRE(r.witness.has_value());
  CHECK(*r.witness == 0);
  CHECK(r.w_family == std::vector<std::vector<int>>{{0}, {0, 1}});
  CHECK(r.free_pairs.size() == 2);
  CHECK(r.free_non_edge_tuple.has_value());

  auto id = coordinate_congruence_analysis(pairs, 3, identity_congruence(9), action);
  CHECK(id.w_family == std::vector<std::vector<int>>{{0, 1}});
  CHECK(id.witness.has_value());

  auto all = coordinate_congruence_analysis(pairs, 3, Congruence{std::vector<int>(9, 0)}, action);
  CHECK(all.empty_in_w);
  CHECK_FALSE(all.witness.has_value());
  CHECK_FALSE(all.failure.empty());

  auto bad = coordinate_congruence_analysis(pairs, 3, normalize_partition({0, 0, 1, 2, 3, 4, 5, 6, 7}), action);
  CHECK_FALSE(bad.failure.empty());
}
