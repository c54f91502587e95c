#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "clonekit/fraisse.hpp"

using namespace clonekit;

namespace {

bool isomorphic(const FiniteStructure& a, const FiniteStructure& b) {
  if (a.size() != b.size()) return false;
  std::vector<int> perm(static_cast<std::size_t>(a.size()));
  std::iota(perm.begin(), perm.end(), 0);
  do
    if (a.relabel(perm).code() == b.code()) return true;
  while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

FiniteStructure random_graph(int n, std::mt19937& rng) {
  FiniteStructure g(AgeSpec::graphs().signature, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng() & 1) g.set(0, {i, j}, true);
  return g;
}

// Every pattern over every subset of the window (size <= cap) has a witness outside the subset among n points.
template <class Adj>
bool graph_extension_oracle(const Adj& adj, int n, int window, int cap) {
  for (int s = 0; s <= cap; ++s) {
    std::vector<int> sub(static_cast<std::size_t>(s));
    std::function<bool(int, int)> rec = [&](int idx, int from) -> bool {
      if (idx == s) {
        for (unsigned pat = 0; pat < (1u << s); ++pat) {
          bool found = false;
          for (int q = 0; q < n && !found; ++q) {
            if (std::find(sub.begin(), sub.end(), q) != sub.end()) continue;
            bool ok = true;
            for (int i = 0; i < s && ok; ++i) ok = adj(q, sub[static_cast<std::size_t>(i)]) == bool((pat >> i) & 1);
            found = ok;
          }
          if (!found) return false;
        }
        return true;
      }
      for (int p = from; p < window; ++p) {
        sub[static_cast<std::size_t>(idx)] = p;
        if (!rec(idx + 1, p + 1)) return false;
      }
      return true;
    };
    if (!rec(0, 0)) return false;
  }
  return true;
}

AgeSpec matchings() {
  AgeSpec s = AgeSpec::graphs();
  FiniteStructure p3(s.signature, 3), k3(s.signature, 3);
  p3.set(0, {0, 1}, true);
  p3.set(0, {1, 2}, true);
  k3 = p3;
  k3.set(0, {0, 2}, true);
  s.forbidden = {p3, k3};
  return s;
}

}  // namespace

TEST_CASE("age sizes match known isomorphism counts") {
  std::vector<std::size_t> graphs{1, 1, 2, 4, 11, 34};
  for (int n = 0; n < 6; ++n) CHECK(enumerate_age(AgeSpec::graphs(), n).size() == graphs[static_cast<std::size_t>(n)]);
  std::vector<std::size_t> tournaments{1, 1, 1, 2, 4, 12};
  for (int n = 0; n < 6; ++n)
    CHECK(enumerate_age(AgeSpec::tournaments(), n).size() == tournaments[static_cast<std::size_t>(n)]);
  CHECK(enumerate_age(AgeSpec::k3_free_graphs(), 3).size() == 3);
  CHECK(enumerate_age(AgeSpec::k3_free_graphs(), 4).size() == 7);
  for (int n = 0; n < 5; ++n) CHECK(enumerate_age(AgeSpec::linear_orders(), n).size() == 1);
  CHECK_THROWS_AS(enumerate_age(AgeSpec::graphs(), 7), AgeCapExceeded);
}

TEST_CASE("age representatives are pairwise non-isomorphic and cover random graphs") {
  auto reps = enumerate_age(AgeSpec::graphs(), 4);
  for (std::size_t i = 0; i < reps.size(); ++i)
    for (std::size_t j = i + 1; j < reps.size(); ++j) CHECK_FALSE(isomorphic(reps[i], reps[j]));
  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = random_graph(4, rng);
    CHECK(std::any_of(reps.begin(), reps.end(), [&](const FiniteStructure& r) { return isomorphic(g, r); }));
  }
}

TEST_CASE("canonical form is an isomorphism invariant") {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = random_graph(5, rng);
    std::vector<int> perm{0, 1, 2, 3, 4};
    std::shuffle(perm.begin(), perm.end(), rng);
    auto a = canonical_form(g), b = canonical_form(g.relabel(perm));
    CHECK(a.code == b.code);
    CHECK(g.relabel(a.perm).code() == a.rep.code());
  }
}

TEST_CASE("admissibility uses induced substructures") {
  auto spec = AgeSpec::k3_free_graphs();
  FiniteStructure c4(spec.signature, 4);
  for (int i = 0; i < 4; ++i) c4.set(0, {i, (i + 1) % 4}, true);
  CHECK(spec.admissible(c4));
  c4.set(0, {0, 2}, true);
  CHECK_FALSE(spec.admissible(c4));
  CHECK(spec.admissible_containing(c4, {3}) == false);  // 3 sits on triangle 0-2-3
  CHECK(spec.admissible_containing(c4, {1, 3}));
  FiniteStructure bad(AgeSpec::tournaments().signature, 2);
  CHECK_FALSE(AgeSpec::tournaments().admissible(bad));
}

TEST_CASE("amalgamation verdicts") {
  for (bool strong : {true, false}) {
    CHECK(check_amalgamation(AgeSpec::graphs(), 5, strong).verdict);
    CHECK(check_amalgamation(AgeSpec::tournaments(), 5, strong).verdict);
    CHECK(check_amalgamation(AgeSpec::linear_orders(), 5, strong).verdict);
    CHECK(check_amalgamation(AgeSpec::k3_free_graphs(), 5, strong).verdict);
  }
  // Graphs of maximum degree one amalgamate only by gluing the two new points.
  CHECK(check_amalgamation(matchings(), 5, false).verdict);
  auto r = check_amalgamation(matchings(), 5, true);
  REQUIRE_FALSE(r.verdict);
  REQUIRE(r.counterexample);
  CHECK(r.counterexample->base.size() == 1);
  CHECK(r.counterexample->left == r.counterexample->right);
  CHECK(r.counterexample->left == std::vector<std::int8_t>{1});
}

TEST_CASE("lazy limit realizes tournament types and refuses inadmissible ones") {
  LazyLimit t(AgeSpec::tournaments(), {3, 5});
  t.ensure(2);
  int p1 = 0, p2 = 1;
  OnePointType ty = t.blank_type({p1, p2});
  // pair facts per base point: E(x,b), E(b,x)
  ty.facts = {1, 0, 0, 1};
  int x = t.realize(ty);
  CHECK(t.rel("E", {x, p1}));
  CHECK(t.rel("E", {p2, x}));
  CHECK_FALSE(t.rel("E", {p1, x}));
  ty.facts = {1, 1, 0, 1};
  CHECK_THROWS_AS(t.realize(ty), InadmissibleType);

  LazyLimit k(AgeSpec::k3_free_graphs(), {3, 5});
  k.ensure(40);
  int a = -1, b = -1;
  for (int i = 0; i < k.size() && a < 0; ++i)
    for (int j = i + 1; j < k.size(); ++j)
      if (k.rel("E", {i, j})) {
        a = i;
        b = j;
        break;
      }
  REQUIRE(a >= 0);
  OnePointType both = k.blank_type({a, b});
  both.facts = {1, 1};
  CHECK_THROWS_AS(k.realize(both), InadmissibleType);
  CHECK_FALSE(k.find_realizer(both).has_value());
}

TEST_CASE("built structures stay inside the age") {
  for (auto spec : {AgeSpec::k3_free_graphs(), AgeSpec::linear_orders(), AgeSpec::tournaments()}) {
    LazyLimit l(spec, {3, 11});
    l.ensure(30);
    std::vector<int> all(static_cast<std::size_t>(l.size()));
    std::iota(all.begin(), all.end(), 0);
    CHECK(spec.admissible(l.induced(all)));
  }
}

TEST_CASE("seeded limits are byte-identical and seeds matter") {
  LazyLimit a(AgeSpec::graphs(), {3, 42}), b(AgeSpec::graphs(), {3, 42}), c(AgeSpec::graphs(), {3, 43});
  a.saturate(20);
  b.saturate(20);
  c.saturate(20);
  CHECK(a.serialize() == b.serialize());
  CHECK(a.serialize() != c.serialize());
}

TEST_CASE("extension property after saturation agrees with a brute-force oracle") {
  LazyLimit g(AgeSpec::graphs(), {3, 7});
  g.saturate(16);
  auto adj = [&](int i, int j) { return g.rel("E", {i, j}); };
  CHECK(graph_extension_oracle(adj, g.size(), 16, 3));
  CHECK_FALSE(check_extension_property(g, 16, 3).has_value());

  // The oracle itself: the closed-form random graph has all patterns over {0..4} below 64, the empty graph has none.
  auto rado = [](int i, int j) { return rado_adjacent(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)); };
  CHECK(graph_extension_oracle(rado, 64, 5, 3));
  CHECK_FALSE(graph_extension_oracle([](int, int) { return false; }, 64, 5, 1));

  LazyLimit fresh(AgeSpec::graphs(), {3, 7});
  fresh.ensure(3);
  auto fail = check_extension_property(fresh, 3, 3);
  CHECK(fail.has_value());
}

TEST_CASE("rich partition: one built point leaves the other side not yet witnessed") {
  RichPartition rp(AgeSpec::graphs(), {3, 1});
  rp.limit().add_free_point();
  bool side = rp.in_u(0);
  CHECK(rp.is_rich_upto(side, 1, 1).verdict == RichVerdict::Witnessed);
  auto r = rp.is_rich_upto(!side, 1, 1);
  CHECK(r.verdict == RichVerdict::NotYetWitnessed);
  REQUIRE(r.failing);
  CHECK(r.failing->moved == 0);
}

TEST_CASE("rich partition witnesses both sides after saturation") {
  RichPartition rp(AgeSpec::graphs(), {3, 4});
  rp.limit().saturate(10);
  for (bool side : {true, false}) {
    auto r = rp.is_rich_upto(side, 3, 10);
    CHECK(r.verdict == RichVerdict::Witnessed);
    CHECK(r.demands_checked > 0);
  }
  // independent check of one demand family: every point has a same-side twin with its adjacency to any other point
  const auto& l = rp.limit();
  int e = l.relation_index("E");
  for (int p = 0; p < 10; ++p)
    for (int o = 0; o < 10; ++o) {
      if (o == p) continue;
      for (bool side : {true, false}) {
        bool found = false;
        for (int q = 0; q < l.size() && !found; ++q)
          found = q != o && rp.in_u(q) == side && l.holds(e, q, o) == l.holds(e, p, o);
        CHECK(found);
      }
    }
}

TEST_CASE("joint extension") {
  CHECK(joint_extension_upto(AgeSpec::graphs(), 2).verdict);
  CHECK(joint_extension_upto(AgeSpec::tournaments(), 2).verdict);
  auto r = joint_extension_upto(AgeSpec::k3_free_graphs(), 2);
  REQUIRE_FALSE(r.verdict);
  REQUIRE(r.counterexample);
  const auto& ce = *r.counterexample;
  CHECK(ce.domain.size() == 2);  // one domain point plus u
  CHECK(ce.overlap.empty());
  CHECK(ce.domain.holds(0, {0, 1}));
  CHECK(ce.images.holds(0, {0, ce.second_copy[0]}));
  REQUIRE(ce.limit);
  auto& l = *ce.limit;
  REQUIRE(ce.limit_first.size() == 1);
  CHECK(l.rel("E", {ce.limit_u, ce.limit_domain[0]}));
  CHECK(l.rel("E", {ce.limit_first[0], ce.limit_second[0]}));
  OnePointType w = l.blank_type({ce.limit_first[0], ce.limit_second[0]});
  w.facts = {1, 1};
  CHECK_THROWS_AS(l.realize(w), InadmissibleType);
}
