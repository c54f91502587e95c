#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "clonekit/gates.hpp"

using namespace clonekit;

namespace {

// Injective k-ary map on a d-point domain with values spread over a larger range.
Evaluator random_injective_core(int k, int d, std::uint64_t seed) {
  std::size_t total = 1;
  for (int i = 0; i < k; ++i) total *= static_cast<std::size_t>(d);
  std::vector<Nat> vals(total * 3);
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(vals.begin(), vals.end(), rng);
  vals.resize(total);
  Evaluator e;
  e.arity = k;
  e.finite_domain = d;
  e.fn = [vals, d](const NatTuple& y) {
    std::size_t r = 0;
    for (Nat v : y) r = r * static_cast<std::size_t>(d) + v;
    return vals[r];
  };
  return e;
}

Evaluator from_parts(int n, const std::vector<int>& idx, const Evaluator& core) {
  Evaluator g;
  g.arity = n;
  g.finite_domain = core.finite_domain;
  g.fn = [idx, core](const NatTuple& x) {
    NatTuple y;
    for (int i : idx) y.push_back(x[static_cast<std::size_t>(i - 1)]);
    return core(y);
  };
  return g;
}

RichPartition graph_world(std::uint64_t seed) {
  RichPartition rp(AgeSpec::graphs(), {3, seed});
  rp.limit().ensure(12);
  rp.limit().saturate(8);
  return rp;
}

std::vector<int> eval_all(RandomPolymorphism& g, const std::vector<std::vector<int>>& support) {
  std::vector<int> v;
  for (const auto& p : support) v.push_back(g(p));
  return v;
}

bool E(const RichPartition& w, int x, int y) { return x != y && w.limit().rel("E", {x, y}); }

}  // namespace

TEST_CASE("horn form recovers a function with a dummy middle coordinate") {
  auto core = random_injective_core(2, 50, 11);
  auto g = from_parts(3, {1, 3}, core);
  auto r = horn_canonical_form(g, 50);
  REQUIRE(r.verdict == HornVerdict::EssentiallyInjective);
  CHECK(r.form->indices == std::vector<int>{1, 3});
  for (Nat a = 0; a < 50; a += 7)
    for (Nat b = 0; b < 50; b += 3) CHECK(r.form->core({a, b}) == core({a, b}));
}

TEST_CASE("horn form of a projection and of max") {
  auto pi = nat_evaluator(3, [](const NatTuple& x) { return x[1]; });
  auto r = horn_canonical_form(pi, 6);
  REQUIRE(r.verdict == HornVerdict::EssentiallyInjective);
  CHECK(r.form->indices == std::vector<int>{2});
  for (Nat a = 0; a < 20; ++a) CHECK(r.form->core({a}) == a);

  auto mx = table_evaluator(FiniteOperation::from_function(3, 2, [](const Tuple& x) { return std::max(x[0], x[1]); }));
  auto m = horn_canonical_form(mx, 3);
  REQUIRE(m.verdict == HornVerdict::Rejected);
  REQUIRE(!m.witness.empty());
  CHECK(mx(m.witness[0].first) == mx(m.witness[0].second));
  CHECK(witness_refutes_all(mx, m.witness));
}

TEST_CASE("horn form: constants, narrow probes, uniqueness") {
  auto c = nat_evaluator(2, [](const NatTuple&) { return Nat{4}; });
  auto r = horn_canonical_form(c, 4);
  REQUIRE(r.verdict == HornVerdict::Rejected);
  CHECK(witness_refutes_all(c, r.witness));

  auto g = from_parts(3, {2, 3}, random_injective_core(2, 50, 5));
  auto u = horn_canonical_form(g, 1);
  CHECK(u.verdict == HornVerdict::Undetermined);
  CHECK(u.candidates.size() == 7);

  auto small = horn_canonical_form(g, 4), big = horn_canonical_form(g, 12);
  REQUIRE(small.verdict == HornVerdict::EssentiallyInjective);
  REQUIRE(big.verdict == HornVerdict::EssentiallyInjective);
  CHECK(small.form->indices == big.form->indices);
  for (Nat a = 0; a < 4; ++a)
    for (Nat b = 0; b < 4; ++b) CHECK(small.form->core({a, b}) == big.form->core({a, b}));
}

TEST_CASE("horn form round trip and rejection on random inputs") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 4);
    std::vector<int> idx;
    while (idx.empty())
      for (int i = 1; i <= n; ++i)
        if (rng() % 2) idx.push_back(i);
    auto core = random_injective_core(static_cast<int>(idx.size()), 50, rng());
    auto g = from_parts(n, idx, core);
    auto r = horn_canonical_form(g, n <= 2 ? 50 : 8);
    REQUIRE(r.verdict == HornVerdict::EssentiallyInjective);
    CHECK(r.form->indices == idx);
  }
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 3);
    auto op = FiniteOperation::from_function(4, n, [&](const Tuple&) { return static_cast<Value>(rng() % 4); });
    auto g = table_evaluator(op);
    auto r = horn_canonical_form(g, 4);
    if (n == 1 && r.verdict == HornVerdict::EssentiallyInjective) continue;  // a random permutation
    REQUIRE(r.verdict == HornVerdict::Rejected);
    CHECK(witness_refutes_all(g, r.witness));
  }
}

TEST_CASE("horn gate decomposition") {
  auto gate = horn_gate(3, {1, 3});
  auto same = horn_gate_decompose(gate, gate, 200);
  REQUIRE(same.verified);
  for (Nat v = 0; v < 200; ++v) CHECK(same.alpha[v] == v);

  auto en = TupleEnumeration::countable(2);
  auto shifted = make_essentially_injective(
      3, {1, 3}, nat_evaluator(2, [en](const NatTuple& y) { return 3 * en.rank(y) + 1; }));
  auto d = horn_gate_decompose(shifted, gate, 200);
  REQUIRE(d.verified);
  for (Nat v = 0; v < 200; ++v) CHECK(d.alpha[v] == 3 * v + 1);

  CHECK_THROWS_AS(horn_gate_decompose(shifted, horn_gate(3, {1, 2}), 10), PieceMismatch);

  // Agreement on the first N core tuples carries over to alpha.
  const Nat N = 37;
  auto g1 = make_essentially_injective(3, {1, 3}, nat_evaluator(2, [en](const NatTuple& y) {
    return en.rank(y) * 2;
  }));
  auto g2 = make_essentially_injective(3, {1, 3}, nat_evaluator(2, [en, N](const NatTuple& y) {
    const Nat r = en.rank(y);
    return r < N ? r * 2 : r * 2 + 1;
  }));
  auto a1 = horn_gate_decompose(g1, gate, 100), a2 = horn_gate_decompose(g2, gate, 100);
  Nat agree = 0;
  while (agree < 100 && a1.alpha[agree] == a2.alpha[agree]) ++agree;
  CHECK(agree >= HornDecomposition::stability(N));
}

TEST_CASE("graph gates satisfy the axioms and probe as random graphs") {
  for (int n = 1; n <= 3; ++n) {
    auto b = build_graph_gate(n, 20 + static_cast<std::uint64_t>(n));
    const auto& g = *b.graph;
    CHECK(!g.check_axioms());
    CHECK(!g.extension_probe(GraphGate::Side::A, 6, 2));
    CHECK(!g.extension_probe(GraphGate::Side::B, 6, 2));
    CHECK(AgeSpec::graphs().admissible(g.side_structure(GraphGate::Side::A)));
    for (const auto& [u, v] : g.phi_table())
      for (int k = 1; k <= n; ++k) CHECK(g.psi(k, v) == u[static_cast<std::size_t>(k - 1)]);
  }
  CHECK_THROWS(build_graph_gate(4, 1));
  GateOptions endo;
  endo.injective = false;
  CHECK_NOTHROW(build_graph_gate(1, 3, endo));
  CHECK_THROWS(build_graph_gate(2, 3, endo));
}

TEST_CASE("phi respects forced edges") {
  GraphGate g([] {
    GateOptions o;
    o.arity = 1;
    o.eager_a = 0;
    return o;
  }());
  const int a = g.add_point(GraphGate::Side::A), b = g.add_point(GraphGate::Side::A, {{a, true}});
  const int pa = g.phi({a});
  CHECK_THROWS(g.phi({b}, {{pa, false}}));
  const int pb = g.phi({b});
  CHECK(g.edge(pa, pb));
  CHECK(!g.check_axioms());
}

TEST_CASE("graph gate decomposition of random injective polymorphisms") {
  for (int n = 1; n <= 2; ++n)
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      auto world = graph_world(seed);
      auto support = enumerated_support(world, n, 24);
      RandomPolymorphism g(world, {n, true, true, 0.0, seed * 7});
      auto values = eval_all(g, support);
      auto bundle = build_graph_gate(n, seed);
      auto d = gate_decompose_graph(world, support, values, bundle);
      REQUIRE(!d.violation);
      REQUIRE_MESSAGE(d.verified, d.failure);
      for (std::size_t i = 0; i < support.size(); ++i) {
        std::vector<int> u;
        for (int k = 0; k < n; ++k) u.push_back(d.beta[static_cast<std::size_t>(k)].at(support[i][static_cast<std::size_t>(k)]));
        auto b = d.gate->phi_built(u);
        REQUIRE(b);
        CHECK(d.alpha.at(*b) == values[i]);
      }
      for (int k = 0; k < n; ++k)
        for (const auto& [x, a] : d.beta[static_cast<std::size_t>(k)])
          for (const auto& [y, c] : d.beta[static_cast<std::size_t>(k)]) CHECK(E(*d.world, x, y) == d.gate->edge(a, c));
      bool off_range = false;
      for (const auto& [b, y] : d.alpha) off_range = off_range || d.world->in_u(y);
      CHECK(off_range);
    }
}

TEST_CASE("graph gate decomposition: stability and violations") {
  auto world = graph_world(9);
  auto support = enumerated_support(world, 2, 30);
  RandomPolymorphism g1(world, {2, true, true, 0.0, 1});
  auto v1 = eval_all(g1, support);
  RandomPolymorphism g2(world, {2, true, true, 0.0, 2});
  for (std::size_t i = 0; i < 10; ++i) g2.pin(support[i], v1[i]);
  auto v2 = eval_all(g2, support);
  CHECK(v1 != v2);
  auto bundle = build_graph_gate(2, 4);
  auto d1 = gate_decompose_graph(world, support, v1, bundle), d2 = gate_decompose_graph(world, support, v2, bundle);
  REQUIRE(d1.verified);
  REQUIRE(d2.verified);
  CHECK(decomposition_agreement(d1, d2, support) >= GraphDecomposition::stability(10));

  RandomPolymorphism raw(world, {2, true, false, 0.0, 5});
  auto vr = eval_all(raw, support);
  bool hits = false;
  for (int v : vr) hits = hits || world.in_u(v);
  REQUIRE(hits);
  auto bad = gate_decompose_graph(world, support, vr, bundle);
  REQUIRE(bad.violation);
  CHECK(bad.violation->what.find("lies in U") != std::string::npos);

  auto collide = v1;
  collide[3] = collide[5];
  auto c = gate_decompose_graph(world, support, collide, bundle);
  REQUIRE(c.violation);
  CHECK(c.violation->tuples.size() == 2);
}

TEST_CASE("endomorphism gate decomposes non-injective endomorphisms") {
  auto world = graph_world(5);
  auto support = enumerated_support(world, 1, 24);
  RandomPolymorphism g(world, {1, false, true, 0.5, 3});
  auto values = eval_all(g, support);
  std::set<int> distinct(values.begin(), values.end());
  CHECK(distinct.size() < values.size());
  GateOptions o;
  o.injective = false;
  auto d = gate_decompose_graph(world, support, values, build_graph_gate(1, 2, o));
  REQUIRE(!d.violation);
  CHECK_MESSAGE(d.verified, d.failure);
}

TEST_CASE("h o f splitting") {
  auto world = graph_world(4);
  auto support = enumerated_support(world, 2, 25);
  RandomPolymorphism g(world, {2, true, true, 0.0, 8});
  auto values = eval_all(g, support);
  auto s = hf_decompose(world, support, values);
  REQUIRE_MESSAGE(s.verified, s.failure);
  std::set<int> hv;
  for (int x : s.f) hv.insert(s.h.at(x));
  CHECK(hv.size() == support.size());

  auto empty = hf_decompose(world, {}, {});
  CHECK(empty.verified);
  CHECK(empty.f.empty());
  CHECK(empty.h.empty());
}

TEST_CASE("h o f separates what g identifies") {
  auto world = graph_world(6);
  auto support = enumerated_support(world, 1, 20);
  int a = -1, b = -1;
  for (int x = 0; x < 20 && a < 0; ++x)
    for (int y = x + 1; y < 20; ++y)
      if (!E(world, x, y)) {
        a = x, b = y;
        break;
      }
  REQUIRE(a >= 0);
  RandomPolymorphism g(world, {1, false, true, 0.0, 2});
  int v = 0;
  while (world.in_u(v)) ++v;
  g.pin({a}, v);
  g.pin({b}, v);
  auto values = eval_all(g, support);
  auto s = hf_decompose(world, support, values);
  REQUIRE_MESSAGE(s.verified, s.failure);
  const int fa = s.f[static_cast<std::size_t>(a)], fb = s.f[static_cast<std::size_t>(b)];
  CHECK(fa != fb);
  CHECK(s.h.at(fa) == v);
  CHECK(s.h.at(fb) == v);

  RandomPolymorphism g2(world, {1, false, true, 0.0, 9});
  for (std::size_t i = 0; i < 12; ++i) g2.pin(support[i], values[i]);
  auto values2 = eval_all(g2, support);
  auto s2 = hf_decompose(world, support, values2);
  REQUIRE(s2.verified);
  CHECK(hf_agreement(s, s2) >= HfDecomposition::stability(12));
}

TEST_CASE("left composition view") {
  auto mn = FiniteOperation::from_function(3, 2, [](const Tuple& x) { return std::min(x[0], x[1]); });
  GenerateOptions opt;
  opt.arity_cap = 2;
  auto clone = generate_clone({mn}, opt);

  auto id = e_compose_view(clone, FiniteOperation::projection(3, 1, 1));
  auto m = id.members(2);
  CHECK(std::set<FiniteOperation>(m.begin(), m.end()) ==
        std::set<FiniteOperation>(clone.members(2).begin(), clone.members(2).end()));

  auto perm = FiniteOperation(3, 1, {2, 0, 1});
  auto view = e_compose_view(clone, perm);
  std::set<FiniteOperation> oracle;
  for (int k = 1; k <= 2; ++k) oracle.insert(FiniteOperation::projection(3, 2, k));
  for (const auto& f : clone.members(2)) {
    std::vector<Value> t;
    for (Value x : f.table()) t.push_back(perm({x}));
    oracle.insert(FiniteOperation(3, 2, t));
  }
  std::size_t agree = 0, total = 0;
  Tuple table(9, 0);
  do {
    FiniteOperation g(3, 2, table);
    agree += view.contains(g) == (oracle.count(g) > 0);
    ++total;
  } while (next_tuple(table, 3));
  CHECK(agree == total);

  const auto& ms = clone.members(2);
  for (std::size_t i = 0; i < ms.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) CHECK(view.psi(ms[i]) != view.psi(ms[j]));

  try {
    e_compose_view(clone, FiniteOperation(3, 1, {1, 0, 1}));
    FAIL("expected a non-injective witness");
  } catch (const NotInjective& e) {
    CHECK(e.witness() == std::pair<Value, Value>{0, 2});
  }
  auto lazy = compose_left(nat_evaluator(1, [](const NatTuple& x) { return 2 * x[0]; }),
                           nat_evaluator(2, [](const NatTuple& x) { return x[0] + x[1]; }));
  CHECK(lazy({3, 4}) == 14);
  CHECK_THROWS_AS(compose_left(nat_evaluator(1, [](const NatTuple& x) { return x[0] / 2; }),
                               nat_evaluator(1, [](const NatTuple& x) { return x[0]; })),
                  NotInjective);
}
