#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "clonekit/back_and_forth.hpp"

using namespace clonekit;

namespace {

EmbeddingOracle graph_oracle(std::uint64_t seed) {
  RichPartition rp(AgeSpec::graphs(), {3, seed});
  rp.limit().saturate(8);
  return EmbeddingOracle(std::move(rp));
}

std::vector<int> first(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}

int pick_u(EmbeddingOracle& o, int window, int start = 0) {
  for (int u = start;; ++u)
    if (o.f(u) < window) return u;
}

// alpha f beta = f, evaluated pointwise on Dom(beta).
void check_afb(EmbeddingOracle& o, const PartialIso& alpha, const PartialIso& beta) {
  for (int x : beta.domain()) {
    auto v = alpha.find(o.f(beta.at(x)));
    REQUIRE(v.has_value());
    CHECK(*v == o.f(x));
  }
}

}  // namespace

TEST_CASE("the oracle's f is an embedding into U") {
  auto o = graph_oracle(2);
  for (int x = 0; x < 30; ++x) o.f(x);
  for (int y = 0; y < 30; ++y)
    if (o.in_image(y)) CHECK(o.f(o.f_inverse(y)) == y);
  const auto& g = o.graph();
  const auto& l = o.limit();
  const int e = l.relation_index("E");
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(o.in_image(g.image()[i]));
    for (std::size_t j = 0; j < g.size(); ++j)
      if (i != j) CHECK(l.holds(e, g.domain()[i], g.domain()[j]) == l.holds(e, g.image()[i], g.image()[j]));
  }
  CHECK_THROWS_AS(o.f_inverse(o.smallest_outside([&](int p) { return o.in_image(p); })), std::invalid_argument);
}

TEST_CASE("run_extension builds prefixes with alpha f beta = f") {
  auto o = graph_oracle(3);
  ExtensionState st(o);
  auto run = run_extension(st, first(5));
  for (int p = 0; p < 5; ++p) {
    CHECK(run.alpha.in_domain(p));
    CHECK(run.alpha.in_image(p));
    CHECK(run.beta.in_domain(p));
    CHECK(run.beta.in_image(p));
  }
  CHECK(o.is_partial_iso(run.alpha));
  CHECK(o.is_partial_iso(run.beta));
  check_afb(o, run.alpha, run.beta);

  auto again = run_extension(st, first(5));
  CHECK(again.steps == 0);
  CHECK(again.alpha.size() == run.alpha.size());
}

TEST_CASE("a seed violating the first invariant is refused by name") {
  auto o = graph_oracle(4);
  int s = o.smallest_outside([&](int p) { return !o.in_image(p); });
  try {
    ExtensionState st(o, {{s, s}}, {});
    FAIL("expected refusal");
  } catch (const InvariantViolation& e) {
    CHECK(std::string(e.what()).find("Dom(a) ∩ Im(f) = f[Im(b)]") != std::string::npos);
  }
}

TEST_CASE("500 round-robin extension steps keep the invariants") {
  auto o = graph_oracle(5);
  ExtensionState st(o);
  auto run = run_extension(st, {}, 500);
  CHECK(run.steps == 500);
  CHECK_FALSE(st.violated_invariant().has_value());
  check_afb(o, run.alpha, run.beta);
  // the round robin covers an initial segment in every direction
  for (int p = 0; p < 100; ++p) {
    CHECK(run.beta.in_domain(p));
    CHECK(run.alpha.in_image(p));
  }
}

TEST_CASE("built-only mode suspends without changing the state and resumes after growth") {
  auto o = graph_oracle(6);
  ExtensionState st(o);
  run_extension(st, first(3));
  const auto a_before = st.a().size(), b_before = st.b().size();
  o.mode = EmbeddingOracle::Mode::BuiltOnly;
  std::size_t suspensions = 0;
  for (int round = 0; round < 200; ++round) {
    try {
      run_extension(st, {}, 4);
    } catch (const NeedsGrowth& g) {
      ++suspensions;
      CHECK(g.demanded_size > o.limit().size() - 1);
      o.limit().ensure(g.demanded_size);
    }
  }
  CHECK(suspensions > 0);
  CHECK(st.a().size() >= a_before);
  CHECK(st.b().size() >= b_before);
  CHECK_FALSE(st.violated_invariant().has_value());
  check_afb(o, st.a(), st.b());
}

TEST_CASE("recover_value matches direct evaluation") {
  for (std::uint64_t seed : {7u, 8u, 9u}) {
    auto o = graph_oracle(seed);
    int u = pick_u(o, 32);
    auto r = recover_value(o, u, {40, 32, 0});
    REQUIRE(r.value.has_value());
    CHECK(*r.value == o.f(u));
    for (const auto& c : r.certificate) {
      CHECK(c.beta.at(u) == u);
      CHECK(c.alpha.at(c.target) != c.target);
      CHECK(c.alpha.at(o.f(u)) == o.f(u));
      check_afb(o, c.alpha, c.beta);
    }
  }
}

TEST_CASE("recovery with no pairs is undetermined over the whole window") {
  auto o = graph_oracle(10);
  auto r = recover_value(o, pick_u(o, 16), {0, 16, 0});
  CHECK_FALSE(r.value.has_value());
  CHECK(r.survivors.size() == 16);
}

TEST_CASE("case 1 seeding moves an image point while fixing f(u)") {
  auto o = graph_oracle(11);
  int u = pick_u(o, 32);
  int fu = o.f(u);
  int s = o.smallest_outside([&](int p) { return !o.in_image(p) || p == fu; });
  int t = o.realize(o.type_like(s, {fu}, {fu}, 1), [s](int q) { return q != s; });
  ExtensionState st(o, {{fu, fu}, {s, t}}, {{u, u}, {o.f_inverse(t), o.f_inverse(s)}});
  auto run = run_extension(st, first(8));
  CHECK(run.alpha.at(s) != s);
  CHECK(run.alpha.at(fu) == fu);
  check_afb(o, run.alpha, run.beta);
}

TEST_CASE("run_tu from the recovery seed separates s") {
  auto o = graph_oracle(12);
  int u = pick_u(o, 32);
  int fu = o.f(u);
  int s = fu == 0 ? 1 : 0;
  auto like = o.type_like(s, {fu}, {fu}, -1);
  int t1 = o.realize(like);
  int t2 = o.realize(like, [t1](int q) { return q != t1; });
  TuState st(o, {{fu, fu}, {s, t1}}, {{fu, fu}, {s, t2}}, {{u, u}});
  auto run = run_tu(st, first(6), 40);
  CHECK(run.alpha1.at(s) != run.alpha2.at(s));
  CHECK(run.beta.at(u) == u);
  for (int x : run.beta.domain()) {
    int p = o.f(run.beta.at(x));
    CHECK(run.alpha1.at(p) == run.alpha2.at(p));
  }
}

TEST_CASE("500-step run_tu: fairness, invariants and discharged richness demands") {
  auto o = graph_oracle(13);
  TuState st(o);
  const std::size_t N = 500;
  auto run = run_tu(st, {}, N, false);
  for (auto c : st.kind_counts()) CHECK(c >= N / kTuKinds - 1);
  const std::size_t cutoff = st.step_count();
  st.settle(cutoff);
  CHECK_FALSE(st.violated_invariant().has_value());
  for (std::size_t q = 0; q < kDemandQueues; ++q) {
    std::size_t checked = 0;
    for (const auto& d : st.demands(static_cast<DemandQueue>(q))) {
      if (d.enqueued_at >= cutoff) continue;
      ++checked;
      REQUIRE(d.discharged_at.has_value());
      // replay: the target set now holds a realizer outside x
      const std::vector<int>* target = nullptr;
      switch (static_cast<DemandQueue>(q)) {
        case DemandQueue::ImageB: target = &st.b().image(); break;
        case DemandQueue::SetB: target = &st.set_b(); break;
        case DemandQueue::ImageA1: target = &st.a1().image(); break;
        case DemandQueue::SetA1: target = &st.set_a1(); break;
        case DemandQueue::ImageA2: target = &st.a2().image(); break;
        case DemandQueue::SetA2: target = &st.set_a2(); break;
      }
      bool found = false;
      for (int p : *target) found = found || o.limit().realizes(p, {d.x, d.facts});
      CHECK(found);
    }
    CHECK(checked > 0);
  }
  (void)run;
}

TEST_CASE("recover_value_via_triples") {
  auto o = graph_oracle(14);
  int u = pick_u(o, 32);
  auto r = recover_value_via_triples(o, u, {40, 32, 0});
  REQUIRE(r.value.has_value());
  CHECK(*r.value == o.f(u));
  auto z = recover_value_via_triples(o, u, {0, 8, 0});
  CHECK_FALSE(z.value.has_value());

  RichPartition k3(AgeSpec::k3_free_graphs(), {3, 1});
  k3.limit().ensure(4);
  EmbeddingOracle ok3(std::move(k3));
  try {
    recover_value_via_triples(ok3, 0, {});
    FAIL("expected refusal");
  } catch (const JepRefused& e) {
    CHECK(e.counterexample.overlap.empty());
    CHECK(e.counterexample.domain.size() == 2);
  }
}
