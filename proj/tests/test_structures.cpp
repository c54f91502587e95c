#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "clonekit/structures.hpp"

using namespace clonekit;

namespace {

RelationalStructure neq2() {
  RelationalStructure s(2);
  s.add_relation("neq", 2, {{0, 1}, {1, 0}});
  return s;
}

// Independent check: enumerate the matrix column-first and evaluate through operator().
bool keeps(const FiniteOperation& f, const Relation& r) {
  std::vector<Tuple> rows(r.tuples.begin(), r.tuples.end());
  if (rows.empty()) return true;
  const std::size_t k = static_cast<std::size_t>(f.arity());
  std::size_t total = 1;
  for (std::size_t i = 0; i < k; ++i) total *= rows.size();
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<std::size_t> pick(k);
    std::size_t c = code;
    for (std::size_t i = 0; i < k; ++i) {
      pick[i] = c % rows.size();
      c /= rows.size();
    }
    Tuple out;
    for (int j = 0; j < r.arity; ++j) {
      Tuple col;
      for (std::size_t i = 0; i < k; ++i) col.push_back(rows[pick[i]][static_cast<std::size_t>(j)]);
      out.push_back(f(col));
    }
    if (!r.tuples.count(out)) return false;
  }
  return true;
}

std::vector<FiniteOperation> brute_pol(const RelationalStructure& s, int k) {
  std::vector<FiniteOperation> out;
  const int d = s.domain_size();
  Tuple table(tuple_count(d, k), 0);
  do {
    FiniteOperation f(d, k, table);
    bool ok = true;
    for (const auto& r : s.relations()) ok = ok && keeps(f, r);
    if (ok) out.push_back(f);
  } while (next_tuple(table, d));
  return out;
}

}  // namespace

TEST_CASE("polymorphisms of the two-element inequality") {
  auto s = neq2();
  auto p1 = polymorphisms(s, 1);
  REQUIRE(p1.members.size() == 2);
  CHECK(p1.members[0] == FiniteOperation::projection(2, 1, 1));
  CHECK(p1.members[1] == FiniteOperation(2, 1, {1, 0}));
  auto p2 = polymorphisms(s, 2);
  CHECK(p2.members == brute_pol(s, 2));
  CHECK(p2.members.size() == 4);
  CHECK(polymorphisms(RelationalStructure(2), 2).members.size() == 16);
}

TEST_CASE("polymorphism search agrees with brute force on random structures") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    int d = 2 + static_cast<int>(rng() % 2);
    RelationalStructure s(d);
    int rels = 1 + static_cast<int>(rng() % 2);
    for (int r = 0; r < rels; ++r) {
      int arity = 1 + static_cast<int>(rng() % 2);
      std::vector<Tuple> tuples;
      for (std::size_t i = 0; i < tuple_count(d, arity); ++i) {
        if (rng() % 2) tuples.push_back(unrank_tuple(d, arity, i));
      }
      s.add_relation("r" + std::to_string(r), arity, tuples);
    }
    int k = (d == 2) ? 1 + static_cast<int>(rng() % 3) : 1 + static_cast<int>(rng() % 2);
    auto got = polymorphisms(s, k).members;
    CHECK(got == brute_pol(s, k));
    for (const auto& f : got) {
      for (const auto& r : s.relations()) CHECK(preserves(f, r.tuples, r.arity));
    }
    for (const auto& r : s.relations()) {
      auto inv = invariant_relations(got, d, r.arity);
      CHECK(std::find(inv.begin(), inv.end(), r.tuples) != inv.end());
    }
  }
}

TEST_CASE("polymorphisms compose into polymorphisms") {
  RelationalStructure s(3);
  s.add_relation("le", 2, {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}});
  auto p1 = polymorphisms(s, 1).members;
  auto p2 = polymorphisms(s, 2).members;
  for (const auto& f : p2) {
    for (const auto& g : p1) {
      for (const auto& h : p1) CHECK(preserves(compose(f, {g, h}), s.relation("le").tuples, 2));
    }
  }
}

TEST_CASE("search bounds are enforced") {
  SearchBounds tight;
  tight.max_nodes = 10;
  CHECK_THROWS_AS(polymorphisms(RelationalStructure(3), 2, tight), SearchBoundExceeded);
  CHECK_THROWS_AS(invariant_relations({}, 3, 3), SearchBoundExceeded);
}

TEST_CASE("invariant relations") {
  std::vector<FiniteOperation> all_unary;
  for (Tuple t : std::vector<Tuple>{{0, 0}, {0, 1}, {1, 0}, {1, 1}}) all_unary.emplace_back(2, 1, t);
  auto inv = invariant_relations(all_unary, 2, 1);
  REQUIRE(inv.size() == 2);
  CHECK(inv[0].empty());
  CHECK(inv[1].size() == 2);
  CHECK(invariant_relations({FiniteOperation::projection(2, 1, 1)}, 2, 1).size() == 4);

  auto pol = polymorphisms(neq2(), 1).members;
  auto more = polymorphisms(neq2(), 2).members;
  pol.insert(pol.end(), more.begin(), more.end());
  auto inv2 = invariant_relations(pol, 2, 2);
  std::set<Tuple> neq{{0, 1}, {1, 0}};
  CHECK(std::find(inv2.begin(), inv2.end(), neq) != inv2.end());
}

TEST_CASE("orbit counts") {
  std::vector<FiniteOperation> s3;
  Tuple p{0, 1, 2};
  do s3.emplace_back(3, 1, p);
  while (std::next_permutation(p.begin(), p.end()));
  CHECK(orbit_count(s3, 2).count == 2);
  CHECK(orbit_count({FiniteOperation::projection(4, 1, 1)}, 1).count == 4);
  auto aut = polymorphisms(neq2(), 1).members;
  auto r = orbit_count(aut, 2);
  CHECK(r.count == 2);
  CHECK(r.orbits[0] == std::vector<Tuple>{{0, 0}, {1, 1}});

  auto bad = orbit_count({FiniteOperation::projection(3, 1, 1), FiniteOperation(3, 1, {1, 2, 0})}, 1);
  CHECK_FALSE(bad.is_group);
  CHECK(bad.violation.find("missing") != std::string::npos);
  CHECK_FALSE(orbit_count({FiniteOperation(2, 1, {0, 0})}, 1).is_group);

  // Growing the group never adds orbits.
  std::vector<FiniteOperation> z3{FiniteOperation::projection(3, 1, 1), FiniteOperation(3, 1, {1, 2, 0}), FiniteOperation(3, 1, {2, 0, 1})};
  CHECK(orbit_count(z3, 2).count >= orbit_count(s3, 2).count);
}

TEST_CASE("transitivity") {
  auto all = polymorphisms(RelationalStructure(2), 1).members;
  CHECK(is_transitive_clone(generate_clone(all)).transitive);

  RelationalStructure split(4);
  split.add_relation("A", 1, {{0}, {1}});
  split.add_relation("B", 1, {{2}, {3}});
  auto rep = is_transitive_clone(generate_clone(polymorphisms(split, 1).members));
  CHECK_FALSE(rep.transitive);
  CHECK(rep.orbits == std::vector<std::vector<Value>>{{0, 1}, {2, 3}});

  auto consts = generate_clone({FiniteOperation::constant(3, 1, 0), FiniteOperation::constant(3, 1, 2)});
  CHECK_FALSE(is_transitive_clone(consts).transitive);
  CHECK(endomorphisms_are_automorphisms(neq2()));
  CHECK_FALSE(endomorphisms_are_automorphisms(RelationalStructure(2)));
}

TEST_CASE("p-maps") {
  auto max3 = FiniteOperation::from_function(3, 2, [](const Tuple& x) { return std::max(x[0], x[1]); });
  auto succ = FiniteOperation(3, 1, {1, 2, 0});
  auto id = FiniteOperation::projection(3, 1, 1);
  CHECK(p_map(max3, {id, succ}).table() == std::vector<Value>{1, 2, 2});
  CHECK(p_map(max3, {id, id}) == id);
  CHECK_THROWS(p_map(max3, {id}));

  std::vector<FiniteOperation> binary;
  Tuple t(4, 0);
  do binary.emplace_back(2, 2, t);
  while (next_tuple(t, 2));
  OpenSetData data{{0, 1}, 1, {FiniteOperation::projection(2, 1, 1), FiniteOperation(2, 1, {1, 0})}, 0};
  auto rep = verify_pmap_identity(binary, data);
  CHECK(rep.holds);
  CHECK(rep.members_checked == 16);
  data.b = 1;
  CHECK_THROWS(verify_pmap_identity(binary, data));
}

TEST_CASE("open sets as equations") {
  std::vector<FiniteOperation> unary;
  for (Tuple t : std::vector<Tuple>{{0, 0}, {0, 1}, {1, 0}, {1, 1}}) unary.emplace_back(2, 1, t);
  auto c = generate_clone(unary, {2});
  auto e = encode_open_set_as_equation(c, {0}, 0);
  auto chk = verify_open_set_equation(c, e, {0}, 0);
  CHECK(chk.holds);
  CHECK(chk.solutions == 2);
  CHECK(verify_open_set_equation(c, encode_open_set_as_equation(c, {1, 0}, 1), {1, 0}, 1).holds);
  CHECK_THROWS(encode_open_set_as_equation(c, {0}, 2));
  CHECK_THROWS(encode_open_set_as_equation(generate_clone({FiniteOperation(2, 1, {1, 0})}), {0}, 0));

  // Transport along conjugation by negation, which fixes this clone setwise.
  auto neg = FiniteOperation(2, 1, {1, 0});
  auto conj = [&](const FiniteOperation& f) {
    std::vector<FiniteOperation> args;
    for (int k = 1; k <= f.arity(); ++k) args.push_back(compose_unary(neg, FiniteOperation::projection(2, f.arity(), k)));
    return compose_unary(neg, compose(f, args));
  };
  for (const auto& f : c.members(1)) {
    Binding moved{{0, conj(f)}, {1, conj(FiniteOperation::constant(2, 1, 0))}, {2, conj(FiniteOperation::constant(2, 1, 1))}};
    bool in_image = f(Tuple{0}) == 0;
    CHECK(check_term_equation(e, moved, 2).holds == in_image);
  }
}
