#include "clonekit/structures.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_set>

namespace clonekit {

RelationalStructure::RelationalStructure(int domain_size) : d_(domain_size) {
  if (d_ < 1) throw std::invalid_argument("domain size must be positive");
}

void RelationalStructure::add_relation(const std::string& name, int arity, const std::vector<Tuple>& tuples) {
  if (arity < 1) throw std::invalid_argument("relation arity must be positive");
  for (const auto& r : relations_) {
    if (r.name == name) throw std::invalid_argument("duplicate relation name " + name);
  }
  Relation r{name, arity, {}};
  for (const auto& t : tuples) {
    if (static_cast<int>(t.size()) != arity) throw std::invalid_argument("tuple of wrong length in relation " + name);
    for (Value v : t) {
      if (v < 0 || v >= d_) throw std::invalid_argument("tuple entry outside the domain in relation " + name);
    }
    r.tuples.insert(t);
  }
  relations_.push_back(std::move(r));
}

const Relation& RelationalStructure::relation(const std::string& name) const {
  for (const auto& r : relations_) {
    if (r.name == name) return r;
  }
  throw std::out_of_range("no relation named " + name);
}

namespace {

struct Constraint {
  std::vector<std::size_t> cells;  // table index per column
  const std::vector<char>* member;  // membership bitmap of the relation
};

std::vector<char> relation_bitmap(const std::set<Tuple>& rel, int d, int arity) {
  std::vector<char> bits(tuple_count(d, arity), 0);
  for (const auto& t : rel) bits[rank_tuple(d, t)] = 1;
  return bits;
}

}  // namespace

PolymorphismSet polymorphisms(const RelationalStructure& s, int k, const SearchBounds& bounds) {
  if (k < 1) throw std::invalid_argument("polymorphism arity must be at least 1");
  const int d = s.domain_size();
  const std::size_t cells = tuple_count(d, k);

  std::vector<std::vector<char>> bitmaps;
  bitmaps.reserve(s.relations().size());
  for (const auto& r : s.relations()) bitmaps.push_back(relation_bitmap(r.tuples, d, r.arity));

  std::vector<std::vector<Constraint>> attached(cells);
  for (std::size_t ri = 0; ri < s.relations().size(); ++ri) {
    const auto& r = s.relations()[ri];
    std::vector<Tuple> rows(r.tuples.begin(), r.tuples.end());
    if (rows.empty()) continue;
    std::set<std::vector<std::size_t>> seen;
    std::vector<std::size_t> pick(static_cast<std::size_t>(k), 0);
    do {
      std::vector<std::size_t> idx(static_cast<std::size_t>(r.arity));
      for (int j = 0; j < r.arity; ++j) {
        std::size_t x = 0;
        for (std::size_t p : pick) x = x * static_cast<std::size_t>(d) + static_cast<std::size_t>(rows[p][static_cast<std::size_t>(j)]);
        idx[static_cast<std::size_t>(j)] = x;
      }
      if (seen.insert(idx).second) {
        std::size_t top = *std::max_element(idx.begin(), idx.end());
        attached[top].push_back(Constraint{idx, &bitmaps[ri]});
      }
    } while (next_index_tuple(pick, rows.size()));
  }

  PolymorphismSet out;
  out.arity = k;
  std::vector<Value> table(cells, 0);
  std::size_t nodes = 0;
  std::size_t cell = 0;
  // Iterative backtracking: table[cell] holds the value being tried.
  std::vector<Value> next_value(cells, 0);
  while (true) {
    if (cell == cells) {
      out.members.emplace_back(d, k, table);
      if (out.members.size() > bounds.max_results) {
        throw SearchBoundExceeded("polymorphism count exceeds " + std::to_string(bounds.max_results), bounds.max_results);
      }
      --cell;
      continue;
    }
    if (next_value[cell] >= d) {
      next_value[cell] = 0;
      if (cell == 0) break;
      --cell;
      continue;
    }
    table[cell] = next_value[cell]++;
    if (++nodes > bounds.max_nodes) {
      throw SearchBoundExceeded("polymorphism search exceeds " + std::to_string(bounds.max_nodes) + " nodes",
                                bounds.max_nodes);
    }
    bool ok = true;
    for (const auto& c : attached[cell]) {
      std::size_t r = 0;
      for (std::size_t x : c.cells) r = r * static_cast<std::size_t>(d) + static_cast<std::size_t>(table[x]);
      if (!(*c.member)[r]) {
        ok = false;
        break;
      }
    }
    if (ok) ++cell;
  }
  return out;
}

bool preserves(const FiniteOperation& f, const std::set<Tuple>& relation, int arity) {
  if (relation.empty()) return true;
  const int d = f.domain_size();
  std::vector<Tuple> rows(relation.begin(), relation.end());
  std::vector<std::size_t> pick(static_cast<std::size_t>(f.arity()), 0);
  Tuple image(static_cast<std::size_t>(arity));
  do {
    for (int j = 0; j < arity; ++j) {
      std::size_t x = 0;
      for (std::size_t p : pick) x = x * static_cast<std::size_t>(d) + static_cast<std::size_t>(rows[p][static_cast<std::size_t>(j)]);
      image[static_cast<std::size_t>(j)] = f.at(x);
    }
    if (!relation.count(image)) return false;
  } while (next_index_tuple(pick, rows.size()));
  return true;
}

std::vector<std::set<Tuple>> invariant_relations(const std::vector<FiniteOperation>& ops, int domain_size, int m,
                                                 const SearchBounds& bounds) {
  const std::size_t points = tuple_count(domain_size, m);
  if (points > static_cast<std::size_t>(bounds.max_table_bits)) {
    throw SearchBoundExceeded("invariant relation search needs 2^" + std::to_string(points) + " subsets",
                              static_cast<std::size_t>(bounds.max_table_bits));
  }
  for (const auto& f : ops) {
    if (f.domain_size() != domain_size) throw std::invalid_argument("operation on a different domain");
  }
  std::vector<std::set<Tuple>> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << points); ++mask) {
    std::set<Tuple> rel;
    for (std::size_t i = 0; i < points; ++i) {
      if (mask >> i & 1u) rel.insert(unrank_tuple(domain_size, m, i));
    }
    bool ok = std::all_of(ops.begin(), ops.end(), [&](const FiniteOperation& f) { return preserves(f, rel, m); });
    if (ok) out.push_back(std::move(rel));
  }
  return out;
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

bool is_bijection(const FiniteOperation& f) {
  std::vector<char> hit(static_cast<std::size_t>(f.domain_size()), 0);
  for (Value v : f.table()) {
    if (hit[static_cast<std::size_t>(v)]) return false;
    hit[static_cast<std::size_t>(v)] = 1;
  }
  return true;
}

}  // namespace

OrbitReport orbit_count(const std::vector<FiniteOperation>& group, int n) {
  OrbitReport rep;
  if (group.empty()) {
    rep.is_group = false;
    rep.violation = "empty set is not a group";
    return rep;
  }
  const int d = group.front().domain_size();
  std::set<FiniteOperation> elems(group.begin(), group.end());
  for (const auto& g : group) {
    if (g.arity() != 1 || g.domain_size() != d) {
      rep.is_group = false;
      rep.violation = "element " + g.to_string() + " is not a unary operation on the common domain";
      return rep;
    }
    if (!is_bijection(g)) {
      rep.is_group = false;
      rep.violation = "element " + g.to_string() + " is not invertible";
      return rep;
    }
  }
  if (!elems.count(FiniteOperation::projection(d, 1, 1))) {
    rep.is_group = false;
    rep.violation = "identity missing";
    return rep;
  }
  for (const auto& a : elems) {
    for (const auto& b : elems) {
      auto c = compose_unary(a, b);
      if (!elems.count(c)) {
        rep.is_group = false;
        rep.violation = "composite " + a.to_string() + " o " + b.to_string() + " = " + c.to_string() + " missing";
        return rep;
      }
    }
  }
  const std::size_t size = tuple_count(d, n);
  UnionFind uf(size);
  for (const auto& g : elems) {
    for (std::size_t i = 0; i < size; ++i) {
      Tuple t = unrank_tuple(d, n, i);
      for (auto& v : t) v = g.at(static_cast<std::size_t>(v));
      uf.unite(i, rank_tuple(d, t));
    }
  }
  std::map<std::size_t, std::vector<Tuple>> classes;
  for (std::size_t i = 0; i < size; ++i) classes[uf.find(i)].push_back(unrank_tuple(d, n, i));
  for (auto& [root, members] : classes) rep.orbits.push_back(std::move(members));
  rep.count = rep.orbits.size();
  return rep;
}

TransitivityReport is_transitive_clone(const FunctionClone& clone) {
  const int d = clone.domain_size();
  UnionFind uf(static_cast<std::size_t>(d));
  for (const auto& f : clone.members(1)) {
    if (!is_bijection(f)) continue;
    for (int x = 0; x < d; ++x) uf.unite(static_cast<std::size_t>(x), static_cast<std::size_t>(f.at(static_cast<std::size_t>(x))));
  }
  std::map<std::size_t, std::vector<Value>> classes;
  for (int x = 0; x < d; ++x) classes[uf.find(static_cast<std::size_t>(x))].push_back(x);
  TransitivityReport rep;
  for (auto& [root, members] : classes) rep.orbits.push_back(std::move(members));
  rep.transitive = rep.orbits.size() == 1;
  return rep;
}

bool endomorphisms_are_automorphisms(const RelationalStructure& s, const SearchBounds& bounds) {
  auto end = polymorphisms(s, 1, bounds);
  return std::all_of(end.members.begin(), end.members.end(), is_bijection);
}

FiniteOperation p_map(const FiniteOperation& f, const std::vector<FiniteOperation>& gs) {
  if (static_cast<int>(gs.size()) != f.arity()) throw std::invalid_argument("p-map needs one unary map per argument");
  for (const auto& g : gs) {
    if (g.arity() != 1) throw std::invalid_argument("p-map arguments must be unary");
  }
  return compose(f, gs);
}

PMapIdentityReport verify_pmap_identity(const std::vector<FiniteOperation>& members, const OpenSetData& data) {
  if (data.alphas.size() != data.args.size()) throw std::invalid_argument("one alpha per argument needed");
  for (std::size_t i = 0; i < data.alphas.size(); ++i) {
    if (data.alphas[i].at(static_cast<std::size_t>(data.b)) != data.args[i]) {
      throw std::invalid_argument("alpha " + std::to_string(i + 1) + " does not send b to its argument");
    }
  }
  PMapIdentityReport rep;
  for (const auto& f : members) {
    if (f.arity() != static_cast<int>(data.args.size())) continue;
    ++rep.members_checked;
    bool in_u = f(data.args) == data.value;
    bool in_pre = p_map(f, data.alphas).at(static_cast<std::size_t>(data.b)) == data.value;
    if (in_u != in_pre) {
      rep.holds = false;
      if (!rep.counterexample) rep.counterexample = f;
    }
  }
  return rep;
}

Equation encode_open_set_as_equation(const FunctionClone& clone, const Tuple& a, Value b) {
  const int d = clone.domain_size();
  if (b < 0 || b >= d) throw std::invalid_argument("value " + std::to_string(b) + " outside the domain");
  for (Value v : a) {
    if (v < 0 || v >= d) throw std::invalid_argument("argument " + std::to_string(v) + " outside the domain");
  }
  for (int c = 0; c < d; ++c) {
    if (!clone.contains(FiniteOperation::constant(d, 1, c))) {
      throw std::invalid_argument("clone lacks the unary constant " + std::to_string(c));
    }
  }
  std::vector<Term> args;
  for (Value v : a) args.push_back(make_apply(1 + v, {make_var(0)}));
  return Equation{make_apply(1 + b, {make_var(0)}), make_apply(0, std::move(args)), 1};
}

Binding open_set_binding(const FunctionClone& clone, const FiniteOperation& candidate) {
  Binding bnd{{0, candidate}};
  for (int c = 0; c < clone.domain_size(); ++c) bnd.emplace(1 + c, FiniteOperation::constant(clone.domain_size(), 1, c));
  return bnd;
}

OpenSetCheck verify_open_set_equation(const FunctionClone& clone, const Equation& e, const Tuple& a, Value b) {
  OpenSetCheck out;
  const int n = static_cast<int>(a.size());
  if (n > clone.arity_cap()) throw std::invalid_argument("tuple longer than the clone's arity cap");
  for (const auto& f : clone.members(n)) {
    ++out.members_checked;
    bool solves = check_term_equation(e, open_set_binding(clone, f), clone.domain_size()).holds;
    if (solves) ++out.solutions;
    if (solves != (f(a) == b)) out.holds = false;
  }
  return out;
}

}  // namespace clonekit
