#include "clonekit/birkhoff.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <unordered_map>

namespace clonekit {

Algebra::Algebra(int d, std::vector<FiniteOperation> operations) : domain_size(d), ops(std::move(operations)) {
  for (const auto& f : ops) {
    if (f.domain_size() != d) throw std::invalid_argument("operation domain does not match algebra domain");
  }
}

std::vector<int> Algebra::signature() const {
  std::vector<int> s;
  for (const auto& f : ops) s.push_back(f.arity());
  return s;
}

int Congruence::block_count() const {
  return block.empty() ? 0 : *std::max_element(block.begin(), block.end()) + 1;
}

Congruence identity_congruence(int n) {
  Congruence c;
  c.block.resize(static_cast<std::size_t>(n));
  std::iota(c.block.begin(), c.block.end(), 0);
  return c;
}

Congruence normalize_partition(const std::vector<int>& labels) {
  Congruence c;
  std::unordered_map<int, int> seen;
  for (int l : labels) {
    auto it = seen.find(l);
    if (it == seen.end()) it = seen.emplace(l, static_cast<int>(seen.size())).first;
    c.block.push_back(it->second);
  }
  return c;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    return true;
  }
  std::vector<int> labels() {
    std::vector<int> l(parent.size());
    for (std::size_t i = 0; i < l.size(); ++i) l[i] = find(static_cast<int>(i));
    return l;
  }
};

}  // namespace

Congruence join(const Congruence& a, const Congruence& b) {
  const int n = static_cast<int>(a.block.size());
  UnionFind uf(n);
  std::vector<int> first_a(static_cast<std::size_t>(n), -1), first_b(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    int& fa = first_a[static_cast<std::size_t>(a.block[static_cast<std::size_t>(i)])];
    if (fa < 0) fa = i; else uf.unite(fa, i);
    int& fb = first_b[static_cast<std::size_t>(b.block[static_cast<std::size_t>(i)])];
    if (fb < 0) fb = i; else uf.unite(fb, i);
  }
  return normalize_partition(uf.labels());
}

std::vector<int> generated_subuniverse(const Algebra& a, const std::vector<int>& gens) {
  std::vector<char> in(static_cast<std::size_t>(a.domain_size), 0);
  std::vector<int> elems;
  for (int g : gens) {
    if (g < 0 || g >= a.domain_size) throw std::invalid_argument("generator outside the domain");
    if (!in[static_cast<std::size_t>(g)]) {
      in[static_cast<std::size_t>(g)] = 1;
      elems.push_back(g);
    }
  }
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& f : a.ops) {
      const std::size_t snapshot = elems.size();
      std::vector<std::size_t> pick(static_cast<std::size_t>(f.arity()), 0);
      if (snapshot == 0) continue;
      do {
        std::size_t r = 0;
        for (std::size_t p : pick) r = r * static_cast<std::size_t>(a.domain_size) + static_cast<std::size_t>(elems[p]);
        Value v = f.at(r);
        if (!in[static_cast<std::size_t>(v)]) {
          in[static_cast<std::size_t>(v)] = 1;
          elems.push_back(v);
          grew = true;
        }
      } while (next_index_tuple(pick, snapshot));
    }
  }
  std::sort(elems.begin(), elems.end());
  return elems;
}

Congruence congruence_generated(const Algebra& a, const std::vector<std::pair<int, int>>& pairs) {
  const int d = a.domain_size;
  UnionFind uf(d);
  std::vector<std::pair<int, int>> queue;
  for (auto [x, y] : pairs) {
    if (x < 0 || y < 0 || x >= d || y >= d) throw std::invalid_argument("pair outside the domain");
    if (uf.unite(x, y)) queue.emplace_back(x, y);
  }
  while (!queue.empty()) {
    auto [x, y] = queue.back();
    queue.pop_back();
    for (const auto& f : a.ops) {
      const int r = f.arity();
      for (int pos = 0; pos < r; ++pos) {
        Tuple ctx(static_cast<std::size_t>(r - 1), 0);
        do {
          std::size_t rx = 0, ry = 0;
          for (int i = 0, c = 0; i < r; ++i) {
            Value vx, vy;
            if (i == pos) {
              vx = x;
              vy = y;
            } else {
              vx = vy = ctx[static_cast<std::size_t>(c++)];
            }
            rx = rx * static_cast<std::size_t>(d) + static_cast<std::size_t>(vx);
            ry = ry * static_cast<std::size_t>(d) + static_cast<std::size_t>(vy);
          }
          Value u = f.at(rx), v = f.at(ry);
          if (uf.unite(u, v)) queue.emplace_back(u, v);
        } while (next_tuple(ctx, d));
      }
    }
  }
  return normalize_partition(uf.labels());
}

IncompatiblePartition::IncompatiblePartition(CompatibilityFailure f)
    : std::invalid_argument("partition is not compatible with operation slot " + std::to_string(f.slot)),
      failure_(std::move(f)) {}

std::optional<CompatibilityFailure> find_incompatibility(const Algebra& a, const Congruence& c) {
  const int d = a.domain_size;
  for (std::size_t slot = 0; slot < a.ops.size(); ++slot) {
    const auto& f = a.ops[slot];
    const int r = f.arity();
    // Compatibility follows from compatibility with every one-position change.
    for (int pos = 0; pos < r; ++pos) {
      Tuple base(static_cast<std::size_t>(r), 0);
      do {
        for (Value y = 0; y < d; ++y) {
          Value x = base[static_cast<std::size_t>(pos)];
          if (y <= x || !c.related(x, y)) continue;
          Tuple other = base;
          other[static_cast<std::size_t>(pos)] = y;
          Value u = f(base), v = f(other);
          if (!c.related(u, v)) return CompatibilityFailure{static_cast<int>(slot), base, other, u, v};
        }
      } while (next_tuple(base, d));
    }
  }
  return std::nullopt;
}

Algebra quotient(const Algebra& a, const Congruence& c) {
  if (static_cast<int>(c.block.size()) != a.domain_size) throw std::invalid_argument("partition size mismatch");
  if (auto fail = find_incompatibility(a, c)) throw IncompatiblePartition(*fail);
  const int k = c.block_count();
  std::vector<int> rep(static_cast<std::size_t>(k), -1);
  for (int x = 0; x < a.domain_size; ++x) {
    if (rep[static_cast<std::size_t>(c.block[static_cast<std::size_t>(x)])] < 0) rep[static_cast<std::size_t>(c.block[static_cast<std::size_t>(x)])] = x;
  }
  std::vector<FiniteOperation> ops;
  for (const auto& f : a.ops) {
    ops.push_back(FiniteOperation::from_function(k, f.arity(), [&](const Tuple& t) {
      Tuple lifted;
      for (Value v : t) lifted.push_back(rep[static_cast<std::size_t>(v)]);
      return c.block[static_cast<std::size_t>(f(lifted))];
    }));
  }
  return Algebra(k, std::move(ops));
}

Algebra power_algebra(const Algebra& a, int n) {
  const int d = a.domain_size;
  const int size = static_cast<int>(tuple_count(d, n));
  std::vector<FiniteOperation> ops;
  for (const auto& f : a.ops) {
    ops.push_back(FiniteOperation::from_function(size, f.arity(), [&](const Tuple& args) {
      Tuple out(static_cast<std::size_t>(n));
      std::vector<Tuple> unpacked;
      for (Value v : args) unpacked.push_back(unrank_tuple(d, n, static_cast<std::size_t>(v)));
      for (int i = 0; i < n; ++i) {
        Tuple col;
        for (const auto& u : unpacked) col.push_back(u[static_cast<std::size_t>(i)]);
        out[static_cast<std::size_t>(i)] = f(col);
      }
      return static_cast<Value>(rank_tuple(d, out));
    }));
  }
  return Algebra(size, std::move(ops));
}

Algebra subalgebra(const Algebra& a, const std::vector<int>& universe) {
  std::vector<int> pos(static_cast<std::size_t>(a.domain_size), -1);
  for (std::size_t i = 0; i < universe.size(); ++i) pos[static_cast<std::size_t>(universe[i])] = static_cast<int>(i);
  const int k = static_cast<int>(universe.size());
  std::vector<FiniteOperation> ops;
  for (const auto& f : a.ops) {
    ops.push_back(FiniteOperation::from_function(k, f.arity(), [&](const Tuple& t) {
      Tuple lifted;
      for (Value v : t) lifted.push_back(universe[static_cast<std::size_t>(v)]);
      int p = pos[static_cast<std::size_t>(f(lifted))];
      if (p < 0) throw std::invalid_argument("subset is not closed under the operations");
      return p;
    }));
  }
  return Algebra(k, std::move(ops));
}

namespace {

// Per element and slot: fixed-point flag of the diagonal, and per position the count of
// argument tuples with the element there that return it.
std::vector<std::vector<int>> element_profiles(const Algebra& a) {
  std::vector<std::vector<int>> prof(static_cast<std::size_t>(a.domain_size));
  for (const auto& f : a.ops) {
    std::vector<std::vector<int>> counts(static_cast<std::size_t>(a.domain_size), std::vector<int>(static_cast<std::size_t>(f.arity()) + 2, 0));
    Tuple t(static_cast<std::size_t>(f.arity()), 0);
    std::size_t i = 0;
    do {
      Value v = f.at(i++);
      counts[static_cast<std::size_t>(v)][static_cast<std::size_t>(f.arity()) + 1]++;
      for (std::size_t p = 0; p < t.size(); ++p) {
        if (t[p] == v) counts[static_cast<std::size_t>(v)][p]++;
      }
    } while (next_tuple(t, a.domain_size));
    for (int x = 0; x < a.domain_size; ++x) {
      Tuple diag(static_cast<std::size_t>(f.arity()), x);
      counts[static_cast<std::size_t>(x)][static_cast<std::size_t>(f.arity())] = (f(diag) == x);
      auto& p = prof[static_cast<std::size_t>(x)];
      p.insert(p.end(), counts[static_cast<std::size_t>(x)].begin(), counts[static_cast<std::size_t>(x)].end());
    }
  }
  return prof;
}

}  // namespace

std::optional<std::vector<Value>> find_isomorphism(const Algebra& from, const Algebra& to) {
  if (from.domain_size != to.domain_size || from.signature() != to.signature()) return std::nullopt;
  const int n = from.domain_size;
  auto pf = element_profiles(from), pt = element_profiles(to);
  std::vector<std::vector<Value>> candidates(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      if (pf[static_cast<std::size_t>(x)] == pt[static_cast<std::size_t>(y)]) candidates[static_cast<std::size_t>(x)].push_back(y);
    }
    if (candidates[static_cast<std::size_t>(x)].empty()) return std::nullopt;
  }
  // Assign the most constrained elements first.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return candidates[static_cast<std::size_t>(a)].size() < candidates[static_cast<std::size_t>(b)].size();
  });
  std::vector<Value> map(static_cast<std::size_t>(n), -1);
  std::vector<char> used(static_cast<std::size_t>(n), 0);

  auto consistent = [&]() {
    for (std::size_t s = 0; s < from.ops.size(); ++s) {
      const auto& f = from.ops[s];
      const auto& g = to.ops[s];
      Tuple t(static_cast<std::size_t>(f.arity()), 0);
      std::size_t i = 0;
      do {
        Value v = f.at(i++);
        if (map[static_cast<std::size_t>(v)] < 0) continue;
        bool all = true;
        Tuple img;
        for (Value x : t) {
          if (map[static_cast<std::size_t>(x)] < 0) {
            all = false;
            break;
          }
          img.push_back(map[static_cast<std::size_t>(x)]);
        }
        if (all && g(img) != map[static_cast<std::size_t>(v)]) return false;
      } while (next_tuple(t, n));
    }
    return true;
  };
  std::function<bool(std::size_t)> go = [&](std::size_t k) -> bool {
    if (k == order.size()) return true;
    const int x = order[k];
    for (Value y : candidates[static_cast<std::size_t>(x)]) {
      if (used[static_cast<std::size_t>(y)]) continue;
      map[static_cast<std::size_t>(x)] = y;
      used[static_cast<std::size_t>(y)] = 1;
      if (consistent() && go(k + 1)) return true;
      used[static_cast<std::size_t>(y)] = 0;
      map[static_cast<std::size_t>(x)] = -1;
    }
    return false;
  };
  if (go(0)) return map;
  return std::nullopt;
}

std::optional<HspWitness> hsp_membership(const Algebra& b, const Algebra& a, const HspCaps& caps) {
  if (a.signature() != b.signature()) throw std::invalid_argument("algebras have different signatures");
  if (caps.max_power < 1 || caps.max_generators < 1) throw std::invalid_argument("caps must be positive");
  const int target = b.domain_size;
  for (int n = 1; n <= caps.max_power; ++n) {
    Algebra an = power_algebra(a, n);
    // Distinct subuniverses, smallest first, each with the first generator set reaching it.
    std::map<std::vector<int>, std::vector<int>> first_gens;
    for (int g = 1; g <= caps.max_generators && g <= an.domain_size; ++g) {
      for (const auto& gens : combinations(an.domain_size, g)) {
        auto s = generated_subuniverse(an, gens);
        if (static_cast<int>(s.size()) >= target) first_gens.emplace(s, gens);
      }
    }
    std::vector<std::vector<int>> universes;
    for (const auto& [s, gens] : first_gens) universes.push_back(s);
    std::stable_sort(universes.begin(), universes.end(),
                     [](const std::vector<int>& x, const std::vector<int>& y) { return x.size() < y.size(); });
    for (const auto& s : universes) {
        const auto& gens = first_gens.at(s);
        Algebra sub = subalgebra(an, s);
        const int size = sub.domain_size;
        std::vector<Congruence> principal;
        for (int x = 0; x < size; ++x) {
          for (int y = x + 1; y < size; ++y) {
            auto c = congruence_generated(sub, {{x, y}});
            if (c.block_count() >= target) principal.push_back(c);
          }
        }
        std::sort(principal.begin(), principal.end());
        principal.erase(std::unique(principal.begin(), principal.end()), principal.end());
        // Joins only coarsen, so anything below the target block count is dropped.
        std::vector<Congruence> lattice{identity_congruence(size)};
        std::set<Congruence> known(lattice.begin(), lattice.end());
        for (std::size_t i = 0; i < lattice.size(); ++i) {
          const Congruence cur = lattice[i];
          if (cur.block_count() == target) {
            Algebra q = quotient(sub, cur);
            if (auto iso = find_isomorphism(q, b)) {
              HspWitness w;
              w.power = n;
              for (int e : gens) w.generators.push_back(unrank_tuple(a.domain_size, n, static_cast<std::size_t>(e)));
              for (int e : s) w.subuniverse.push_back(unrank_tuple(a.domain_size, n, static_cast<std::size_t>(e)));
              w.congruence = cur;
              w.iso = *iso;
              return w;
            }
            continue;
          }
          for (const auto& p : principal) {
            auto j = join(cur, p);
            if (j.block_count() >= target && known.insert(j).second) lattice.push_back(j);
          }
        }
    }
  }
  return std::nullopt;
}

bool verify_hsp_witness(const Algebra& b, const Algebra& a, const HspWitness& w, std::string* why) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  std::map<Tuple, std::size_t> index;
  for (std::size_t i = 0; i < w.subuniverse.size(); ++i) index[w.subuniverse[i]] = i;
  if (w.congruence.block.size() != w.subuniverse.size()) return fail("congruence size mismatch");
  const int k = w.congruence.block_count();
  if (k != b.domain_size || static_cast<int>(w.iso.size()) != k) return fail("block count does not match target");
  std::vector<char> hit(static_cast<std::size_t>(k), 0);
  for (Value v : w.iso) {
    if (v < 0 || v >= k || hit[static_cast<std::size_t>(v)]) return fail("iso is not a bijection");
    hit[static_cast<std::size_t>(v)] = 1;
  }
  for (const auto& g : w.generators) {
    if (!index.count(g)) return fail("generator outside the subuniverse");
  }
  for (std::size_t slot = 0; slot < a.ops.size(); ++slot) {
    const auto& f = a.ops[slot];
    std::vector<std::size_t> pick(static_cast<std::size_t>(f.arity()), 0);
    do {
      Tuple image;
      for (int i = 0; i < w.power; ++i) {
        Tuple col;
        for (std::size_t p : pick) col.push_back(w.subuniverse[p][static_cast<std::size_t>(i)]);
        image.push_back(f(col));
      }
      auto it = index.find(image);
      if (it == index.end()) return fail("subuniverse not closed under slot " + std::to_string(slot));
      Tuple blocks;
      for (std::size_t p : pick) blocks.push_back(w.iso[static_cast<std::size_t>(w.congruence.block[p])]);
      if (b.ops[slot](blocks) != w.iso[static_cast<std::size_t>(w.congruence.block[it->second])]) {
        return fail("quotient map does not respect slot " + std::to_string(slot));
      }
    } while (next_index_tuple(pick, w.subuniverse.size()));
  }
  return true;
}

InclusionResult equational_inclusion(const Algebra& a, const Algebra& b, int depth_cap, int variables) {
  if (a.signature() != b.signature()) throw std::invalid_argument("algebras have different signatures");
  struct Entry {
    std::vector<Value> ta, tb;
    Term term;
  };
  auto var_table = [&](int d, int v) {
    return FiniteOperation::projection(d, variables, v + 1).table();
  };
  std::vector<Entry> all;
  std::map<std::vector<Value>, std::size_t> by_a;  // A-table -> first entry
  std::set<std::pair<std::vector<Value>, std::vector<Value>>> pairs;
  InclusionResult out;
  auto consider = [&](Entry e) -> bool {
    if (!pairs.insert({e.ta, e.tb}).second) return true;
    auto it = by_a.find(e.ta);
    if (it != by_a.end()) {
      out.holds = false;
      out.counterexample = Equation{all[it->second].term, e.term, variables};
      return false;
    }
    by_a.emplace(e.ta, all.size());
    all.push_back(std::move(e));
    return true;
  };
  for (int v = 0; v < variables; ++v) {
    if (!consider(Entry{var_table(a.domain_size, v), var_table(b.domain_size, v), make_var(v)})) return out;
  }
  std::size_t level_begin = 0;
  for (int depth = 1; depth <= depth_cap; ++depth) {
    const std::size_t level_end = all.size();
    for (std::size_t slot = 0; slot < a.ops.size(); ++slot) {
      const auto& fa = a.ops[slot];
      const auto& fb = b.ops[slot];
      std::vector<std::size_t> pick(static_cast<std::size_t>(fa.arity()), 0);
      do {
        bool fresh = false;
        for (std::size_t p : pick) fresh |= p >= level_begin;
        if (!fresh) continue;
        std::vector<FiniteOperation> argsa, argsb;
        std::vector<Term> kids;
        for (std::size_t p : pick) {
          argsa.emplace_back(a.domain_size, variables, all[p].ta);
          argsb.emplace_back(b.domain_size, variables, all[p].tb);
          kids.push_back(all[p].term);
        }
        Entry e{compose(fa, argsa).table(), compose(fb, argsb).table(), make_apply(static_cast<int>(slot), kids)};
        if (!consider(std::move(e))) return out;
      } while (next_index_tuple(pick, level_end));
    }
    level_begin = level_end;
  }
  out.term_classes = all.size();
  return out;
}

Kernel kernel_of(const Tuple& t) {
  return normalize_partition(std::vector<int>(t.begin(), t.end())).block;
}

namespace {

void all_partitions(int n, Kernel& cur, std::vector<Kernel>& out, int blocks) {
  if (static_cast<int>(cur.size()) == n) {
    out.push_back(cur);
    return;
  }
  for (int b = 0; b <= blocks; ++b) {
    cur.push_back(b);
    all_partitions(n, cur, out, std::max(blocks, b + 1));
    cur.pop_back();
  }
}

// kappa2 is obtained from kappa1 by merging blocks.
bool coarsens(const Kernel& fine, const Kernel& coarse) {
  for (std::size_t i = 0; i < fine.size(); ++i) {
    for (std::size_t j = i + 1; j < fine.size(); ++j) {
      if (fine[i] == fine[j] && coarse[i] != coarse[j]) return false;
    }
  }
  return true;
}

int block_count(const Kernel& k) { return k.empty() ? 0 : *std::max_element(k.begin(), k.end()) + 1; }

}  // namespace

FiniteRangeReport finite_range_restriction(const std::set<Tuple>& s, int codomain_size, int index_count,
                                           bool unary_closure_flag, const std::vector<FiniteOperation>& ops) {
  FiniteRangeReport rep;
  for (const auto& t : s) {
    if (static_cast<int>(t.size()) != index_count) throw std::invalid_argument("tuple length differs from index count");
  }
  std::set<Kernel> present;
  for (const auto& t : s) present.insert(kernel_of(t));
  rep.kernels_present.assign(present.begin(), present.end());

  std::map<Kernel, std::pair<std::optional<Tuple>, std::optional<Tuple>>> seen;  // in S, not in S
  Tuple t(static_cast<std::size_t>(index_count), 0);
  do {
    auto& slot = seen[kernel_of(t)];
    if (s.count(t)) {
      if (!slot.first) slot.first = t;
    } else if (!slot.second) {
      slot.second = t;
    }
    if (rep.kernel_dependent && slot.first && slot.second) {
      rep.kernel_dependent = false;
      rep.dependence_counterexample = std::make_pair(*slot.first, *slot.second);
    }
  } while (next_tuple(t, codomain_size));

  std::vector<Kernel> parts;
  Kernel cur;
  all_partitions(index_count, cur, parts, 0);
  for (const auto& k : rep.kernels_present) {
    for (const auto& c : parts) {
      if (block_count(c) > codomain_size || c == k || !coarsens(k, c)) continue;
      if (!present.count(c)) {
        rep.upward_closed = false;
        rep.upward_counterexample = std::make_pair(k, c);
        break;
      }
    }
    if (!rep.upward_closed) break;
  }

  if (unary_closure_flag) {
    rep.unary_closed = true;
    std::vector<FiniteOperation> maps;
    if (tuple_count(codomain_size, codomain_size) <= 4096) {
      Tuple m(static_cast<std::size_t>(codomain_size), 0);
      do maps.emplace_back(codomain_size, 1, m);
      while (next_tuple(m, codomain_size));
    } else {
      // Sample: each map merging a single pair of values.
      for (int x = 0; x < codomain_size; ++x) {
        for (int y = 0; y < codomain_size; ++y) {
          if (x != y) maps.push_back(FiniteOperation::from_function(codomain_size, 1, [&](const Tuple& v) { return v[0] == x ? y : v[0]; }));
        }
      }
    }
    for (const auto& m : maps) {
      for (const auto& tu : s) {
        Tuple img;
        for (Value v : tu) img.push_back(m.at(static_cast<std::size_t>(v)));
        if (!s.count(img)) {
          rep.unary_closed = false;
          rep.unary_counterexample = std::make_pair(m, tu);
          break;
        }
      }
      if (!*rep.unary_closed) break;
    }
  }

  std::vector<std::set<Tuple>> layers(static_cast<std::size_t>(index_count));
  for (const auto& tu : s) {
    int values = block_count(kernel_of(tu));
    for (int r = std::max(values, 1); r <= index_count; ++r) layers[static_cast<std::size_t>(r - 1)].insert(tu);
  }
  for (const auto& l : layers) rep.filtration_sizes.push_back(l.size());
  for (const auto& f : ops) {
    std::vector<bool> closed;
    for (const auto& layer : layers) {
      bool ok = true;
      std::vector<Tuple> rows(layer.begin(), layer.end());
      if (!rows.empty()) {
        std::vector<std::size_t> pick(static_cast<std::size_t>(f.arity()), 0);
        do {
          Tuple img;
          for (int i = 0; i < index_count; ++i) {
            Tuple col;
            for (std::size_t p : pick) col.push_back(rows[p][static_cast<std::size_t>(i)]);
            img.push_back(f(col));
          }
          if (!layer.count(img)) ok = false;
        } while (ok && next_index_tuple(pick, rows.size()));
      }
      closed.push_back(ok);
    }
    rep.op_closure.push_back(closed);
  }
  return rep;
}

CoordinateAnalysis coordinate_congruence_analysis(const std::vector<Tuple>& s, int domain_size, const Congruence& theta,
                                                   const std::vector<FiniteOperation>& action,
                                                   const std::set<std::pair<Value, Value>>* edges) {
  CoordinateAnalysis out;
  if (s.empty()) throw std::invalid_argument("empty tuple set");
  if (theta.block.size() != s.size()) throw std::invalid_argument("congruence size does not match the tuple set");
  const int n = static_cast<int>(s.front().size());
  std::map<Tuple, std::size_t> index;
  for (std::size_t i = 0; i < s.size(); ++i) index[s[i]] = i;

  // Compatibility with the action, one argument position at a time.
  for (const auto& f : action) {
    if (f.domain_size() != domain_size) throw std::invalid_argument("action operation on a different domain");
    const int r = f.arity();
    for (int pos = 0; pos < r && out.failure.empty(); ++pos) {
      for (std::size_t x = 0; x < s.size() && out.failure.empty(); ++x) {
        for (std::size_t y = x + 1; y < s.size() && out.failure.empty(); ++y) {
          if (!theta.related(static_cast<int>(x), static_cast<int>(y))) continue;
          std::vector<std::size_t> ctx(static_cast<std::size_t>(r - 1), 0);
          do {
            Tuple ix, iy;
            for (int i = 0; i < n; ++i) {
              Tuple cx, cy;
              for (int j = 0, c = 0; j < r; ++j) {
                if (j == pos) {
                  cx.push_back(s[x][static_cast<std::size_t>(i)]);
                  cy.push_back(s[y][static_cast<std::size_t>(i)]);
                } else {
                  Value v = s[ctx[static_cast<std::size_t>(c++)]][static_cast<std::size_t>(i)];
                  cx.push_back(v);
                  cy.push_back(v);
                }
              }
              ix.push_back(f(cx));
              iy.push_back(f(cy));
            }
            auto a = index.find(ix), b = index.find(iy);
            if (a == index.end() || b == index.end()) {
              out.failure = "tuple set is not closed under the action";
              break;
            }
            if (!theta.related(static_cast<int>(a->second), static_cast<int>(b->second))) {
              out.failure = "congruence is not compatible with the action";
              break;
            }
          } while (!ctx.empty() && next_index_tuple(ctx, s.size()));
        }
      }
    }
  }
  if (!out.failure.empty()) return out;

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      bool all_edge = edges != nullptr, all_equal = true;
      for (const auto& t : s) {
        Value a = t[static_cast<std::size_t>(i)], b = t[static_cast<std::size_t>(j)];
        if (edges && !edges->count({a, b})) all_edge = false;
        if (a != b) all_equal = false;
      }
      if (all_edge) out.edge_pairs.emplace_back(i, j);
      else if (all_equal) out.equal_pairs.emplace_back(i, j);
      else out.free_pairs.emplace_back(i, j);
    }
  }
  if (edges) {
    for (const auto& t : s) {
      bool ok = std::all_of(out.free_pairs.begin(), out.free_pairs.end(), [&](const std::pair<int, int>& p) {
        return !edges->count({t[static_cast<std::size_t>(p.first)], t[static_cast<std::size_t>(p.second)]});
      });
      if (ok) {
        out.free_non_edge_tuple = t;
        break;
      }
    }
  }

  auto agreement = [&](const Tuple& a, const Tuple& b) {
    std::vector<int> set;
    for (int i = 0; i < n; ++i) {
      if (a[static_cast<std::size_t>(i)] == b[static_cast<std::size_t>(i)]) set.push_back(i);
    }
    return set;
  };
  std::map<std::vector<int>, std::pair<bool, bool>> by_set;  // related seen, unrelated seen
  for (std::size_t x = 0; x < s.size(); ++x) {
    for (std::size_t y = 0; y < s.size(); ++y) {
      auto& e = by_set[agreement(s[x], s[y])];
      if (theta.related(static_cast<int>(x), static_cast<int>(y))) e.first = true;
      else e.second = true;
    }
  }
  std::set<std::vector<int>> w;
  for (const auto& [set, flags] : by_set) {
    if (flags.first && flags.second) out.depends_only_on_agreement = false;
    if (flags.first) w.insert(set);
  }
  out.w_family.assign(w.begin(), w.end());
  out.empty_in_w = w.count({}) > 0;
  for (const auto& x : w) {
    for (const auto& [y, flags] : by_set) {
      if (!w.count(y) && std::includes(y.begin(), y.end(), x.begin(), x.end())) out.upward_closed = false;
    }
    for (const auto& y : w) {
      std::vector<int> meet;
      std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(meet));
      if (by_set.count(meet) && !w.count(meet)) out.intersection_closed = false;
    }
  }
  if (!out.depends_only_on_agreement) out.failure = "relatedness is not a function of the agreement set";
  else if (!out.upward_closed) out.failure = "agreement family is not upward closed";
  else if (!out.intersection_closed) out.failure = "agreement family is not closed under realized intersections";
  else if (out.empty_in_w) out.failure = "empty agreement set is related; no witness coordinate";
  if (!out.failure.empty()) return out;

  std::vector<int> common;
  for (int i = 0; i < n; ++i) common.push_back(i);
  for (const auto& x : w) {
    std::vector<int> meet;
    std::set_intersection(common.begin(), common.end(), x.begin(), x.end(), std::back_inserter(meet));
    common = meet;
  }
  if (common.empty()) out.failure = "intersection of the agreement family is empty";
  else out.witness = common.front();
  return out;
}

}  // namespace clonekit
