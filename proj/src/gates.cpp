#include "clonekit/gates.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>

#include "clonekit/tuples.hpp"

namespace clonekit {

namespace {

std::string tuple_text(const std::vector<int>& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
  return s + ")";
}

std::string nat_text(const NatTuple& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
  return s + ")";
}

std::string indices_text(const std::vector<int>& t) { return tuple_text(t); }

}  // namespace

// ---------------------------------------------------------------------------------------------------------------

Nat EssentiallyInjectiveFunction::operator()(const NatTuple& x) const { return core(project(x)); }

NatTuple EssentiallyInjectiveFunction::project(const NatTuple& x) const {
  if (static_cast<int>(x.size()) != arity) throw std::invalid_argument("tuple length does not match arity");
  NatTuple y;
  y.reserve(indices.size());
  for (int i : indices) y.push_back(x[static_cast<std::size_t>(i - 1)]);
  return y;
}

NatTuple EssentiallyInjectiveFunction::embed(const NatTuple& y) const {
  if (y.size() != indices.size()) throw std::invalid_argument("core tuple has the wrong length");
  NatTuple x(static_cast<std::size_t>(arity), 0);
  for (std::size_t j = 0; j < indices.size(); ++j) x[static_cast<std::size_t>(indices[j] - 1)] = y[j];
  return x;
}

Evaluator EssentiallyInjectiveFunction::as_evaluator() const {
  Evaluator e;
  e.arity = arity;
  e.finite_domain = core.finite_domain;
  auto self = *this;
  e.fn = [self](const NatTuple& x) { return self(x); };
  return e;
}

EssentiallyInjectiveFunction make_essentially_injective(int n, std::vector<int> indices, Evaluator core) {
  if (n < 1) throw std::invalid_argument("arity must be positive");
  if (indices.empty()) throw std::invalid_argument("an essentially injective function needs an essential coordinate");
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] < 1 || indices[j] > n) throw std::invalid_argument("index out of range");
    if (j && indices[j] <= indices[j - 1]) throw std::invalid_argument("indices must increase");
  }
  if (core.arity != static_cast<int>(indices.size())) throw std::invalid_argument("core arity differs from index count");
  return {n, std::move(indices), std::move(core)};
}

HornResult horn_canonical_form(const Evaluator& g, int probe_width, std::size_t max_probe) {
  HornResult r;
  const int n = g.arity;
  int m = probe_width;
  if (g.finite_domain) m = std::min(m, *g.finite_domain);
  r.probe_width = m;
  if (m < 2) {
    r.verdict = HornVerdict::Undetermined;
    for (int k = 1; k <= n; ++k)
      for (auto c : combinations(n, k)) {
        for (int& i : c) ++i;
        r.candidates.push_back(c);
      }
    return r;
  }
  const std::size_t total = tuple_count(m, n);
  if (total > max_probe) throw std::invalid_argument("probe of " + std::to_string(total) + " tuples exceeds the limit");

  std::vector<Nat> val(total);
  Tuple t(static_cast<std::size_t>(n), 0);
  auto as_nat = [](const Tuple& x) { return NatTuple(x.begin(), x.end()); };
  for (std::size_t idx = 0; idx < total; ++idx) {
    t = unrank_tuple(m, n, idx);
    val[idx] = g(as_nat(t));
  }
  r.evaluations = total;

  // Coordinate i is essential when resetting it to 0 changes the value somewhere on the probe.
  std::vector<std::optional<std::pair<NatTuple, NatTuple>>> change(static_cast<std::size_t>(n));
  for (std::size_t idx = 0; idx < total; ++idx) {
    t = unrank_tuple(m, n, idx);
    for (int i = 0; i < n; ++i) {
      auto& c = change[static_cast<std::size_t>(i)];
      if (c || t[static_cast<std::size_t>(i)] == 0) continue;
      Tuple z = t;
      z[static_cast<std::size_t>(i)] = 0;
      if (val[rank_tuple(m, z)] != val[idx]) c = std::make_pair(as_nat(z), as_nat(t));
    }
  }
  std::vector<int> I;
  for (int i = 0; i < n; ++i)
    if (change[static_cast<std::size_t>(i)]) I.push_back(i + 1);

  if (I.empty()) {
    r.verdict = HornVerdict::Rejected;
    r.witness.push_back({NatTuple(static_cast<std::size_t>(n), 0), NatTuple(static_cast<std::size_t>(n), 1)});
    return r;
  }

  // Dummies are irrelevant on the probe, so injectivity is checked on tuples that vanish off I.
  const int k = static_cast<int>(I.size());
  std::unordered_map<Nat, NatTuple> seen;
  Tuple y(static_cast<std::size_t>(k), 0);
  do {
    Tuple x(static_cast<std::size_t>(n), 0);
    for (int j = 0; j < k; ++j) x[static_cast<std::size_t>(I[static_cast<std::size_t>(j)] - 1)] = y[static_cast<std::size_t>(j)];
    const Nat v = val[rank_tuple(m, x)];
    auto [it, fresh] = seen.emplace(v, as_nat(x));
    if (!fresh) {
      r.verdict = HornVerdict::Rejected;
      r.witness.push_back({it->second, as_nat(x)});
      for (int i : I) r.witness.push_back(*change[static_cast<std::size_t>(i - 1)]);
      return r;
    }
  } while (next_tuple(y, m));

  Evaluator core;
  core.arity = k;
  core.finite_domain = g.finite_domain;
  core.fn = [g, I, n](const NatTuple& z) {
    NatTuple x(static_cast<std::size_t>(n), 0);
    for (std::size_t j = 0; j < I.size(); ++j) x[static_cast<std::size_t>(I[j] - 1)] = z[j];
    return g(x);
  };
  r.verdict = HornVerdict::EssentiallyInjective;
  r.form = make_essentially_injective(n, I, std::move(core));
  return r;
}

bool witness_refutes(const Evaluator& g, const std::vector<std::pair<NatTuple, NatTuple>>& witness,
                     const std::vector<int>& indices) {
  for (const auto& [x, y] : witness) {
    bool same = true;
    for (int i : indices) same = same && x[static_cast<std::size_t>(i - 1)] == y[static_cast<std::size_t>(i - 1)];
    const bool equal = g(x) == g(y);
    if ((equal && !same) || (same && !equal)) return true;
  }
  return false;
}

bool witness_refutes_all(const Evaluator& g, const std::vector<std::pair<NatTuple, NatTuple>>& witness) {
  for (int k = 1; k <= g.arity; ++k)
    for (auto c : combinations(g.arity, k)) {
      for (int& i : c) ++i;
      if (!witness_refutes(g, witness, c)) return false;
    }
  return true;
}

EssentiallyInjectiveFunction horn_gate(int n, std::vector<int> indices) {
  const int k = static_cast<int>(indices.size());
  if (k < 1) throw std::invalid_argument("a gate needs at least one essential coordinate");
  auto en = TupleEnumeration::countable(k);
  return make_essentially_injective(n, std::move(indices), nat_evaluator(k, [en](const NatTuple& y) { return en.rank(y); }));
}

HornDecomposition horn_gate_decompose(const EssentiallyInjectiveFunction& g, const EssentiallyInjectiveFunction& gate,
                                      Nat support_size, Nat inversion_budget) {
  if (g.arity != gate.arity || g.indices != gate.indices)
    throw PieceMismatch("pieces differ: arity " + std::to_string(g.arity) + " indices " + indices_text(g.indices) +
                        " against arity " + std::to_string(gate.arity) + " indices " + indices_text(gate.indices));
  if (g.core.finite_domain || gate.core.finite_domain)
    throw std::invalid_argument("gate decomposition works on countable cores");
  const int k = static_cast<int>(g.indices.size());
  auto en = TupleEnumeration::countable(k);

  std::vector<std::optional<NatTuple>> pre(support_size);
  std::unordered_map<Nat, Nat> hit;
  Nat found = 0;
  for (Nat i = 0; i < inversion_budget && found < support_size; ++i) {
    NatTuple y = en.unrank(i);
    const Nat v = gate.core(y);
    if (!hit.emplace(v, i).second) throw std::invalid_argument("gate core is not injective at value " + std::to_string(v));
    if (v < support_size) {
      pre[v] = std::move(y);
      ++found;
    }
  }
  if (found < support_size) throw InsufficientConvergence(found, support_size);

  HornDecomposition out;
  out.alpha.reserve(support_size);
  for (Nat v = 0; v < support_size; ++v) out.alpha.push_back(g.core(*pre[v]));
  for (Nat v = 0; v < support_size; ++v) {
    const NatTuple x = gate.embed(*pre[v]);
    if (gate(x) != v || g(x) != out.alpha[v]) {
      out.failure = "g and alpha o gate differ at " + nat_text(x);
      return out;
    }
  }
  out.verified = true;
  return out;
}

// ---------------------------------------------------------------------------------------------------------------

GraphGate::GraphGate(GateOptions options) : options_(options), rng_(options.seed) {
  if (options_.arity < 1 || options_.arity > options_.arity_cap)
    throw std::invalid_argument("gate arity " + std::to_string(options_.arity) + " outside 1.." +
                                std::to_string(options_.arity_cap));
  if (!options_.injective && options_.arity != 1) throw std::invalid_argument("a non-injective gate must be unary");
  for (int i = 0; i < options_.initial_a; ++i) add_point(Side::A);
  saturate(Side::A, options_.probe_window, options_.probe_cap);
  const int e = std::min<int>(options_.eager_a, static_cast<int>(a_points_.size()));
  if (e > 0) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(options_.arity), 0);
    do {
      std::vector<int> u;
      for (auto i : idx) u.push_back(a_points_[i]);
      phi(u);
    } while (next_index_tuple(idx, static_cast<std::size_t>(e)));
  }
  for (int i = 0; i < options_.initial_free_b; ++i) add_point(Side::B);
  saturate(Side::B, options_.probe_window, options_.probe_cap);
}

bool GraphGate::random_bit() { return (rng_() & 1u) != 0; }

bool GraphGate::edge(int x, int y) const {
  if (x == y) return false;
  if (x < y) std::swap(x, y);
  if (x >= size() || y < 0) throw std::out_of_range("gate point not built");
  return adj_[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] != 0;
}

int GraphGate::add_point(Side s, const std::map<int, bool>& prescribed, bool random_rest) {
  for (const auto& [q, v] : prescribed) {
    (void)v;
    if (q < 0 || q >= size() || side(q) != s) throw std::invalid_argument("prescribed adjacency to a point off this side");
  }
  const int id = size();
  side_.push_back(s);
  adj_.emplace_back(static_cast<std::size_t>(id), 0);
  for (int q : points(s)) {
    auto it = prescribed.find(q);
    const bool v = it != prescribed.end() ? it->second : (random_rest && random_bit());
    adj_[static_cast<std::size_t>(id)][static_cast<std::size_t>(q)] = v ? 1 : 0;
  }
  (s == Side::A ? a_points_ : b_points_).push_back(id);
  return id;
}

std::optional<int> GraphGate::phi_built(const std::vector<int>& u) const {
  auto it = phi_.find(u);
  if (it == phi_.end()) return std::nullopt;
  return it->second;
}

namespace {

bool all_adjacent(const GraphGate& g, const std::vector<int>& u, const std::vector<int>& v) {
  for (std::size_t k = 0; k < u.size(); ++k)
    if (!g.edge(u[k], v[k])) return false;
  return true;
}

}  // namespace

int GraphGate::phi(const std::vector<int>& u, const std::map<int, bool>& overrides) {
  if (static_cast<int>(u.size()) != arity()) throw std::invalid_argument("phi takes " + std::to_string(arity()) + " arguments");
  for (int a : u)
    if (a < 0 || a >= size() || side(a) != Side::A) throw std::invalid_argument("phi is defined on A points only");
  if (auto b = phi_built(u)) return *b;
  std::map<int, bool> prescribed = overrides;
  for (const auto& [v, c] : phi_) {
    if (!all_adjacent(*this, u, v)) continue;
    auto it = prescribed.find(c);
    if (it != prescribed.end() && !it->second)
      throw std::invalid_argument("override removes the forced edge from phi" + tuple_text(u) + " to " + std::to_string(c));
    prescribed[c] = true;
  }
  const int b = add_point(Side::B, prescribed, true);
  phi_[u] = b;
  psi_[b].push_back(u);
  return b;
}

bool GraphGate::phi_assign(const std::vector<int>& u, int b) {
  if (static_cast<int>(u.size()) != arity() || b < 0 || b >= size() || side(b) != Side::B) return false;
  if (auto c = phi_built(u)) return *c == b;
  if (options_.injective && psi_.count(b)) return false;
  for (const auto& [v, c] : phi_)
    if (all_adjacent(*this, u, v) && !edge(b, c)) return false;
  phi_[u] = b;
  psi_[b].push_back(u);
  return true;
}

std::optional<int> GraphGate::psi(int k, int b) const {
  if (!options_.injective || k < 1 || k > arity()) return std::nullopt;
  auto it = psi_.find(b);
  if (it == psi_.end()) return std::nullopt;
  return it->second.front()[static_cast<std::size_t>(k - 1)];
}

std::optional<std::string> GraphGate::check_axioms() const {
  if (a_points_.size() + b_points_.size() != side_.size()) return std::string("A and B do not partition the points");
  for (int a : a_points_)
    if (side(a) != Side::A) return "point " + std::to_string(a) + " listed in A";
  for (int b : b_points_)
    if (side(b) != Side::B) return "point " + std::to_string(b) + " listed in B";
  for (int x = 0; x < size(); ++x)
    for (int y = 0; y < x; ++y)
      if (edge(x, y) && side(x) != side(y)) return "edge across sides between " + std::to_string(x) + " and " + std::to_string(y);
  for (const auto& [u, b] : phi_) {
    if (static_cast<int>(u.size()) != arity()) return "phi tuple of wrong length " + tuple_text(u);
    for (int a : u)
      if (side(a) != Side::A) return "phi argument off A in " + tuple_text(u);
    if (side(b) != Side::B) return "phi value off B at " + tuple_text(u);
  }
  if (options_.injective)
    for (const auto& [b, us] : psi_)
      if (us.size() != 1) return "phi is not injective at " + std::to_string(b);
  for (auto i = phi_.begin(); i != phi_.end(); ++i)
    for (auto j = std::next(i); j != phi_.end(); ++j)
      if (all_adjacent(*this, i->first, j->first) && !edge(i->second, j->second))
        return "phi drops the edge between " + tuple_text(i->first) + " and " + tuple_text(j->first);
  if (options_.injective)
    for (const auto& [u, b] : phi_)
      for (int k = 1; k <= arity(); ++k)
        if (psi(k, b) != u[static_cast<std::size_t>(k - 1)])
          return "psi_" + std::to_string(k) + " does not invert phi at " + tuple_text(u);
  return std::nullopt;
}

std::optional<SideFailure> GraphGate::extension_probe(Side s, int window, int cap) const {
  const auto& pts = points(s);
  const int w = std::min<int>(window, static_cast<int>(pts.size()));
  for (int k = 1; k <= cap && k <= w; ++k)
    for (const auto& c : combinations(w, k)) {
      std::vector<int> subset;
      for (int i : c) subset.push_back(pts[static_cast<std::size_t>(i)]);
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
        bool found = false;
        for (int q : pts) {
          if (std::find(subset.begin(), subset.end(), q) != subset.end()) continue;
          bool ok = true;
          for (int j = 0; j < k && ok; ++j) ok = edge(q, subset[static_cast<std::size_t>(j)]) == (((mask >> j) & 1u) != 0);
          if (ok) {
            found = true;
            break;
          }
        }
        if (!found) {
          SideFailure f{subset, {}};
          for (int j = 0; j < k; ++j) f.pattern.push_back(((mask >> j) & 1u) != 0);
          return f;
        }
      }
    }
  return std::nullopt;
}

std::size_t GraphGate::saturate(Side s, int window, int cap) {
  std::size_t added = 0;
  while (auto f = extension_probe(s, window, cap)) {
    std::map<int, bool> pres;
    for (std::size_t j = 0; j < f->subset.size(); ++j) pres[f->subset[j]] = f->pattern[j];
    add_point(s, pres, true);
    ++added;
  }
  return added;
}

FiniteStructure GraphGate::side_structure(Side s) const {
  const auto& pts = points(s);
  FiniteStructure out({RelationSymbol{"E", 2, true, true}}, static_cast<int>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (edge(pts[i], pts[j])) out.set(0, {static_cast<int>(i), static_cast<int>(j)}, true);
  return out;
}

std::string GraphGate::serialize() const {
  std::ostringstream os;
  os << "clonekit.gate/1 arity " << arity() << " injective " << (options_.injective ? 1 : 0) << " points " << size()
     << "\n";
  os << "sides ";
  for (int p = 0; p < size(); ++p) os << (side(p) == Side::A ? 'A' : 'B');
  os << "\n";
  for (int x = 1; x < size(); ++x) {
    for (int y = 0; y < x; ++y) os << (edge(x, y) ? '1' : '0');
    os << "\n";
  }
  for (const auto& [u, b] : phi_) os << "phi " << tuple_text(u) << " " << b << "\n";
  return os.str();
}

GateBundle build_horn_gate(int n, std::vector<int> indices) {
  GateBundle g;
  g.arity = n;
  g.indices = indices;
  g.horn = horn_gate(n, std::move(indices));
  return g;
}

GateBundle build_graph_gate(int n, std::uint64_t seed, GateOptions options) {
  options.arity = n;
  options.seed = seed;
  GateBundle g;
  g.arity = n;
  for (int i = 1; i <= n; ++i) g.indices.push_back(i);
  auto gate = std::make_shared<GraphGate>(options);
  if (auto v = gate->check_axioms()) throw std::logic_error("gate axioms fail after construction: " + *v);
  g.graph = std::move(gate);
  return g;
}

// ---------------------------------------------------------------------------------------------------------------

namespace {

struct GraphSlots {
  int e = -1;
  std::size_t self_u = 0, pair_e = 0, S = 0, P = 0;
};

GraphSlots graph_slots(const RichPartition& w) {
  const auto& L = w.limit();
  GraphSlots s;
  s.e = L.relation_index("E");
  if (s.e < 0) throw std::invalid_argument("the world has no relation E");
  const auto& layout = L.layout();
  s.S = layout.self.size();
  s.P = layout.pair.size();
  bool have_u = false, have_e = false;
  for (std::size_t j = 0; j < s.S; ++j)
    if (layout.self[j].rel == w.u()) s.self_u = j, have_u = true;
  for (std::size_t j = 0; j < s.P; ++j)
    if (layout.pair[j].rel == s.e) s.pair_e = j, have_e = true;
  if (!have_u || !have_e) throw std::invalid_argument("the world's layout lacks U or E");
  return s;
}

// One-point type in a graph world: adjacency to the listed points and membership in U; -1 leaves a fact open.
OnePointType graph_type(const RichPartition& w, const GraphSlots& s, const std::map<int, std::int8_t>& edges,
                        std::int8_t u) {
  std::vector<int> base;
  for (const auto& [p, v] : edges) {
    (void)v;
    base.push_back(p);
  }
  OnePointType t = w.limit().blank_type(base);
  t.facts[s.self_u] = u;
  std::size_t i = 0;
  for (const auto& [p, v] : edges) {
    (void)p;
    t.facts[s.S + i * s.P + s.pair_e] = v;
    ++i;
  }
  return t;
}

bool world_edge(const RichPartition& w, int e, int x, int y) { return x != y && w.limit().holds(e, x, y); }

bool coordinatewise(const RichPartition& w, int e, const std::vector<int>& p, const std::vector<int>& q) {
  for (std::size_t k = 0; k < p.size(); ++k)
    if (!world_edge(w, e, p[k], q[k])) return false;
  return true;
}

std::optional<PreconditionViolation> check_world_inputs(const RichPartition& w, int e,
                                                        const std::vector<std::vector<int>>& support,
                                                        const std::vector<int>& values, bool injective) {
  if (support.size() != values.size()) throw std::invalid_argument("support and values differ in length");
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (values[i] < 0 || values[i] >= w.limit().size()) throw std::invalid_argument("value is not a built world point");
    if (w.in_u(values[i]))
      return PreconditionViolation{"g" + tuple_text(support[i]) + " = " + std::to_string(values[i]) + " lies in U",
                                   {support[i]}};
  }
  if (injective) {
    std::map<int, std::size_t> seen;
    for (std::size_t i = 0; i < values.size(); ++i) {
      auto [it, fresh] = seen.emplace(values[i], i);
      if (!fresh)
        return PreconditionViolation{"g identifies " + tuple_text(support[it->second]) + " and " + tuple_text(support[i]),
                                     {support[it->second], support[i]}};
    }
  }
  for (std::size_t i = 0; i < support.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (coordinatewise(w, e, support[i], support[j]) && !world_edge(w, e, values[i], values[j]))
        return PreconditionViolation{"g drops the edge between " + tuple_text(support[j]) + " and " + tuple_text(support[i]),
                                     {support[j], support[i]}};
  return std::nullopt;
}

}  // namespace

RandomPolymorphism::RandomPolymorphism(RichPartition& world, PolymorphismOptions options)
    : world_(&world), options_(options), rng_(options.seed) {
  if (options_.arity < 1) throw std::invalid_argument("arity must be positive");
}

int RandomPolymorphism::operator()(const std::vector<int>& p) {
  auto it = values_.find(p);
  if (it != values_.end()) return it->second;
  if (static_cast<int>(p.size()) != options_.arity) throw std::invalid_argument("wrong number of arguments");
  auto& L = world_->limit();
  for (int x : p)
    if (x < 0 || x >= L.size()) throw std::invalid_argument("argument is not a built world point");
  const auto slots = graph_slots(*world_);

  std::map<int, std::int8_t> edges;
  std::set<int> image;
  for (const auto& [q, v] : values_) {
    image.insert(v);
    if (coordinatewise(*world_, slots.e, p, q))
      edges[v] = 1;
    else if (options_.injective && !edges.count(v))
      edges[v] = static_cast<std::int8_t>(rng_() & 1u);
  }
  if (!options_.injective && options_.collapse > 0 &&
      std::uniform_real_distribution<double>(0, 1)(rng_) < options_.collapse) {
    for (int c : image) {
      if (options_.avoid_u && world_->in_u(c)) continue;
      bool ok = true;
      for (const auto& [v, bit] : edges)
        if (bit == 1 && !world_edge(*world_, slots.e, c, v)) ok = false;
      if (ok) return values_[p] = c;
    }
  }
  const std::int8_t u = options_.avoid_u ? 0 : -1;
  std::function<bool(int)> accept;
  if (options_.injective) accept = [&image](int q) { return !image.count(q); };
  const int r = L.realize(graph_type(*world_, slots, edges, u), accept);
  return values_[p] = r;
}

std::vector<std::vector<int>> enumerated_support(RichPartition& world, int arity, std::size_t count) {
  auto en = TupleEnumeration::countable(arity);
  std::vector<std::vector<int>> out;
  Nat top = 0;
  for (std::size_t i = 0; i < count; ++i) {
    auto t = en.unrank(i);
    std::vector<int> p;
    for (Nat x : t) {
      p.push_back(static_cast<int>(x));
      top = std::max(top, x);
    }
    out.push_back(std::move(p));
  }
  if (count) world.limit().ensure(static_cast<int>(top) + 1);
  return out;
}

GraphDecomposition gate_decompose_graph(const RichPartition& world, const std::vector<std::vector<int>>& support,
                                        const std::vector<int>& values, const GateBundle& bundle,
                                        DecomposeOptions options) {
  if (!bundle.graph) throw std::invalid_argument("bundle carries no graph gate");
  const int n = bundle.graph->arity();
  const bool injective = bundle.graph->options().injective;
  for (const auto& p : support)
    if (static_cast<int>(p.size()) != n) throw std::invalid_argument("support tuple of the wrong arity");
  const auto slots = graph_slots(world);
  const int E = slots.e;

  GraphDecomposition out;
  if ((out.violation = check_world_inputs(world, E, support, values, injective))) return out;
  out.gate = std::make_shared<GraphGate>(*bundle.graph);
  out.world = std::make_shared<RichPartition>(world);
  auto& gate = *out.gate;
  auto& w = *out.world;
  using Side = GraphGate::Side;

  out.beta.assign(static_cast<std::size_t>(n), {});
  std::set<int> alpha_image;
  std::map<int, int> point_of_value;  // g value -> gate point already carrying it

  for (std::size_t i = 0; i < support.size(); ++i) {
    const auto& p = support[i];
    const int gv = values[i];
    std::optional<int> collapse;
    if (!injective)
      if (auto it = point_of_value.find(gv); it != point_of_value.end()) collapse = it->second;

    std::vector<int> u(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      auto& bk = out.beta[static_cast<std::size_t>(k)];
      const int x = p[static_cast<std::size_t>(k)];
      if (auto it = bk.find(x); it != bk.end()) {
        u[static_cast<std::size_t>(k)] = it->second;
        continue;
      }
      std::map<int, bool> pres;
      for (const auto& [y, a] : bk) pres[a] = world_edge(w, E, x, y);
      if (collapse)
        for (const auto& [v, c] : gate.phi_table())
          if (!pres.count(v[0]) && (c == *collapse || !gate.edge(*collapse, c))) pres[v[0]] = false;
      const int a = gate.add_point(Side::A, pres, true);
      bk[x] = a;
      u[static_cast<std::size_t>(k)] = a;
      out.steps.push_back("beta_" + std::to_string(k + 1) + "(" + std::to_string(x) + ") = " + std::to_string(a));
    }

    int b;
    if (collapse) {
      if (!gate.phi_assign(u, *collapse)) {
        out.failure = "phi cannot send " + tuple_text(u) + " to " + std::to_string(*collapse);
        return out;
      }
      b = *collapse;
    } else if (auto built = gate.phi_built(u)) {
      b = *built;
    } else {
      std::map<int, bool> overrides;
      for (const auto& [c, y] : out.alpha) overrides[c] = world_edge(w, E, gv, y);
      b = gate.phi(u, overrides);
    }
    if (auto it = out.alpha.find(b); it != out.alpha.end()) {
      if (it->second != gv) {
        out.failure = "gate point " + std::to_string(b) + " already sent to " + std::to_string(it->second);
        return out;
      }
    } else {
      out.alpha[b] = gv;
      alpha_image.insert(gv);
      out.steps.push_back("alpha(" + std::to_string(b) + ") = " + std::to_string(gv) + " in range");
    }
    point_of_value[gv] = b;
    out.gate_points.push_back(b);

    if (!options.interleave) continue;
    // Out of range: a free B point goes to U, which the image of g avoids.
    for (int c : gate.points(Side::B)) {
      if (out.alpha.count(c) || gate.in_phi_range(c)) continue;
      std::map<int, std::int8_t> edges;
      for (const auto& [d, y] : out.alpha) {
        auto& slot = edges[y];
        slot = static_cast<std::int8_t>(std::max<int>(slot, gate.edge(c, d) ? 1 : 0));
      }
      const int y = w.limit().realize(graph_type(w, slots, edges, 1), [&](int q) { return !alpha_image.count(q); });
      out.alpha[c] = y;
      alpha_image.insert(y);
      out.steps.push_back("alpha(" + std::to_string(c) + ") = " + std::to_string(y) + " out of range");
      break;
    }
  }
  for (const auto& [u, b] : gate.phi_table())
    if (!out.alpha.count(b)) out.deferred.push_back(b);

  // Pointwise verification.
  for (std::size_t i = 0; i < support.size(); ++i) {
    std::vector<int> u;
    for (int k = 0; k < n; ++k) u.push_back(out.beta[static_cast<std::size_t>(k)].at(support[i][static_cast<std::size_t>(k)]));
    auto b = gate.phi_built(u);
    if (!b || *b != out.gate_points[i] || out.alpha.at(*b) != values[i]) {
      out.failure = "decomposition differs from g at " + tuple_text(support[i]);
      return out;
    }
  }
  for (int k = 0; k < n; ++k) {
    const auto& bk = out.beta[static_cast<std::size_t>(k)];
    std::set<int> img;
    for (auto i = bk.begin(); i != bk.end(); ++i) {
      if (!img.insert(i->second).second) {
        out.failure = "beta_" + std::to_string(k + 1) + " is not injective";
        return out;
      }
      for (auto j = bk.begin(); j != i; ++j)
        if (world_edge(w, E, i->first, j->first) != gate.edge(i->second, j->second)) {
          out.failure = "beta_" + std::to_string(k + 1) + " is not an embedding at " + std::to_string(j->first) + "," +
                        std::to_string(i->first);
          return out;
        }
    }
  }
  std::set<int> img;
  for (auto i = out.alpha.begin(); i != out.alpha.end(); ++i) {
    if (!img.insert(i->second).second) {
      out.failure = "alpha is not injective";
      return out;
    }
    for (auto j = out.alpha.begin(); j != i; ++j)
      if (gate.edge(i->first, j->first) != world_edge(w, E, i->second, j->second)) {
        out.failure = "alpha is not an embedding at " + std::to_string(j->first) + "," + std::to_string(i->first);
        return out;
      }
  }
  if (auto v = gate.check_axioms()) {
    out.failure = "gate axioms: " + *v;
    return out;
  }
  out.verified = true;
  return out;
}

std::size_t decomposition_agreement(const GraphDecomposition& x, const GraphDecomposition& y,
                                    const std::vector<std::vector<int>>& support) {
  std::size_t i = 0;
  const std::size_t m = std::min({x.gate_points.size(), y.gate_points.size(), support.size()});
  for (; i < m; ++i) {
    if (x.gate_points[i] != y.gate_points[i]) break;
    bool same = true;
    for (std::size_t k = 0; k < x.beta.size() && same; ++k) {
      const int p = support[i][k];
      same = x.beta[k].at(p) == y.beta[k].at(p);
    }
    if (!same || x.alpha.at(x.gate_points[i]) != y.alpha.at(y.gate_points[i])) break;
  }
  return i;
}

HfDecomposition hf_decompose(const RichPartition& world, const std::vector<std::vector<int>>& support,
                             const std::vector<int>& values, DecomposeOptions options) {
  const auto slots = graph_slots(world);
  const int E = slots.e;
  HfDecomposition out;
  if ((out.violation = check_world_inputs(world, E, support, values, false))) return out;
  out.world = std::make_shared<RichPartition>(world);
  auto& w = *out.world;
  auto& L = w.limit();

  for (std::size_t i = 0; i < support.size(); ++i) {
    const int gv = values[i];
    std::map<int, std::int8_t> edges;
    for (const auto& [v, y] : out.h) edges[v] = world_edge(w, E, gv, y) ? 1 : 0;
    const int x = L.realize(graph_type(w, slots, edges, -1), [&](int q) { return !out.h.count(q); });
    out.f.push_back(x);
    out.h[x] = gv;
    out.steps.push_back("f" + tuple_text(support[i]) + " = " + std::to_string(x) + ", h(" + std::to_string(x) +
                        ") = " + std::to_string(gv));
    if (!options.interleave) continue;
    for (int c = 0; c < L.size(); ++c) {
      if (out.h.count(c)) continue;
      std::map<int, std::int8_t> need;
      for (const auto& [v, y] : out.h)
        if (world_edge(w, E, c, v)) need[y] = 1;
      const int y = L.realize(graph_type(w, slots, need, 1));
      out.h[c] = y;
      out.steps.push_back("h(" + std::to_string(c) + ") = " + std::to_string(y) + " off the range");
      break;
    }
  }

  for (std::size_t i = 0; i < support.size(); ++i) {
    if (out.h.at(out.f[i]) != values[i]) {
      out.failure = "h o f differs from g at " + tuple_text(support[i]);
      return out;
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (out.f[i] == out.f[j]) {
        out.failure = "f is not injective";
        return out;
      }
      if (coordinatewise(w, E, support[i], support[j]) && !world_edge(w, E, out.f[i], out.f[j])) {
        out.failure = "f drops an edge at " + tuple_text(support[i]);
        return out;
      }
    }
  }
  for (auto i = out.h.begin(); i != out.h.end(); ++i)
    for (auto j = out.h.begin(); j != i; ++j)
      if (world_edge(w, E, i->first, j->first) && !world_edge(w, E, i->second, j->second)) {
        out.failure = "h drops the edge " + std::to_string(j->first) + "," + std::to_string(i->first);
        return out;
      }
  out.verified = true;
  return out;
}

std::size_t hf_agreement(const HfDecomposition& x, const HfDecomposition& y) {
  std::size_t i = 0;
  const std::size_t m = std::min(x.f.size(), y.f.size());
  while (i < m && x.f[i] == y.f[i] && x.h.at(x.f[i]) == y.h.at(y.f[i])) ++i;
  return i;
}

// ---------------------------------------------------------------------------------------------------------------

ComposedView::ComposedView(const FunctionClone& base, FiniteOperation e) : base_(&base), e_(std::move(e)) {
  if (e_.arity() != 1 || e_.domain_size() != base.domain_size())
    throw std::invalid_argument("e must be unary on the clone's domain");
  inverse_.assign(static_cast<std::size_t>(e_.domain_size()), -1);
  for (Value a = 0; a < e_.domain_size(); ++a) {
    const Value v = e_({a});
    auto& slot = inverse_[static_cast<std::size_t>(v)];
    if (slot >= 0) throw NotInjective(slot, a);
    slot = a;
  }
}

FiniteOperation ComposedView::psi(const FiniteOperation& f) const { return compose(e_, {f}); }

bool ComposedView::contains(const FiniteOperation& g) const {
  if (g.domain_size() != e_.domain_size()) return false;
  if (g.projection_index() > 0) return true;
  std::vector<Value> pre;
  pre.reserve(g.table().size());
  for (Value v : g.table()) {
    const Value a = inverse_[static_cast<std::size_t>(v)];
    if (a < 0) return false;
    pre.push_back(a);
  }
  return base_->contains(FiniteOperation(g.domain_size(), g.arity(), std::move(pre)));
}

std::vector<FiniteOperation> ComposedView::members(int arity) const {
  std::set<FiniteOperation> out;
  for (int k = 1; k <= arity; ++k) out.insert(FiniteOperation::projection(e_.domain_size(), arity, k));
  for (const auto& f : base_->members(arity)) out.insert(psi(f));
  return {out.begin(), out.end()};
}

ComposedView e_compose_view(const FunctionClone& base, const FiniteOperation& e) { return ComposedView(base, e); }

Evaluator compose_left(const Evaluator& e, const Evaluator& f, Nat window) {
  if (e.arity != 1) throw std::invalid_argument("left factor must be unary");
  Nat top = window;
  if (e.finite_domain) top = std::min<Nat>(top, static_cast<Nat>(*e.finite_domain));
  std::unordered_map<Nat, Nat> seen;
  for (Nat a = 0; a < top; ++a) {
    auto [it, fresh] = seen.emplace(e({a}), a);
    if (!fresh) throw NotInjective(static_cast<Value>(it->second), static_cast<Value>(a));
  }
  Evaluator out;
  out.arity = f.arity;
  out.finite_domain = f.finite_domain;
  out.fn = [e, f](const NatTuple& x) { return e({f(x)}); };
  return out;
}

}  // namespace clonekit
