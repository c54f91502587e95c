#include "clonekit/fraisse.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "clonekit/tuples.hpp"

namespace clonekit {

namespace {

bool has_repeat(const std::vector<int>& t) {
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i + 1; j < t.size(); ++j)
      if (t[i] == t[j]) return true;
  return false;
}

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

}  // namespace

FiniteStructure::FiniteStructure(std::vector<RelationSymbol> signature, int size)
    : sig_(std::move(signature)), n_(size), facts_(sig_.size()) {
  if (size < 0) throw std::invalid_argument("structure size must be non-negative");
  for (const auto& r : sig_)
    if (r.arity < 1) throw std::invalid_argument("relation " + r.name + " needs arity >= 1");
}

int FiniteStructure::relation_index(const std::string& name) const {
  for (std::size_t i = 0; i < sig_.size(); ++i)
    if (sig_[i].name == name) return static_cast<int>(i);
  return -1;
}

bool FiniteStructure::holds(int rel, const std::vector<int>& t) const {
  return facts_.at(static_cast<std::size_t>(rel)).count(t) > 0;
}

void FiniteStructure::set(int rel, const std::vector<int>& t, bool value) {
  const auto& r = sig_.at(static_cast<std::size_t>(rel));
  if (static_cast<int>(t.size()) != r.arity)
    throw std::invalid_argument("tuple length does not match arity of " + r.name);
  for (int p : t)
    if (p < 0 || p >= n_) throw std::out_of_range("point outside structure");
  if (value && r.irreflexive && has_repeat(t))
    throw std::invalid_argument("irreflexive relation " + r.name + " cannot hold on a repeated tuple");
  auto& f = facts_[static_cast<std::size_t>(rel)];
  auto apply = [&](const std::vector<int>& u) {
    if (value)
      f.insert(u);
    else
      f.erase(u);
  };
  if (!r.symmetric) {
    apply(t);
    return;
  }
  std::vector<int> u = t;
  std::sort(u.begin(), u.end());
  do apply(u);
  while (std::next_permutation(u.begin(), u.end()));
}

int FiniteStructure::add_point() { return n_++; }

FiniteStructure FiniteStructure::relabel(const std::vector<int>& perm) const {
  FiniteStructure out(sig_, n_);
  for (std::size_t r = 0; r < sig_.size(); ++r)
    for (const auto& t : facts_[r]) {
      std::vector<int> u(t.size());
      for (std::size_t i = 0; i < t.size(); ++i) u[i] = perm[static_cast<std::size_t>(t[i])];
      out.facts_[r].insert(std::move(u));
    }
  return out;
}

FiniteStructure FiniteStructure::induced(const std::vector<int>& points) const {
  std::vector<int> where(static_cast<std::size_t>(n_), -1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    int p = points[i];
    if (p < 0 || p >= n_) throw std::out_of_range("point outside structure");
    if (where[static_cast<std::size_t>(p)] >= 0) throw std::invalid_argument("repeated point in induced substructure");
    where[static_cast<std::size_t>(p)] = static_cast<int>(i);
  }
  FiniteStructure out(sig_, static_cast<int>(points.size()));
  for (std::size_t r = 0; r < sig_.size(); ++r)
    for (const auto& t : facts_[r]) {
      std::vector<int> u(t.size());
      bool inside = true;
      for (std::size_t i = 0; i < t.size() && inside; ++i) {
        u[i] = where[static_cast<std::size_t>(t[i])];
        inside = u[i] >= 0;
      }
      if (inside) out.facts_[r].insert(std::move(u));
    }
  return out;
}

bool FiniteStructure::respects_flags(std::string* why) const {
  for (std::size_t r = 0; r < sig_.size(); ++r)
    for (const auto& t : facts_[r]) {
      if (sig_[r].irreflexive && has_repeat(t)) {
        if (why) *why = sig_[r].name + " holds on a repeated tuple";
        return false;
      }
    }
  return true;
}

std::string FiniteStructure::code() const {
  std::string out;
  for (std::size_t r = 0; r < sig_.size(); ++r)
    for (const auto& t : candidate_tuples(sig_[r], n_)) out.push_back(facts_[r].count(t) ? '1' : '0');
  return out;
}

std::vector<std::vector<int>> candidate_tuples(const RelationSymbol& r, int n) {
  std::vector<std::vector<int>> out;
  if (n == 0) return out;
  std::vector<int> t(static_cast<std::size_t>(r.arity), 0);
  do {
    if (r.irreflexive && has_repeat(t)) continue;
    if (r.symmetric && !std::is_sorted(t.begin(), t.end())) continue;
    out.push_back(t);
  } while (next_tuple(t, n));
  return out;
}

std::vector<CandidateFact> extension_candidates(const std::vector<RelationSymbol>& sig, int k) {
  std::vector<CandidateFact> out;
  for (std::size_t r = 0; r < sig.size(); ++r)
    for (auto& t : candidate_tuples(sig[r], k + 1))
      if (contains(t, k)) out.push_back({static_cast<int>(r), std::move(t)});
  return out;
}

CanonicalForm canonical_form(const FiniteStructure& s) {
  if (s.size() > 8) throw std::invalid_argument("canonical form supports at most 8 points");
  std::vector<int> perm(static_cast<std::size_t>(s.size()));
  std::iota(perm.begin(), perm.end(), 0);
  CanonicalForm best;
  bool first = true;
  do {
    FiniteStructure r = s.relabel(perm);
    std::string c = r.code();
    if (first || c < best.code) {
      best = {std::move(c), std::move(r), perm};
      first = false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

bool embeds(const FiniteStructure& f, const std::vector<RelationSymbol>& target_sig,
            const std::function<bool(int, const std::vector<int>&)>& target_holds, const std::vector<int>& must,
            const std::vector<int>& pool) {
  const int m = f.size();
  if (static_cast<int>(must.size()) > m) return false;
  std::vector<int> target_rel(f.signature().size(), -1);
  for (std::size_t r = 0; r < f.signature().size(); ++r)
    for (std::size_t q = 0; q < target_sig.size(); ++q)
      if (target_sig[q].name == f.signature()[r].name) target_rel[r] = static_cast<int>(q);

  std::vector<int> img(static_cast<std::size_t>(m), -1);
  std::vector<int> assigned;

  // Every tuple over assigned points that mentions i must agree.
  auto consistent = [&](int i) {
    for (std::size_t r = 0; r < f.signature().size(); ++r) {
      const int a = f.signature()[r].arity;
      std::vector<std::size_t> idx(static_cast<std::size_t>(a), 0);
      std::vector<int> t(static_cast<std::size_t>(a)), u(static_cast<std::size_t>(a));
      do {
        bool mentions = false;
        for (int j = 0; j < a; ++j) {
          t[static_cast<std::size_t>(j)] = assigned[idx[static_cast<std::size_t>(j)]];
          mentions = mentions || t[static_cast<std::size_t>(j)] == i;
          u[static_cast<std::size_t>(j)] = img[static_cast<std::size_t>(t[static_cast<std::size_t>(j)])];
        }
        if (!mentions) continue;
        bool want = f.holds(static_cast<int>(r), t);
        bool got = target_rel[r] >= 0 && target_holds(target_rel[r], u);
        if (want != got) return false;
      } while (next_index_tuple(idx, assigned.size()));
    }
    return true;
  };

  auto used = [&](int p) { return std::find(img.begin(), img.end(), p) != img.end(); };

  std::function<bool(std::size_t)> place_must;
  std::function<bool(int)> fill;
  fill = [&](int i) -> bool {
    while (i < m && img[static_cast<std::size_t>(i)] >= 0) ++i;
    if (i == m) return true;
    for (int p : pool) {
      if (used(p)) continue;
      img[static_cast<std::size_t>(i)] = p;
      assigned.push_back(i);
      if (consistent(i) && fill(i + 1)) return true;
      assigned.pop_back();
      img[static_cast<std::size_t>(i)] = -1;
    }
    return false;
  };
  place_must = [&](std::size_t j) -> bool {
    if (j == must.size()) return fill(0);
    for (int i = 0; i < m; ++i) {
      if (img[static_cast<std::size_t>(i)] >= 0) continue;
      img[static_cast<std::size_t>(i)] = must[j];
      assigned.push_back(i);
      if (consistent(i) && place_must(j + 1)) return true;
      assigned.pop_back();
      img[static_cast<std::size_t>(i)] = -1;
    }
    return false;
  };
  return place_must(0);
}

int AgeSpec::relation_index(const std::string& name) const {
  for (std::size_t i = 0; i < signature.size(); ++i)
    if (signature[i].name == name) return static_cast<int>(i);
  return -1;
}

void AgeSpec::validate() const {
  for (std::size_t i = 0; i < signature.size(); ++i) {
    if (signature[i].arity < 1) throw std::invalid_argument("relation " + signature[i].name + " needs arity >= 1");
    for (std::size_t j = 0; j < i; ++j)
      if (signature[i].name == signature[j].name)
        throw std::invalid_argument("duplicate relation " + signature[i].name);
  }
  for (const auto& f : forbidden) {
    for (const auto& r : f.signature()) {
      int q = relation_index(r.name);
      if (q < 0) throw std::invalid_argument("forbidden structure uses unknown relation " + r.name);
      if (signature[static_cast<std::size_t>(q)].arity != r.arity)
        throw std::invalid_argument("forbidden structure disagrees on arity of " + r.name);
    }
  }
}

bool AgeSpec::admissible(const FiniteStructure& s) const { return admissible_containing(s, {}); }

bool AgeSpec::admissible_containing(const FiniteStructure& s, const std::vector<int>& must) const {
  if (!s.respects_flags()) return false;
  std::vector<int> pool;
  for (int p = 0; p < s.size(); ++p)
    if (!contains(must, p)) pool.push_back(p);
  auto holds = [&](int r, const std::vector<int>& t) { return s.holds(r, t); };
  for (const auto& f : forbidden)
    if (embeds(f, s.signature(), holds, must, pool)) return false;
  return true;
}

AgeSpec AgeSpec::with_unary(const std::string& name) const {
  if (relation_index(name) >= 0) throw std::invalid_argument("relation " + name + " already present");
  AgeSpec out = *this;
  out.signature.push_back({name, 1, false, false});
  return out;
}

bool AgeSpec::binary_only() const {
  return std::all_of(signature.begin(), signature.end(), [](const RelationSymbol& r) { return r.arity <= 2; });
}

AgeSpec AgeSpec::graphs() { return {{{"E", 2, true, true}}, {}}; }

AgeSpec AgeSpec::tournaments() {
  AgeSpec s{{{"E", 2, false, true}}, {}};
  FiniteStructure none(s.signature, 2);
  FiniteStructure both(s.signature, 2);
  both.set(0, {0, 1}, true);
  both.set(0, {1, 0}, true);
  s.forbidden = {none, both};
  return s;
}

AgeSpec AgeSpec::linear_orders() {
  AgeSpec s = tournaments();
  FiniteStructure cycle(s.signature, 3);
  cycle.set(0, {0, 1}, true);
  cycle.set(0, {1, 2}, true);
  cycle.set(0, {2, 0}, true);
  s.forbidden.push_back(cycle);
  return s;
}

AgeSpec AgeSpec::k3_free_graphs() {
  AgeSpec s = graphs();
  FiniteStructure k3(s.signature, 3);
  k3.set(0, {0, 1}, true);
  k3.set(0, {1, 2}, true);
  k3.set(0, {0, 2}, true);
  s.forbidden = {k3};
  return s;
}

namespace {

FiniteStructure apply_candidates(FiniteStructure s, const std::vector<CandidateFact>& cands,
                                 const std::vector<std::int8_t>& bits, const std::vector<int>& remap = {}) {
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (bits[i] != 1) continue;
    std::vector<int> t = cands[i].tuple;
    if (!remap.empty())
      for (int& p : t) p = remap[static_cast<std::size_t>(p)];
    s.set(cands[i].rel, t, true);
  }
  return s;
}

std::vector<std::int8_t> mask_bits(std::uint64_t mask, std::size_t n) {
  std::vector<std::int8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::int8_t>((mask >> i) & 1);
  return out;
}

std::uint64_t mask_limit(std::size_t n) {
  if (n > 24) throw std::invalid_argument("too many candidate facts for exhaustive enumeration");
  return std::uint64_t{1} << n;
}

// Admissible one-point extension fact vectors of s, indexed like extension_candidates.
std::vector<std::vector<std::int8_t>> admissible_extensions(const AgeSpec& spec, const FiniteStructure& s) {
  auto cands = extension_candidates(spec.signature, s.size());
  std::vector<std::vector<std::int8_t>> out;
  for (std::uint64_t m = 0; m < mask_limit(cands.size()); ++m) {
    auto bits = mask_bits(m, cands.size());
    FiniteStructure e = s;
    e.add_point();
    e = apply_candidates(std::move(e), cands, bits);
    if (spec.admissible_containing(e, {s.size()})) out.push_back(std::move(bits));
  }
  return out;
}

}  // namespace

std::vector<FiniteStructure> enumerate_age(const AgeSpec& spec, int size, int cap) {
  if (size < 0) throw std::invalid_argument("size must be non-negative");
  if (size > cap) throw AgeCapExceeded("age enumeration capped at size " + std::to_string(cap));
  spec.validate();
  std::vector<FiniteStructure> level;
  FiniteStructure empty(spec.signature, 0);
  if (spec.admissible(empty)) level.push_back(empty);
  for (int k = 1; k <= size; ++k) {
    std::map<std::string, FiniteStructure> next;
    auto cands = extension_candidates(spec.signature, k - 1);
    for (const auto& rep : level) {
      for (std::uint64_t m = 0; m < mask_limit(cands.size()); ++m) {
        FiniteStructure e = rep;
        e.add_point();
        e = apply_candidates(std::move(e), cands, mask_bits(m, cands.size()));
        if (!spec.admissible_containing(e, {k - 1})) continue;
        auto cf = canonical_form(e);
        next.emplace(cf.code, std::move(cf.rep));
      }
    }
    level.clear();
    for (auto& [code, s] : next) level.push_back(std::move(s));
  }
  return level;
}

TypeLayout::TypeLayout(const std::vector<RelationSymbol>& sig) {
  for (std::size_t r = 0; r < sig.size(); ++r) {
    const int rel = static_cast<int>(r);
    if (sig[r].arity == 1) {
      self.push_back({rel});
    } else if (sig[r].arity == 2) {
      if (!sig[r].irreflexive) self.push_back({rel});
      pair.push_back({rel, true});
      if (!sig[r].symmetric) pair.push_back({rel, false});
    }
  }
}

FiniteStructure type_structure(const FiniteStructure& base_structure, const TypeLayout& layout,
                               const std::vector<std::int8_t>& facts) {
  const int k = base_structure.size();
  if (facts.size() != layout.size(static_cast<std::size_t>(k)))
    throw std::invalid_argument("type has the wrong number of facts for its base");
  FiniteStructure s = base_structure;
  const int x = s.add_point();
  std::size_t i = 0;
  auto bit = [&](std::size_t j) {
    if (facts[j] < 0) throw std::invalid_argument("type_structure needs a fully specified type");
    return facts[j] == 1;
  };
  for (const auto& sf : layout.self) {
    const int a = s.signature()[static_cast<std::size_t>(sf.rel)].arity;
    if (bit(i)) s.set(sf.rel, a == 1 ? std::vector<int>{x} : std::vector<int>{x, x}, true);
    ++i;
  }
  for (int b = 0; b < k; ++b)
    for (const auto& pf : layout.pair) {
      if (bit(i)) s.set(pf.rel, pf.x_first ? std::vector<int>{x, b} : std::vector<int>{b, x}, true);
      ++i;
    }
  return s;
}

AmalgamationResult check_amalgamation(const AgeSpec& spec, int size_cap, bool strong) {
  spec.validate();
  AmalgamationResult out;
  for (int k = 0; k + 2 <= size_cap; ++k) {
    auto cands = extension_candidates(spec.signature, k);
    // x = k, y = k + 1; cross facts mention both.
    std::vector<CandidateFact> cross;
    for (std::size_t r = 0; r < spec.signature.size(); ++r)
      for (auto& t : candidate_tuples(spec.signature[r], k + 2))
        if (contains(t, k) && contains(t, k + 1)) cross.push_back({static_cast<int>(r), std::move(t)});
    std::vector<int> to_y(static_cast<std::size_t>(k + 1));
    std::iota(to_y.begin(), to_y.end(), 0);
    to_y[static_cast<std::size_t>(k)] = k + 1;

    for (const auto& base : enumerate_age(spec, k, std::max(size_cap, 6))) {
      auto types = admissible_extensions(spec, base);
      for (const auto& t1 : types)
        for (const auto& t2 : types) {
          ++out.spans_checked;
          if (!strong && t1 == t2) continue;
          FiniteStructure s = base;
          s.add_point();
          s.add_point();
          s = apply_candidates(std::move(s), cands, t1);
          s = apply_candidates(std::move(s), cands, t2, to_y);
          bool found = false;
          for (std::uint64_t m = 0; m < mask_limit(cross.size()) && !found; ++m)
            found = spec.admissible_containing(apply_candidates(s, cross, mask_bits(m, cross.size())), {k, k + 1});
          if (!found) {
            out.verdict = false;
            out.counterexample = AmalgamationSpan{base, t1, t2};
            return out;
          }
        }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------------------------------------------
// LazyLimit

LazyLimit::LazyLimit(AgeSpec spec, LimitOptions options)
    : spec_(std::move(spec)), options_(options), layout_(spec_.signature), rng_(options.seed) {
  spec_.validate();
  if (!spec_.binary_only()) throw std::invalid_argument("lazy limits support relations of arity at most 2");
  if (options_.requirement_cap < 1) throw std::invalid_argument("requirement cap must be at least 1");
  for (const auto& r : spec_.signature) {
    rel_arity_.push_back(r.arity);
    rel_symmetric_.push_back(r.symmetric);
  }
  unary_.resize(spec_.signature.size());
  bin_.resize(spec_.signature.size());
}

int LazyLimit::relation_index(const std::string& name) const {
  int r = spec_.relation_index(name);
  if (r < 0) throw std::invalid_argument("unknown relation " + name);
  return r;
}

bool LazyLimit::holds(int rel, int a) const { return unary_[static_cast<std::size_t>(rel)][static_cast<std::size_t>(a)]; }

bool LazyLimit::holds(int rel, int a, int b) const {
  const auto& row = bin_[static_cast<std::size_t>(rel)][static_cast<std::size_t>(a)];
  return (row[static_cast<std::size_t>(b) >> 6] >> (b & 63)) & 1;
}

bool LazyLimit::holds(int rel, const std::vector<int>& t) const {
  if (rel < 0 || rel >= static_cast<int>(rel_arity_.size())) throw std::out_of_range("relation index");
  if (static_cast<int>(t.size()) != rel_arity_[static_cast<std::size_t>(rel)])
    throw std::invalid_argument("tuple length does not match arity");
  for (int p : t)
    if (p < 0 || p >= n_) throw std::out_of_range("point " + std::to_string(p) + " not built");
  return t.size() == 1 ? holds(rel, t[0]) : holds(rel, t[0], t[1]);
}

bool LazyLimit::rel(const std::string& name, const std::vector<int>& t) const { return holds(relation_index(name), t); }

void LazyLimit::append_point() {
  ++n_;
  if (static_cast<std::size_t>(n_) > words_ * 64) {
    words_ = std::max<std::size_t>(1, words_ * 2);
    for (auto& rows : bin_)
      for (auto& row : rows) row.resize(words_, 0);
  }
  for (std::size_t r = 0; r < rel_arity_.size(); ++r) {
    if (rel_arity_[r] == 1)
      unary_[r].push_back(0);
    else
      bin_[r].emplace_back(words_, 0);
  }
}

void LazyLimit::pop_point() {
  --n_;
  const int x = n_;
  for (std::size_t r = 0; r < rel_arity_.size(); ++r) {
    if (rel_arity_[r] == 1) {
      unary_[r].pop_back();
      continue;
    }
    bin_[r].pop_back();
    for (auto& row : bin_[r]) row[static_cast<std::size_t>(x) >> 6] &= ~(std::uint64_t{1} << (x & 63));
  }
}

namespace {
void put_bit(std::vector<std::uint64_t>& row, int b, bool v) {
  auto& w = row[static_cast<std::size_t>(b) >> 6];
  const std::uint64_t m = std::uint64_t{1} << (b & 63);
  w = v ? (w | m) : (w & ~m);
}
}  // namespace

void LazyLimit::set_fact_self(int x, std::size_t self_index, bool v) {
  const int r = layout_.self[self_index].rel;
  if (rel_arity_[static_cast<std::size_t>(r)] == 1)
    unary_[static_cast<std::size_t>(r)][static_cast<std::size_t>(x)] = v;
  else
    put_bit(bin_[static_cast<std::size_t>(r)][static_cast<std::size_t>(x)], x, v);
}

void LazyLimit::set_fact_pair(int x, int y, std::size_t pair_index, bool v) {
  const auto& pf = layout_.pair[pair_index];
  auto& rows = bin_[static_cast<std::size_t>(pf.rel)];
  int a = pf.x_first ? x : y, b = pf.x_first ? y : x;
  put_bit(rows[static_cast<std::size_t>(a)], b, v);
  if (rel_symmetric_[static_cast<std::size_t>(pf.rel)]) put_bit(rows[static_cast<std::size_t>(b)], a, v);
}

bool LazyLimit::get_fact_pair(int x, int y, std::size_t pair_index) const {
  const auto& pf = layout_.pair[pair_index];
  return pf.x_first ? holds(pf.rel, x, y) : holds(pf.rel, y, x);
}

bool LazyLimit::check_with(int x, const std::vector<int>& decided, int newest) {
  if (spec_.forbidden.empty()) return true;
  std::vector<int> must{x};
  if (newest >= 0) must.push_back(newest);
  std::vector<int> pool;
  pool.reserve(decided.size());
  for (int p : decided)
    if (p != newest) pool.push_back(p);
  auto h = [this](int r, const std::vector<int>& t) { return t.size() == 1 ? holds(r, t[0]) : holds(r, t[0], t[1]); };
  for (const auto& f : spec_.forbidden)
    if (embeds(f, spec_.signature, h, must, pool)) return false;
  return true;
}

bool LazyLimit::decide_point(int x, const OnePointType& t) {
  const std::size_t S = layout_.self.size(), P = layout_.pair.size();
  std::vector<char> in_base(static_cast<std::size_t>(x), 0);
  for (int b : t.base) in_base[static_cast<std::size_t>(b)] = 1;
  // Level 0 decides self facts, then base points in order, then the remaining points ascending.
  std::vector<int> order(t.base.begin(), t.base.end());
  for (int q = 0; q < x; ++q)
    if (!in_base[static_cast<std::size_t>(q)]) order.push_back(q);
  const std::size_t levels = order.size() + 1;

  auto options_for = [&](std::size_t level) {
    std::size_t width = level == 0 ? S : P;
    const std::int8_t* want = nullptr;
    if (level == 0)
      want = t.facts.data();
    else if (level <= t.base.size())
      want = t.facts.data() + S + (level - 1) * P;
    std::vector<std::uint32_t> opts;
    for (std::uint32_t m = 0; m < (1u << width); ++m) {
      bool ok = true;
      for (std::size_t j = 0; j < width && ok; ++j)
        if (want && want[j] >= 0 && want[j] != static_cast<std::int8_t>((m >> j) & 1)) ok = false;
      if (ok) opts.push_back(m);
    }
    std::shuffle(opts.begin(), opts.end(), rng_);
    return opts;
  };
  auto apply = [&](std::size_t level, std::uint32_t m) {
    if (level == 0) {
      for (std::size_t j = 0; j < S; ++j) set_fact_self(x, j, (m >> j) & 1);
    } else {
      for (std::size_t j = 0; j < P; ++j) set_fact_pair(x, order[level - 1], j, (m >> j) & 1);
    }
  };

  std::vector<std::vector<std::uint32_t>> opts(levels);
  std::vector<std::size_t> next(levels, 0);
  std::vector<int> decided;
  std::size_t level = 0;
  opts[0] = options_for(0);
  while (true) {
    if (next[level] >= opts[level].size()) {
      apply(level, 0);
      if (level == 0) return false;
      --level;
      if (level > 0) decided.pop_back();
      continue;
    }
    apply(level, opts[level][next[level]++]);
    int newest = level == 0 ? -1 : order[level - 1];
    if (newest >= 0) decided.push_back(newest);
    if (!check_with(x, decided, newest)) {
      if (newest >= 0) decided.pop_back();
      continue;
    }
    if (level + 1 == levels) return true;
    ++level;
    opts[level] = options_for(level);
    next[level] = 0;
  }
}

bool LazyLimit::self_fact(int x, std::size_t j) const {
  const int r = layout_.self[j].rel;
  return rel_arity_[static_cast<std::size_t>(r)] == 1 ? holds(r, x) : holds(r, x, x);
}

OnePointType LazyLimit::blank_type(const std::vector<int>& base) const {
  return {base, std::vector<std::int8_t>(layout_.size(base.size()), -1)};
}

OnePointType LazyLimit::type_of(int q, const std::vector<int>& base) const {
  if (q < 0 || q >= n_) throw std::out_of_range("point " + std::to_string(q) + " not built");
  OnePointType t{base, {}};
  t.facts.reserve(layout_.size(base.size()));
  for (std::size_t j = 0; j < layout_.self.size(); ++j) {
    const int r = layout_.self[j].rel;
    t.facts.push_back(rel_arity_[static_cast<std::size_t>(r)] == 1 ? holds(r, q) : holds(r, q, q));
  }
  for (int b : base) {
    if (b < 0 || b >= n_) throw std::out_of_range("base point not built");
    for (std::size_t j = 0; j < layout_.pair.size(); ++j) t.facts.push_back(get_fact_pair(q, b, j));
  }
  return t;
}

bool LazyLimit::realizes(int q, const OnePointType& t) const {
  if (contains(t.base, q)) return false;
  const std::size_t S = layout_.self.size(), P = layout_.pair.size();
  for (std::size_t j = 0; j < S; ++j) {
    if (t.facts[j] < 0) continue;
    const int r = layout_.self[j].rel;
    bool v = rel_arity_[static_cast<std::size_t>(r)] == 1 ? holds(r, q) : holds(r, q, q);
    if (v != (t.facts[j] == 1)) return false;
  }
  for (std::size_t i = 0; i < t.base.size(); ++i)
    for (std::size_t j = 0; j < P; ++j) {
      auto want = t.facts[S + i * P + j];
      if (want >= 0 && get_fact_pair(q, t.base[i], j) != (want == 1)) return false;
    }
  return true;
}

namespace {
void validate_type(const OnePointType& t, const TypeLayout& layout, int n) {
  if (t.facts.size() != layout.size(t.base.size()))
    throw std::invalid_argument("type has the wrong number of facts for its base");
  for (std::size_t i = 0; i < t.base.size(); ++i) {
    if (t.base[i] < 0 || t.base[i] >= n) throw std::out_of_range("type base point not built");
    for (std::size_t j = 0; j < i; ++j)
      if (t.base[i] == t.base[j]) throw std::invalid_argument("type base repeats a point");
  }
  for (auto v : t.facts)
    if (v < -1 || v > 1) throw std::invalid_argument("type facts must be -1, 0 or 1");
}
}  // namespace

std::optional<int> LazyLimit::find_realizer(const OnePointType& t, const std::function<bool(int)>& accept) const {
  validate_type(t, layout_, n_);
  for (int q = 0; q < n_; ++q)
    if (realizes(q, t) && (!accept || accept(q))) return q;
  return std::nullopt;
}

bool LazyLimit::admissible_type(const OnePointType& t) {
  validate_type(t, layout_, n_);
  if (spec_.forbidden.empty()) return true;  // the layout never offers a fact that breaks a flag
  std::vector<std::size_t> free;
  for (std::size_t j = 0; j < t.facts.size(); ++j)
    if (t.facts[j] < 0) free.push_back(j);
  if (free.size() > 20) throw std::invalid_argument("type leaves too many facts open to check admissibility");
  FiniteStructure base = induced(t.base);
  std::vector<std::int8_t> facts = t.facts;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << free.size()); ++m) {
    for (std::size_t j = 0; j < free.size(); ++j) facts[free[j]] = static_cast<std::int8_t>((m >> j) & 1);
    if (spec_.admissible_containing(type_structure(base, layout_, facts), {base.size()})) return true;
  }
  return false;
}

int LazyLimit::create_point(const OnePointType& t) {
  validate_type(t, layout_, n_);
  if (!admissible_type(t)) throw InadmissibleType("type is not realizable in this age");
  append_point();
  const int x = n_ - 1;
  if (!decide_point(x, t)) {
    pop_point();
    throw std::runtime_error("no admissible one-point extension of the built structure; the age may lack amalgamation");
  }
  return x;
}

int LazyLimit::realize(const OnePointType& t, const std::function<bool(int)>& accept) {
  if (auto q = find_realizer(t, accept)) return *q;
  return create_point(t);
}

int LazyLimit::add_free_point() { return create_point(blank_type({})); }

const std::vector<std::vector<std::int8_t>>& LazyLimit::admissible_full_types(const std::vector<int>& base) {
  FiniteStructure b = induced(base);
  std::string key = std::to_string(base.size()) + ":" + b.code();
  auto it = type_cache_.find(key);
  if (it != type_cache_.end()) return it->second;
  std::vector<std::vector<std::int8_t>> out;
  const std::size_t L = layout_.size(base.size());
  for (std::uint64_t m = 0; m < mask_limit(L); ++m) {
    auto bits = mask_bits(m, L);
    if (spec_.admissible_containing(type_structure(b, layout_, bits), {b.size()})) out.push_back(std::move(bits));
  }
  return type_cache_.emplace(std::move(key), std::move(out)).first->second;
}

bool LazyLimit::next_requirement(std::vector<int>& base, std::vector<std::int8_t>& facts, int limit_point) {
  auto& c = cursor_;
  const int cap = options_.requirement_cap;
  while (true) {
    if (c.point >= limit_point) return false;
    if (!c.started) {
      c.started = true;
      c.subset_size = 0;
      c.subset.clear();
      c.type_index = 0;
    }
    base = c.subset;
    if (c.point >= 0) base.push_back(c.point);
    const auto& types = admissible_full_types(base);
    if (c.type_index < types.size()) {
      facts = types[c.type_index++];
      return true;
    }
    // Next subset of [0, point) of the same size, else grow the size, else move to the next point.
    c.type_index = 0;
    const int avail = std::max(c.point, 0);
    const int s = c.subset_size;
    int i = s - 1;
    while (i >= 0 && c.subset[static_cast<std::size_t>(i)] == avail - s + i) --i;
    if (i >= 0) {
      ++c.subset[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < s; ++j) c.subset[static_cast<std::size_t>(j)] = c.subset[static_cast<std::size_t>(j - 1)] + 1;
      continue;
    }
    if (s + 1 <= cap - 1 && s + 1 <= avail && c.point >= 0) {
      c.subset_size = s + 1;
      c.subset.resize(static_cast<std::size_t>(s + 1));
      std::iota(c.subset.begin(), c.subset.end(), 0);
      continue;
    }
    ++c.point;
    c.started = false;
  }
}

void LazyLimit::process_requirement(const std::vector<int>& base, const std::vector<std::int8_t>& facts) {
  OnePointType t{base, facts};
  ++processed_;
  if (!find_realizer(t)) create_point(t);
}

void LazyLimit::ensure(int n) {
  while (n_ < n) add_free_point();
}

void LazyLimit::saturate(int m) {
  std::vector<int> base;
  std::vector<std::int8_t> facts;
  while (cursor_.point < m) {
    if (next_requirement(base, facts, std::min(m, n_)))
      process_requirement(base, facts);
    else if (cursor_.point < m)
      add_free_point();
  }
}

FiniteStructure LazyLimit::induced(const std::vector<int>& points) const {
  FiniteStructure s(spec_.signature, static_cast<int>(points.size()));
  for (int p : points)
    if (p < 0 || p >= n_) throw std::out_of_range("point " + std::to_string(p) + " not built");
  const int k = static_cast<int>(points.size());
  for (std::size_t r = 0; r < rel_arity_.size(); ++r) {
    const int rel = static_cast<int>(r);
    if (rel_arity_[r] == 1) {
      for (int i = 0; i < k; ++i)
        if (holds(rel, points[static_cast<std::size_t>(i)])) s.set(rel, {i}, true);
    } else {
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
          if (holds(rel, points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)])) s.set(rel, {i, j}, true);
    }
  }
  return s;
}

std::string LazyLimit::serialize() const {
  std::ostringstream out;
  out << "clonekit.limit/1 seed=" << options_.seed << " cap=" << options_.requirement_cap << " points=" << n_ << "\n";
  for (std::size_t r = 0; r < rel_arity_.size(); ++r) {
    const int rel = static_cast<int>(r);
    out << spec_.signature[r].name << "\n";
    if (rel_arity_[r] == 1) {
      for (int a = 0; a < n_; ++a) out << (holds(rel, a) ? '1' : '0');
      out << "\n";
    } else {
      for (int a = 0; a < n_; ++a) {
        for (int b = 0; b < n_; ++b) out << (holds(rel, a, b) ? '1' : '0');
        out << "\n";
      }
    }
  }
  return out.str();
}

bool rado_adjacent(std::uint64_t i, std::uint64_t j) {
  if (i == j) return false;
  std::uint64_t lo = std::min(i, j), hi = std::max(i, j);
  return lo < 64 && ((hi >> lo) & 1);
}

std::optional<ExtensionFailure> check_extension_property(LazyLimit& limit, int window, int cap) {
  window = std::min(window, limit.size());
  for (int s = 0; s <= cap && s <= window; ++s)
    for (const auto& subset : combinations(window, s)) {
      std::vector<int> base(subset.begin(), subset.end());
      for (const auto& facts : limit.admissible_full_types(base))
        if (!limit.find_realizer({base, facts})) return ExtensionFailure{base, facts};
    }
  return std::nullopt;
}

// ---------------------------------------------------------------------------------------------------------------

RichPartition::RichPartition(const AgeSpec& spec, LimitOptions options, const std::string& unary_name)
    : base_spec_(spec), limit_(spec.with_unary(unary_name), options), u_(limit_.relation_index(unary_name)) {}

RichReport RichPartition::is_rich_upto(bool side, int cap, int window) const {
  RichReport out;
  window = std::min(window, limit_.size());
  const auto& layout = limit_.layout();
  std::vector<std::size_t> self_keep;
  for (std::size_t j = 0; j < layout.self.size(); ++j)
    if (layout.self[j].rel != u_) self_keep.push_back(j);
  const std::size_t S = layout.self.size();
  for (int s = 1; s <= cap && s <= window; ++s)
    for (const auto& subset : combinations(window, s)) {
      std::vector<int> P(subset.begin(), subset.end());
      for (int p : P) {
        ++out.demands_checked;
        std::vector<int> rest;
        for (int r : P)
          if (r != p) rest.push_back(r);
        OnePointType want = limit_.type_of(p, rest);
        for (std::size_t j = 0; j < S; ++j)
          if (layout.self[j].rel == u_) want.facts[j] = side ? 1 : 0;
        if (!limit_.find_realizer(want)) {
          out.verdict = RichVerdict::NotYetWitnessed;
          out.failing = RichDemand{P, p};
          return out;
        }
      }
    }
  return out;
}

// ---------------------------------------------------------------------------------------------------------------

namespace {

// Facts of point i of s over the listed points, in layout order.
std::vector<std::int8_t> facts_over(const FiniteStructure& s, const TypeLayout& layout, int i, const std::vector<int>& base) {
  std::vector<std::int8_t> out;
  for (const auto& sf : layout.self) {
    const int a = s.signature()[static_cast<std::size_t>(sf.rel)].arity;
    out.push_back(s.holds(sf.rel, a == 1 ? std::vector<int>{i} : std::vector<int>{i, i}));
  }
  for (int b : base)
    for (const auto& pf : layout.pair)
      out.push_back(s.holds(pf.rel, pf.x_first ? std::vector<int>{i, b} : std::vector<int>{b, i}));
  return out;
}

std::vector<int> realize_structure(LazyLimit& limit, const FiniteStructure& s, const std::vector<int>& avoid) {
  std::vector<int> pts;
  std::vector<int> idx;
  for (int i = 0; i < s.size(); ++i) {
    OnePointType t{pts, facts_over(s, limit.layout(), i, idx)};
    pts.push_back(limit.realize(t, [&](int q) { return !contains(avoid, q); }));
    idx.push_back(i);
  }
  return pts;
}

}  // namespace

JepResult joint_extension_upto(const AgeSpec& spec, int cap, std::uint64_t seed) {
  spec.validate();
  if (!spec.binary_only()) throw std::invalid_argument("joint extension check supports relations of arity at most 2");
  JepResult out;
  const TypeLayout layout(spec.signature);
  const std::size_t P = layout.pair.size();
  for (int k = 0; k <= cap; ++k) {
    for (const auto& dom : enumerate_age(spec, k, std::max(cap, 6))) {
      for (std::uint64_t tm = 0; tm < mask_limit(layout.size(static_cast<std::size_t>(k))); ++tm) {
        auto tau = mask_bits(tm, layout.size(static_cast<std::size_t>(k)));
        FiniteStructure z = type_structure(dom, layout, tau);
        if (!spec.admissible_containing(z, {k})) continue;
        for (std::uint32_t om = 0; om < (1u << k); ++om) {
          // First copy keeps indices; the second copy shares overlap points and adds the rest.
          std::vector<int> second(static_cast<std::size_t>(k));
          std::vector<int> overlap, fresh;
          int next = k;
          for (int y = 0; y < k; ++y) {
            if ((om >> y) & 1) {
              second[static_cast<std::size_t>(y)] = y;
              overlap.push_back(y);
            } else {
              second[static_cast<std::size_t>(y)] = next++;
              fresh.push_back(y);
            }
          }
          FiniteStructure y0(spec.signature, next);
          for (std::size_t r = 0; r < spec.signature.size(); ++r)
            for (const auto& t : candidate_tuples(spec.signature[r], k))
              if (dom.holds(static_cast<int>(r), t)) {
                y0.set(static_cast<int>(r), t, true);
                std::vector<int> u = t;
                for (int& p : u) p = second[static_cast<std::size_t>(p)];
                y0.set(static_cast<int>(r), u, true);
              }
          struct Cross {
            int a, b;
            std::size_t pair;
          };
          std::vector<Cross> cross;
          for (int a : fresh)
            for (int b : fresh)
              for (std::size_t j = 0; j < P; ++j) cross.push_back({a, second[static_cast<std::size_t>(b)], j});
          for (std::uint64_t cm = 0; cm < mask_limit(cross.size()); ++cm) {
            FiniteStructure y = y0;
            for (std::size_t c = 0; c < cross.size(); ++c) {
              if (!((cm >> c) & 1)) continue;
              const auto& pf = layout.pair[cross[c].pair];
              y.set(pf.rel, pf.x_first ? std::vector<int>{cross[c].a, cross[c].b} : std::vector<int>{cross[c].b, cross[c].a},
                    true);
            }
            if (!spec.admissible(y)) continue;
            ++out.configurations;
            std::vector<std::int8_t> w(tau.begin(), tau.begin() + static_cast<long>(layout.self.size()));
            w.resize(layout.size(static_cast<std::size_t>(next)));
            for (int yy = 0; yy < k; ++yy)
              for (std::size_t j = 0; j < P; ++j) {
                auto v = tau[layout.self.size() + static_cast<std::size_t>(yy) * P + j];
                w[layout.self.size() + static_cast<std::size_t>(yy) * P + j] = v;
                w[layout.self.size() + static_cast<std::size_t>(second[static_cast<std::size_t>(yy)]) * P + j] = v;
              }
            if (spec.admissible_containing(type_structure(y, layout, w), {next})) continue;

            JepCounterexample ce{z, overlap, y, second, std::make_shared<LazyLimit>(spec, LimitOptions{3, seed}), {}, {}, {}, -1};
            auto zp = realize_structure(*ce.limit, z, {});
            auto yp = realize_structure(*ce.limit, y, zp);
            ce.limit_domain.assign(zp.begin(), zp.begin() + k);
            ce.limit_u = zp[static_cast<std::size_t>(k)];
            for (int i = 0; i < k; ++i) {
              ce.limit_first.push_back(yp[static_cast<std::size_t>(i)]);
              ce.limit_second.push_back(yp[static_cast<std::size_t>(second[static_cast<std::size_t>(i)])]);
            }
            out.verdict = false;
            out.counterexample = std::move(ce);
            return out;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace clonekit
