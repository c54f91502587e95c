#include "clonekit/back_and_forth.hpp"

#include <algorithm>
#include <set>

#include "clonekit/tuples.hpp"

namespace clonekit {

PartialIso::PartialIso(std::initializer_list<std::pair<int, int>> pairs) {
  for (auto [x, y] : pairs) add(x, y);
}

int PartialIso::at(int x) const {
  auto it = fwd_.find(x);
  if (it == fwd_.end()) throw std::out_of_range("point " + std::to_string(x) + " outside the domain");
  return it->second;
}

int PartialIso::inverse(int y) const {
  auto it = bwd_.find(y);
  if (it == bwd_.end()) throw std::out_of_range("point " + std::to_string(y) + " outside the image");
  return it->second;
}

std::optional<int> PartialIso::find(int x) const {
  auto it = fwd_.find(x);
  if (it == fwd_.end()) return std::nullopt;
  return it->second;
}

void PartialIso::add(int x, int y) {
  if (in_domain(x)) throw std::invalid_argument("point " + std::to_string(x) + " already in the domain");
  if (in_image(y)) throw std::invalid_argument("point " + std::to_string(y) + " already in the image");
  fwd_.emplace(x, y);
  bwd_.emplace(y, x);
  dom_.push_back(x);
  img_.push_back(y);
}

// ---------------------------------------------------------------------------------------------------------------

EmbeddingOracle::EmbeddingOracle(RichPartition world) : world_(std::move(world)) {
  const auto& layout = limit().layout();
  for (std::size_t j = 0; j < layout.self.size(); ++j)
    if (layout.self[j].rel == world_.u()) u_slot_ = j;
}

int EmbeddingOracle::realize(const OnePointType& t, const std::function<bool(int)>& accept) {
  auto& l = limit();
  if (auto q = l.find_realizer(t, accept)) return *q;
  if (mode == Mode::BuiltOnly) throw NeedsGrowth(l.size() + 1);
  return l.create_point(t);
}

int EmbeddingOracle::smallest_outside(const std::function<bool(int)>& taken) {
  for (int p = 0;; ++p) {
    if (p >= limit().size()) {
      if (mode == Mode::BuiltOnly) throw NeedsGrowth(p + 1);
      limit().ensure(p + 1);
    }
    if (!taken(p)) return p;
  }
}

OnePointType EmbeddingOracle::type_like(int model, const std::vector<int>& model_base, const std::vector<int>& base,
                                        int u_value) const {
  if (model_base.size() != base.size()) throw std::invalid_argument("type_like needs bases of equal size");
  OnePointType t = limit().type_of(model, model_base);
  t.base = base;
  t.facts[u_slot_] = static_cast<std::int8_t>(u_value);
  return t;
}

bool EmbeddingOracle::compatible(const PartialIso& p, int x, int y) const {
  if (p.in_domain(x) || p.in_image(y)) return false;
  const auto& l = limit();
  const auto& layout = l.layout();
  for (std::size_t j = 0; j < layout.self.size(); ++j)
    if (j != u_slot_ && l.self_fact(x, j) != l.self_fact(y, j)) return false;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < layout.pair.size(); ++j)
      if (l.pair_fact(x, p.domain()[i], j) != l.pair_fact(y, p.image()[i], j)) return false;
  return true;
}

bool EmbeddingOracle::is_partial_iso(const PartialIso& p) const {
  PartialIso q;
  for (std::size_t i = 0; i < p.size(); ++i) {
    int x = p.domain()[i], y = p.image()[i];
    if (x < 0 || y < 0 || x >= limit().size() || y >= limit().size()) return false;
    if (!compatible(q, x, y)) return false;
    q.add(x, y);
  }
  return true;
}

int EmbeddingOracle::f(int x) {
  if (auto y = f_.find(x)) return *y;
  if (x < 0 || x >= limit().size()) throw std::out_of_range("point " + std::to_string(x) + " not built");
  int y = realize(type_like(x, f_.domain(), f_.image(), 1));
  f_.add(x, y);
  return y;
}

int EmbeddingOracle::f_inverse(int y) {
  if (f_.in_image(y)) return f_.inverse(y);
  if (!in_image(y)) throw std::invalid_argument("point " + std::to_string(y) + " lies outside the image of f");
  int x = realize(type_like(y, f_.image(), f_.domain(), -1));
  f_.add(x, y);
  return x;
}

// ---------------------------------------------------------------------------------------------------------------

ExtensionState::ExtensionState(EmbeddingOracle& oracle, PartialIso a, PartialIso b)
    : oracle_(&oracle), a_(std::move(a)), b_(std::move(b)) {
  if (!oracle.is_partial_iso(a_)) throw InvariantViolation("a is not a partial isomorphism");
  if (!oracle.is_partial_iso(b_)) throw InvariantViolation("b is not a partial isomorphism");
  if (auto v = violated_invariant()) throw InvariantViolation("initial state violates " + *v);
}

std::optional<std::string> ExtensionState::violated_invariant() {
  auto& o = *oracle_;
  std::set<int> lhs, rhs;
  for (int x : a_.domain())
    if (o.in_image(x)) lhs.insert(x);
  for (int y : b_.image()) rhs.insert(o.f(y));
  if (lhs != rhs) return "Dom(a) ∩ Im(f) = f[Im(b)]";
  lhs.clear();
  rhs.clear();
  for (int x : a_.image())
    if (o.in_image(x)) lhs.insert(x);
  for (int y : b_.domain()) rhs.insert(o.f(y));
  if (lhs != rhs) return "Im(a) ∩ Im(f) = f[Dom(b)]";
  for (int x : b_.domain()) {
    auto v = a_.find(o.f(b_.at(x)));
    if (!v || *v != o.f(x)) return "a f b(x) = f(x) on Dom(b)";
  }
  return std::nullopt;
}

void ExtensionState::commit(const StepRecord& r) {
  log_.push_back(r);
  if (auto v = violated_invariant()) throw InvariantViolation("after " + r.kind + ": " + *v);
}

namespace {
void require(bool ok, const char* what) {
  if (!ok) throw InvariantViolation(what);
}
}  // namespace

bool ExtensionState::extend_b_domain(int u) {
  if (b_.in_domain(u)) return false;
  auto& o = *oracle_;
  int fu = o.f(u);
  int s = o.realize(o.type_like(fu, a_.image(), a_.domain(), 1));
  int pre = o.f_inverse(s);
  require(o.compatible(a_, s, fu) && o.compatible(b_, u, pre), "b-domain step broke a partial isomorphism");
  a_.add(s, fu);
  b_.add(u, pre);
  commit({"b-domain", {u, pre, s, fu}});
  return true;
}

bool ExtensionState::extend_b_image(int v) {
  if (b_.in_image(v)) return false;
  auto& o = *oracle_;
  int fv = o.f(v);
  int t = o.realize(o.type_like(fv, a_.domain(), a_.image(), 1));
  int pre = o.f_inverse(t);
  require(o.compatible(a_, fv, t) && o.compatible(b_, pre, v), "b-image step broke a partial isomorphism");
  a_.add(fv, t);
  b_.add(pre, v);
  commit({"b-image", {v, pre, fv, t}});
  return true;
}

bool ExtensionState::extend_a_domain(int s) {
  if (a_.in_domain(s)) return false;
  auto& o = *oracle_;
  const bool inside = o.in_image(s);
  int t = o.realize(o.type_like(s, a_.domain(), a_.image(), inside ? 1 : 0));
  if (inside) {
    int x = o.f_inverse(t), y = o.f_inverse(s);
    require(o.compatible(a_, s, t) && o.compatible(b_, x, y), "a-domain step broke a partial isomorphism");
    a_.add(s, t);
    b_.add(x, y);
    commit({"a-domain", {s, t, x, y}});
  } else {
    require(o.compatible(a_, s, t), "a-domain step broke a partial isomorphism");
    a_.add(s, t);
    commit({"a-domain", {s, t}});
  }
  return true;
}

bool ExtensionState::extend_a_image(int t) {
  if (a_.in_image(t)) return false;
  auto& o = *oracle_;
  const bool inside = o.in_image(t);
  int s = o.realize(o.type_like(t, a_.image(), a_.domain(), inside ? 1 : 0));
  if (inside) {
    int x = o.f_inverse(t), y = o.f_inverse(s);
    require(o.compatible(a_, s, t) && o.compatible(b_, x, y), "a-image step broke a partial isomorphism");
    a_.add(s, t);
    b_.add(x, y);
    commit({"a-image", {t, s, x, y}});
  } else {
    require(o.compatible(a_, s, t), "a-image step broke a partial isomorphism");
    a_.add(s, t);
    commit({"a-image", {t, s}});
  }
  return true;
}

ExtensionRun run_extension(ExtensionState& state, const std::vector<int>& support, std::size_t extra_steps) {
  const std::size_t before = state.log().size();
  auto& o = state.oracle();
  for (int p : support) {
    o.smallest_outside([p](int q) { return q < p; });  // makes sure p is built
    state.extend_a_domain(p);
    state.extend_a_image(p);
    state.extend_b_domain(p);
    state.extend_b_image(p);
  }
  for (std::size_t i = 0; i < extra_steps; ++i) {
    switch (i % 4) {
      case 0:
        state.extend_b_domain(o.smallest_outside([&](int q) { return state.b().in_domain(q); }));
        break;
      case 1:
        state.extend_b_image(o.smallest_outside([&](int q) { return state.b().in_image(q); }));
        break;
      case 2:
        state.extend_a_domain(o.smallest_outside([&](int q) { return state.a().in_domain(q); }));
        break;
      default:
        state.extend_a_image(o.smallest_outside([&](int q) { return state.a().in_image(q); }));
    }
  }
  return {state.a(), state.b(), state.log().size() - before};
}

namespace {
void prepare_window(EmbeddingOracle& oracle, int window) {
  if (window < 1) throw std::invalid_argument("recovery window must be positive");
  oracle.smallest_outside([window](int q) { return q < window - 1; });
}

Recovery finish(std::vector<char>& alive, Recovery out) {
  for (std::size_t c = 0; c < alive.size(); ++c)
    if (alive[c]) out.survivors.push_back(static_cast<int>(c));
  if (out.survivors.size() == 1) out.value = out.survivors[0];
  return out;
}
}  // namespace

Recovery recover_value(EmbeddingOracle& oracle, int u, const RecoveryBudget& budget) {
  prepare_window(oracle, budget.window);
  const int w = budget.window;
  const int fu = oracle.f(u);
  std::vector<char> alive(static_cast<std::size_t>(w), 1);
  std::vector<int> support(static_cast<std::size_t>(w));
  for (int i = 0; i < w; ++i) support[static_cast<std::size_t>(i)] = i;
  Recovery out;
  for (int s = 0; s < w; ++s) {
    if (!alive[static_cast<std::size_t>(s)] || s == fu) continue;
    if (out.certificate.size() >= budget.pairs) break;
    PartialIso a, b;
    const bool inside = oracle.in_image(s);
    int t = oracle.realize(oracle.type_like(s, {fu}, {fu}, inside ? 1 : 0), [s](int q) { return q != s; });
    a.add(fu, fu);
    a.add(s, t);
    b.add(u, u);
    if (inside) b.add(oracle.f_inverse(t), oracle.f_inverse(s));
    ExtensionState st(oracle, std::move(a), std::move(b));
    auto run = run_extension(st, support, budget.steps);
    for (int c = 0; c < w; ++c)
      if (run.alpha.at(c) != c) alive[static_cast<std::size_t>(c)] = 0;
    out.certificate.push_back({s, std::move(run.alpha), {}, std::move(run.beta)});
  }
  return finish(alive, std::move(out));
}

// ---------------------------------------------------------------------------------------------------------------

std::string tu_kind_name(TuKind k) {
  switch (k) {
    case TuKind::BDomain: return "b-domain";
    case TuKind::ADomain: return "a-domain";
    case TuKind::GrowB: return "grow-B";
    case TuKind::GrowA: return "grow-A";
    case TuKind::EnrichImageB: return "enrich-image-b";
    case TuKind::EnrichImageA: return "enrich-image-a";
    case TuKind::EnrichB: return "enrich-B";
    case TuKind::EnrichA: return "enrich-A";
  }
  return "?";
}

namespace {
const char* queue_name(DemandQueue q) {
  switch (q) {
    case DemandQueue::ImageB: return "enrich-image-b";
    case DemandQueue::SetB: return "enrich-B";
    case DemandQueue::ImageA1: return "enrich-image-a1";
    case DemandQueue::SetA1: return "enrich-A1";
    case DemandQueue::ImageA2: return "enrich-image-a2";
    case DemandQueue::SetA2: return "enrich-A2";
  }
  return "?";
}
}  // namespace

TuState::TuState(EmbeddingOracle& oracle, PartialIso a1, PartialIso a2, PartialIso b, int richness_cap)
    : oracle_(&oracle), cap_(richness_cap) {
  if (cap_ < 1 || cap_ > 4) throw std::invalid_argument("richness cap must be between 1 and 4");
  for (const auto* p : {&a1, &a2, &b})
    if (!oracle.is_partial_iso(*p)) throw InvariantViolation("seed map is not a partial isomorphism");
  a1_ = std::move(a1);
  a2_ = std::move(a2);
  b_ = std::move(b);
  if (auto v = violated_invariant()) throw InvariantViolation("initial state violates " + *v);
  for (int fam = 0; fam < 3; ++fam) {
    for (const auto& facts : tau_types({}))
      for (int k = 0; k < 2; ++k)
        queues_[static_cast<std::size_t>(2 * fam + k)].items.push_back({{}, facts, 0, std::nullopt, false});
  }
  for (int y : b_.image()) enqueue_for(0, y);
  for (int y : a1_.image()) enqueue_for(1, y);
  for (int y : a2_.image()) enqueue_for(2, y);
}

std::optional<std::string> TuState::violated_invariant() {
  auto& o = *oracle_;
  for (int p : A1_.items)
    if (a1_.in_image(p)) return "Im(a1) ∩ A1 = ∅";
  for (int p : A2_.items)
    if (a2_.in_image(p)) return "Im(a2) ∩ A2 = ∅";
  for (int p : B_.items)
    if (b_.in_image(p)) return "Im(b) ∩ B = ∅";
  if (a1_.size() != a2_.size()) return "Dom(a1) = Dom(a2)";
  for (int x : a1_.domain())
    if (!a2_.in_domain(x)) return "Dom(a1) = Dom(a2)";
  for (int y : b_.image())
    if (!a1_.in_domain(o.f(y))) return "f[Im(b)] ⊆ Dom(a1)";
  for (int x : a1_.image())
    if (a2_.in_image(x) && a1_.inverse(x) != a2_.inverse(x)) return "a1⁻¹(x) = a2⁻¹(x) on Im(a1) ∩ Im(a2)";
  for (int x : b_.domain()) {
    int p = o.f(b_.at(x));
    if (a1_.at(p) != a2_.at(p)) return "a1 f b = a2 f b on Dom(b)";
  }
  return std::nullopt;
}

void TuState::record(const std::string& kind, std::vector<int> points) {
  log_.push_back({kind, std::move(points)});
  if (auto v = violated_invariant()) throw InvariantViolation("after " + kind + ": " + *v);
}

bool TuState::in_family(int family, int p) const {
  switch (family) {
    case 0: return b_.in_image(p) || B_.has(p);
    case 1: return a1_.in_image(p) || A1_.has(p);
    default: return a2_.in_image(p) || A2_.has(p);
  }
}

const std::vector<std::vector<std::int8_t>>& TuState::tau_types(const std::vector<int>& x) {
  auto& l = oracle_->limit();
  std::string key = std::to_string(x.size()) + ":" + l.induced(x).code();
  auto it = tau_cache_.find(key);
  if (it != tau_cache_.end()) return it->second;
  std::size_t u_slot = 0;
  for (std::size_t j = 0; j < l.layout().self.size(); ++j)
    if (l.layout().self[j].rel == oracle_->world().u()) u_slot = j;
  std::set<std::vector<std::int8_t>> seen;
  for (auto facts : l.admissible_full_types(x)) {
    facts[u_slot] = -1;
    seen.insert(std::move(facts));
  }
  return tau_cache_.emplace(std::move(key), std::vector<std::vector<std::int8_t>>(seen.begin(), seen.end()))
      .first->second;
}

// Called before p joins the family; demands cover every subset of the family plus p that contains p.
void TuState::enqueue_for(int family, int p) {
  std::vector<int> members;
  const std::vector<int>* sources[2];
  if (family == 0) {
    sources[0] = &b_.image();
    sources[1] = &B_.items;
  } else if (family == 1) {
    sources[0] = &a1_.image();
    sources[1] = &A1_.items;
  } else {
    sources[0] = &a2_.image();
    sources[1] = &A2_.items;
  }
  for (const auto* src : sources)
    for (int q : *src)
      if (q != p) members.push_back(q);
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  const std::size_t stamp = log_.size();
  auto push = [&](std::vector<int> x) {
    std::sort(x.begin(), x.end());
    for (const auto& facts : tau_types(x))
      for (int k = 0; k < 2; ++k) queues_[static_cast<std::size_t>(2 * family + k)].items.push_back({x, facts, stamp, std::nullopt, false});
  };
  const int m = static_cast<int>(members.size());
  for (int k = 0; k + 1 <= cap_ - 1; ++k)
    for (const auto& combo : combinations(m, k)) {
      std::vector<int> x{p};
      for (int i : combo) x.push_back(members[static_cast<std::size_t>(i)]);
      push(std::move(x));
    }
}

void TuState::add_b(int u, int v) {
  if (!oracle_->compatible(b_, u, v)) throw InvariantViolation("b would stop being a partial isomorphism");
  if (!in_family(0, v)) enqueue_for(0, v);
  b_.add(u, v);
}

void TuState::add_a1(int s, int t) {
  if (!oracle_->compatible(a1_, s, t)) throw InvariantViolation("a1 would stop being a partial isomorphism");
  if (!in_family(1, t)) enqueue_for(1, t);
  a1_.add(s, t);
}

void TuState::add_a2(int s, int t) {
  if (!oracle_->compatible(a2_, s, t)) throw InvariantViolation("a2 would stop being a partial isomorphism");
  if (!in_family(2, t)) enqueue_for(2, t);
  a2_.add(s, t);
}

int TuState::jep_image(int source) {
  auto& o = *oracle_;
  std::vector<int> base, model;
  for (std::size_t i = 0; i < a1_.size(); ++i) {
    base.push_back(a1_.image()[i]);
    model.push_back(a1_.domain()[i]);
  }
  for (std::size_t i = 0; i < a2_.size(); ++i)
    if (!a1_.in_image(a2_.image()[i])) {
      base.push_back(a2_.image()[i]);
      model.push_back(a2_.domain()[i]);
    }
  return o.realize(o.type_like(source, model, base, -1), [&](int q) { return !A1_.has(q) && !A2_.has(q); });
}

int TuState::choose_with_fresh_image(const OnePointType& t, const std::function<bool(int)>& accept) {
  std::unordered_set<int> rejected;
  while (true) {
    int q = oracle_->realize(t, [&](int p) { return accept(p) && !rejected.count(p); });
    if (!a1_.in_domain(oracle_->f(q))) return q;
    rejected.insert(q);
  }
}

bool TuState::extend_b_domain(int u) {
  if (b_.in_domain(u)) return false;
  auto& o = *oracle_;
  int v = choose_with_fresh_image(o.type_like(u, b_.domain(), b_.image(), -1), [&](int p) { return !B_.has(p); });
  int fv = o.f(v);
  int w = jep_image(fv);
  add_b(u, v);
  add_a1(fv, w);
  add_a2(fv, w);
  record("b-domain", {u, v, fv, w});
  return true;
}

bool TuState::extend_a_domain(int s) {
  if (a1_.in_domain(s)) return false;
  auto& o = *oracle_;
  int t1 = o.realize(o.type_like(s, a1_.domain(), a1_.image(), -1),
                     [&](int p) { return !A1_.has(p) && !a2_.in_image(p); });
  int t2 = o.realize(o.type_like(s, a2_.domain(), a2_.image(), -1),
                     [&](int p) { return !A2_.has(p) && !a1_.in_image(p) && p != t1; });
  add_a1(s, t1);
  add_a2(s, t2);
  record("a-domain", {s, t1, t2});
  return true;
}

void TuState::grow_b() {
  int d = oracle_->smallest_outside([&](int p) { return B_.has(p) || b_.in_image(p); });
  enqueue_for(0, d);
  B_.add(d);
  record("grow-B", {d});
}

void TuState::grow_a() {
  int d1 = oracle_->smallest_outside([&](int p) { return A1_.has(p) || a1_.in_image(p); });
  enqueue_for(1, d1);
  A1_.add(d1);
  int d2 = oracle_->smallest_outside([&](int p) { return A2_.has(p) || a2_.in_image(p); });
  enqueue_for(2, d2);
  A2_.add(d2);
  record("grow-A", {d1, d2});
}

bool TuState::demand_satisfied(DemandQueue q, const RichnessDemand& d) const {
  const std::vector<int>* target = nullptr;
  switch (q) {
    case DemandQueue::ImageB: target = &b_.image(); break;
    case DemandQueue::SetB: target = &B_.items; break;
    case DemandQueue::ImageA1: target = &a1_.image(); break;
    case DemandQueue::SetA1: target = &A1_.items; break;
    case DemandQueue::ImageA2: target = &a2_.image(); break;
    case DemandQueue::SetA2: target = &A2_.items; break;
  }
  OnePointType t{d.x, d.facts};
  const auto& l = oracle_->limit();
  return std::any_of(target->begin(), target->end(), [&](int p) { return l.realizes(p, t); });
}

void TuState::serve(DemandQueue q, const RichnessDemand& d) {
  auto& o = *oracle_;
  const OnePointType want{d.x, d.facts};
  switch (q) {
    case DemandQueue::ImageB: {
      int v = choose_with_fresh_image(want, [&](int p) { return !b_.in_image(p) && !B_.has(p); });
      int u = o.realize(o.type_like(v, b_.image(), b_.domain(), -1));
      int fv = o.f(v);
      int w = jep_image(fv);
      add_b(u, v);
      add_a1(fv, w);
      add_a2(fv, w);
      record(queue_name(q), {u, v, fv, w});
      return;
    }
    case DemandQueue::SetB: {
      int p = o.realize(want, [&](int r) { return !b_.in_image(r) && !B_.has(r); });
      enqueue_for(0, p);
      B_.add(p);
      record(queue_name(q), {p});
      return;
    }
    case DemandQueue::ImageA1:
    case DemandQueue::ImageA2: {
      const bool first = q == DemandQueue::ImageA1;
      PartialIso& mine = first ? a1_ : a2_;
      PartialIso& other = first ? a2_ : a1_;
      PointSet& mine_set = first ? A1_ : A2_;
      PointSet& other_set = first ? A2_ : A1_;
      int t = o.realize(want, [&](int p) { return !mine.in_image(p) && !mine_set.has(p) && !other.in_image(p); });
      int s = o.realize(o.type_like(t, mine.image(), mine.domain(), -1));
      int t_other = o.realize(o.type_like(s, other.domain(), other.image(), -1),
                              [&](int p) { return !other_set.has(p) && !mine.in_image(p) && p != t; });
      if (first) {
        add_a1(s, t);
        add_a2(s, t_other);
      } else {
        add_a2(s, t);
        add_a1(s, t_other);
      }
      record(queue_name(q), {t, s, t_other});
      return;
    }
    case DemandQueue::SetA1:
    case DemandQueue::SetA2: {
      const bool first = q == DemandQueue::SetA1;
      PartialIso& mine = first ? a1_ : a2_;
      PointSet& mine_set = first ? A1_ : A2_;
      int p = o.realize(want, [&](int r) { return !mine.in_image(r) && !mine_set.has(r); });
      enqueue_for(first ? 1 : 2, p);
      mine_set.add(p);
      record(queue_name(q), {p});
      return;
    }
  }
}

void TuState::enrich(DemandQueue q) {
  auto& Q = queues_[static_cast<std::size_t>(q)];
  while (Q.head < Q.items.size()) {
    RichnessDemand d = Q.items[Q.head];
    if (demand_satisfied(q, d)) {
      Q.items[Q.head].discharged_at = log_.size();
      ++Q.head;
      continue;
    }
    serve(q, d);
    auto& done = queues_[static_cast<std::size_t>(q)].items[Q.head];
    done.discharged_at = log_.size();
    done.by_extension = true;
    ++Q.head;
    return;
  }
  record(std::string(queue_name(q)) + "-idle", {});
}

void TuState::settle(std::size_t before_step) {
  for (std::size_t qi = 0; qi < kDemandQueues; ++qi) {
    auto& Q = queues_[qi];
    while (Q.head < Q.items.size() && Q.items[Q.head].enqueued_at < before_step) {
      RichnessDemand d = Q.items[Q.head];
      bool extended = false;
      if (!demand_satisfied(static_cast<DemandQueue>(qi), d)) {
        serve(static_cast<DemandQueue>(qi), d);
        extended = true;
      }
      auto& done = queues_[qi].items[Q.head];
      done.discharged_at = log_.size();
      done.by_extension = extended;
      ++Q.head;
    }
  }
}

std::size_t TuState::pending(DemandQueue q) const {
  const auto& Q = queues_[static_cast<std::size_t>(q)];
  return Q.items.size() - Q.head;
}

void TuState::step(TuKind k) {
  ++kind_counts_[static_cast<std::size_t>(k)];
  auto& o = *oracle_;
  switch (k) {
    case TuKind::BDomain:
      extend_b_domain(o.smallest_outside([&](int p) { return b_.in_domain(p); }));
      break;
    case TuKind::ADomain:
      extend_a_domain(o.smallest_outside([&](int p) { return a1_.in_domain(p); }));
      break;
    case TuKind::GrowB: grow_b(); break;
    case TuKind::GrowA: grow_a(); break;
    case TuKind::EnrichImageB: enrich(DemandQueue::ImageB); break;
    case TuKind::EnrichImageA:
      enrich(DemandQueue::ImageA1);
      enrich(DemandQueue::ImageA2);
      break;
    case TuKind::EnrichB: enrich(DemandQueue::SetB); break;
    case TuKind::EnrichA:
      enrich(DemandQueue::SetA1);
      enrich(DemandQueue::SetA2);
      break;
  }
}

TuRun run_tu(TuState& state, const std::vector<int>& support, std::size_t round_robin_steps, bool settle) {
  const std::size_t before = state.step_count();
  auto& o = state.oracle();
  for (int p : support) {
    o.smallest_outside([p](int q) { return q < p; });
    state.extend_b_domain(p);
    state.extend_a_domain(p);
  }
  for (std::size_t i = 0; i < round_robin_steps; ++i) state.step(static_cast<TuKind>(i % kTuKinds));
  if (settle) state.settle(state.step_count());
  TuRun out{state.a1(), state.a2(), state.b(), state.step_count() - before, {}, {}};
  for (std::size_t q = 0; q < kDemandQueues; ++q) {
    for (const auto& d : state.demands(static_cast<DemandQueue>(q)))
      if (d.discharged_at) ++out.discharged[q];
    out.pending[q] = state.pending(static_cast<DemandQueue>(q));
  }
  return out;
}

Recovery recover_value_via_triples(EmbeddingOracle& oracle, int u, const RecoveryBudget& budget) {
  auto jep = joint_extension_upto(oracle.world().base_spec(), 2);
  if (!jep.verdict) throw JepRefused("the age fails the joint extension property", *jep.counterexample);
  prepare_window(oracle, budget.window);
  const int w = budget.window;
  const int fu = oracle.f(u);
  std::vector<char> alive(static_cast<std::size_t>(w), 1);
  std::vector<int> support(static_cast<std::size_t>(w));
  for (int i = 0; i < w; ++i) support[static_cast<std::size_t>(i)] = i;
  Recovery out;
  for (int s = 0; s < w; ++s) {
    if (!alive[static_cast<std::size_t>(s)] || s == fu) continue;
    if (out.certificate.size() >= budget.pairs) break;
    auto like_s = oracle.type_like(s, {fu}, {fu}, -1);
    int t1 = oracle.realize(like_s);
    int t2 = oracle.realize(like_s, [t1](int q) { return q != t1; });
    TuState st(oracle, {{fu, fu}, {s, t1}}, {{fu, fu}, {s, t2}}, {{u, u}});
    auto run = run_tu(st, support, budget.steps, false);
    for (int c = 0; c < w; ++c)
      if (run.alpha1.at(c) != run.alpha2.at(c)) alive[static_cast<std::size_t>(c)] = 0;
    out.certificate.push_back({s, std::move(run.alpha1), std::move(run.alpha2), std::move(run.beta)});
  }
  return finish(alive, std::move(out));
}

}  // namespace clonekit
