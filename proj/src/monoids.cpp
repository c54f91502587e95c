#include "clonekit/monoids.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <set>

namespace clonekit {

namespace {

FiniteOperation identity_map(int d) { return FiniteOperation::projection(d, 1, 1); }

void check_unary(int d, const FiniteOperation& f) {
  if (f.arity() != 1 || f.domain_size() != d)
    throw std::invalid_argument("monoid elements must be unary maps on a " + std::to_string(d) + "-point domain");
}

}  // namespace

TransformationMonoid TransformationMonoid::generated(int d, const std::vector<FiniteOperation>& generators,
                                                     std::size_t max_size) {
  for (const auto& g : generators) check_unary(d, g);
  std::set<FiniteOperation> seen{identity_map(d)};
  std::deque<FiniteOperation> queue{identity_map(d)};
  while (!queue.empty()) {
    auto s = queue.front();
    queue.pop_front();
    for (const auto& g : generators) {
      auto t = compose_unary(g, s);
      if (seen.insert(t).second) {
        if (seen.size() > max_size) throw std::length_error("monoid exceeds " + std::to_string(max_size) + " elements");
        queue.push_back(t);
      }
    }
  }
  TransformationMonoid m;
  m.d_ = d;
  m.elements_.assign(seen.begin(), seen.end());
  return m;
}

TransformationMonoid TransformationMonoid::from_elements(int d, std::vector<FiniteOperation> elements) {
  for (const auto& f : elements) check_unary(d, f);
  std::set<FiniteOperation> s(elements.begin(), elements.end());
  if (!s.count(identity_map(d))) throw std::invalid_argument("monoid lacks the identity");
  for (const auto& f : s)
    for (const auto& g : s)
      if (!s.count(compose_unary(f, g)))
        throw std::invalid_argument("not closed: " + f.to_string() + " o " + g.to_string());
  TransformationMonoid m;
  m.d_ = d;
  m.elements_.assign(s.begin(), s.end());
  return m;
}

bool TransformationMonoid::contains(const FiniteOperation& f) const {
  return std::binary_search(elements_.begin(), elements_.end(), f);
}

std::vector<FiniteOperation> TransformationMonoid::constants() const {
  std::vector<FiniteOperation> out;
  for (const auto& f : elements_)
    if (f.is_constant()) out.push_back(f);
  return out;
}

MonoidHomCheck check_monoid_hom(const MonoidMap& xi) {
  MonoidHomCheck r;
  auto fail = [&](std::string why) {
    r.verdict = false;
    r.problem = std::move(why);
    return r;
  };
  for (const auto& f : xi.source.elements()) {
    auto it = xi.assignment.find(f);
    if (it == xi.assignment.end()) return fail("no image for " + f.to_string());
    if (!xi.target.contains(it->second)) return fail("image of " + f.to_string() + " lies outside the target");
  }
  const int d = xi.source.domain_size();
  if (xi.assignment.at(identity_map(d)) != identity_map(xi.target.domain_size()))
    return fail("the identity is not sent to the identity");
  for (const auto& f : xi.source.elements())
    for (const auto& g : xi.source.elements()) {
      if (xi.assignment.at(compose_unary(f, g)) != compose_unary(xi.assignment.at(f), xi.assignment.at(g))) {
        r.f = f;
        r.g = g;
        return fail("composition law fails at " + f.to_string() + " o " + g.to_string());
      }
    }
  return r;
}

LiftResult lift_monoid_hom(const MonoidMap& xi, int arity_cap) {
  LiftResult out;
  out.hom_check = check_monoid_hom(xi);
  if (!out.hom_check.verdict) {
    out.status = LiftStatus::NotAHomomorphism;
    return out;
  }
  for (const auto& c : xi.source.constants())
    if (!xi.assignment.at(c).is_constant()) {
      out.status = LiftStatus::ConstantViolation;
      out.violating_constant = c;
      return out;
    }

  GenerateOptions opt;
  opt.arity_cap = arity_cap;
  opt.allow_large_domain = true;
  const int d = xi.source.domain_size(), e = xi.target.domain_size();
  CloneMap map{generate_clone(xi.source.elements(), opt), generate_clone(xi.target.elements(), opt), {}};
  for (int n = 1; n <= arity_cap; ++n)
    for (const auto& F : map.source.members(n)) {
      // F = m(x_i): m is read off the diagonal, i is any coordinate F depends on alone.
      std::vector<Value> diag;
      for (Value a = 0; a < d; ++a) diag.push_back(F(Tuple(static_cast<std::size_t>(n), a)));
      FiniteOperation m(d, 1, diag);
      int coord = 0;
      for (int i = 1; i <= n && !coord; ++i) {
        bool ok = true;
        Tuple x(static_cast<std::size_t>(n), 0);
        do ok = F(x) == m({x[static_cast<std::size_t>(i - 1)]});
        while (ok && next_tuple(x, d));
        if (ok) coord = i;
      }
      if (!coord) throw std::logic_error("member " + F.to_string() + " is not essentially unary");
      map.assignment[F] = compose(xi.assignment.at(m), {FiniteOperation::projection(e, n, coord)});
    }
  out.clone_report = verify_clone_homomorphism(map);
  out.clone_map = std::move(map);
  return out;
}

// ---------------------------------------------------------------------------------------------------------------

LazyMonoidOps invertibles_ops() {
  LazyMonoidOps ops;
  ops.compose = [](const LazyElement& f, const LazyElement& g) {
    auto fa = f.at, ga = g.at;
    return LazyElement{f.name + " o " + g.name, [fa, ga](Nat x) { return fa(ga(x)); }, f.in_sub && g.in_sub};
  };
  ops.in_sub = [](const LazyElement& e) { return e.in_sub; };
  return ops;
}

DiscontinuousHom::DiscontinuousHom(LazyMonoidOps ops, Nat c) : ops_(std::move(ops)), c_(c) {}

Nat DiscontinuousHom::unshift(Nat y) const {
  if (y == c_) throw std::invalid_argument("the fixed point has no preimage under the shift");
  return y < c_ ? y : y - 1;
}

LazyElement DiscontinuousHom::operator()(const LazyElement& e) const {
  const Nat c = c_;
  if (!ops_.in_sub(e)) return LazyElement{"const " + std::to_string(c), [c](Nat) { return c; }, false};
  auto ea = e.at;
  return LazyElement{"xi(" + e.name + ")",
                     [c, ea](Nat y) {
                       if (y == c) return c;
                       const Nat x = ea(y < c ? y : y - 1);
                       return x < c ? x : x + 1;
                     },
                     true};
}

DiscontinuityReport build_discontinuous_hom(const DiscontinuousHom& xi, const std::vector<LazyElement>& pool,
                                            const LazyElement& f, const std::vector<LazyElement>& approximants,
                                            DiscontinuityOptions options) {
  DiscontinuityReport r;
  const auto& ops = xi.ops();
  auto fail = [&](DiscontinuityStatus s, std::string why) {
    r.status = s;
    r.detail = std::move(why);
    return r;
  };
  if (ops.in_sub(f)) return fail(DiscontinuityStatus::NotConverging, f.name + " lies in the submonoid");

  for (const auto& x : pool) {
    if (ops.in_sub(x)) continue;
    for (const auto& m : pool) {
      ++r.absorption_checked;
      if (ops.in_sub(ops.compose(m, x)) || ops.in_sub(ops.compose(x, m))) {
        r.failing_pair = std::make_pair(m.name, x.name);
        return fail(DiscontinuityStatus::AbsorptionFailure, "composite of " + m.name + " and " + x.name +
                                                                 " lands in the submonoid");
      }
    }
  }

  Nat last = 0;
  for (const auto& a : approximants) {
    if (!ops.in_sub(a)) return fail(DiscontinuityStatus::NotConverging, "approximant " + a.name + " is outside the submonoid");
    Nat k = 0;
    while (k < options.prefix && a.at(k) == f.at(k)) ++k;
    r.approximant_agreement.push_back(k);
    if (k < last) return fail(DiscontinuityStatus::NotConverging, "agreement drops at " + a.name);
    last = k;
  }
  if (approximants.empty() || last < std::min<Nat>(approximants.size(), options.prefix))
    return fail(DiscontinuityStatus::NotConverging, "approximants do not converge within the prefix");

  std::vector<LazyElement> sample = pool;
  sample.push_back(f);
  sample.insert(sample.end(), approximants.begin(), approximants.end());
  std::mt19937_64 rng(options.seed);
  const Nat points = std::min<Nat>(options.points_per_pair, options.prefix);
  // Fix every element on the checked points first, so composites only reach values built here.
  for (const auto& x : sample)
    for (Nat p = 0; p < points; ++p) x.at(p);
  for (std::size_t i = 0; i < options.pairs; ++i) {
    const auto& x = sample[rng() % sample.size()];
    const auto& y = sample[rng() % sample.size()];
    const auto lhs = xi(ops.compose(x, y)), gx = xi(x), gy = xi(y);
    for (Nat p = 0; p < points; ++p)
      if (lhs.at(p) != gx.at(gy.at(p))) {
        r.failing_pair = std::make_pair(x.name, y.name);
        return fail(DiscontinuityStatus::HomomorphismFailure,
                    "xi(" + x.name + " o " + y.name + ") differs at " + std::to_string(p));
      }
    ++r.pairs_checked;
  }

  const auto target = xi(f);
  for (const auto& a : approximants) {
    const auto image = xi(a);
    Nat p = 0;
    while (p < options.prefix && image.at(p) == target.at(p)) ++p;
    if (p == options.prefix) return fail(DiscontinuityStatus::NoDivergence, "xi(" + a.name + ") agrees with xi(f) on the prefix");
    r.divergence.push_back(p + 1);
  }
  if (std::all_of(r.divergence.begin(), r.divergence.end(), [&](Nat d) { return d == r.divergence.front(); }))
    r.divergence_index = r.divergence.front();
  return r;
}

// ---------------------------------------------------------------------------------------------------------------

namespace {

struct LazyIso {
  std::shared_ptr<LazyLimit> world;
  std::map<int, int> fwd, back;
  bool surjective = true;
  int skip = -1;

  void forth(int x) {
    std::vector<int> dom, img;
    for (const auto& [a, b] : fwd) dom.push_back(a), img.push_back(b);
    OnePointType t = world->type_of(x, dom);
    t.base = img;
    const int y = world->realize(t, [this](int q) { return !back.count(q) && q != skip; });
    fwd[x] = y;
    back[y] = x;
  }

  void backward(int y) {
    std::vector<int> dom, img;
    for (const auto& [a, b] : fwd) dom.push_back(a), img.push_back(b);
    OnePointType t = world->type_of(y, img);
    t.base = dom;
    const int x = world->realize(t, [this](int q) { return !fwd.count(q); });
    fwd[x] = y;
    back[y] = x;
  }

  int at(int x) {
    if (x >= world->size()) world->ensure(x + 1);
    while (!fwd.count(x)) {
      int a = 0;
      while (fwd.count(a)) ++a;
      if (a >= world->size()) world->ensure(a + 1);
      forth(a);
      if (surjective) {
        int b = 0;
        while (back.count(b)) ++b;
        if (b >= world->size()) world->ensure(b + 1);
        backward(b);
      }
    }
    return fwd.at(x);
  }
};

}  // namespace

GraphEmbeddingMonoid::GraphEmbeddingMonoid(std::uint64_t seed)
    : world_(std::make_shared<LazyLimit>(AgeSpec::graphs(), LimitOptions{3, seed})) {
  world_->ensure(16);
  world_->saturate(8);
}

LazyElement GraphEmbeddingMonoid::identity() const {
  return LazyElement{"id", [](Nat x) { return x; }, true};
}

namespace {

std::shared_ptr<LazyIso> seeded_iso(const std::shared_ptr<LazyLimit>& w, const std::vector<std::pair<int, int>>& pairs,
                                    bool surjective, int skip) {
  auto iso = std::make_shared<LazyIso>();
  iso->world = w;
  iso->surjective = surjective;
  iso->skip = skip;
  int top = 0;
  for (const auto& [a, b] : pairs) top = std::max({top, a, b});
  w->ensure(top + 1);
  const int e = w->relation_index("E");
  for (const auto& [a, b] : pairs) {
    if (iso->fwd.count(a) || iso->back.count(b) || b == skip) throw std::invalid_argument("seed pairs are not injective");
    for (const auto& [c, d] : iso->fwd)
      if (w->holds(e, a, c) != w->holds(e, b, d)) throw std::invalid_argument("seed pairs are not a partial isomorphism");
    iso->fwd[a] = b;
    iso->back[b] = a;
  }
  return iso;
}

}  // namespace

LazyElement GraphEmbeddingMonoid::automorphism(const std::string& name, const std::vector<std::pair<int, int>>& seed_pairs) {
  auto iso = seeded_iso(world_, seed_pairs, true, -1);
  return LazyElement{name, [iso](Nat x) { return static_cast<Nat>(iso->at(static_cast<int>(x))); }, true};
}

LazyElement GraphEmbeddingMonoid::embedding_avoiding(const std::string& name, int skip,
                                                     const std::vector<std::pair<int, int>>& seed_pairs) {
  auto iso = seeded_iso(world_, seed_pairs, false, skip);
  return LazyElement{name, [iso](Nat x) { return static_cast<Nat>(iso->at(static_cast<int>(x))); }, false};
}

std::vector<LazyElement> GraphEmbeddingMonoid::approximants(const LazyElement& f, int count) {
  std::vector<LazyElement> out;
  for (int m = 1; m <= count; ++m) {
    std::vector<std::pair<int, int>> pairs;
    for (int p = 0; p < m; ++p) pairs.emplace_back(p, static_cast<int>(f.at(static_cast<Nat>(p))));
    out.push_back(automorphism(f.name + "~" + std::to_string(m), pairs));
  }
  return out;
}

}  // namespace clonekit
