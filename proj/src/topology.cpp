#include "clonekit/topology.hpp"

#include <algorithm>
#include <cmath>

namespace clonekit {

namespace {

Nat ipow(Nat b, int e) {
  unsigned __int128 r = 1;
  for (int i = 0; i < e; ++i) {
    r *= b;
    if (r > (static_cast<unsigned __int128>(1) << 63)) throw std::overflow_error("tuple index overflow");
  }
  return static_cast<Nat>(r);
}

}  // namespace

TupleEnumeration TupleEnumeration::finite(int d, int n) {
  if (d < 1 || n < 1) throw std::invalid_argument("bad enumeration parameters");
  TupleEnumeration e;
  e.finite_ = true;
  e.d_ = d;
  e.n_ = n;
  return e;
}

TupleEnumeration TupleEnumeration::countable(int n) {
  if (n < 1) throw std::invalid_argument("bad enumeration arity");
  TupleEnumeration e;
  e.finite_ = false;
  e.n_ = n;
  return e;
}

Nat TupleEnumeration::size() const {
  if (!finite_) throw std::logic_error("countable enumeration has no size");
  return ipow(static_cast<Nat>(d_), n_);
}

Nat TupleEnumeration::rank(const NatTuple& t) const {
  if (static_cast<int>(t.size()) != n_) throw std::invalid_argument("tuple length does not match arity");
  if (finite_) {
    Nat r = 0;
    for (Nat v : t) {
      if (v >= static_cast<Nat>(d_)) throw std::out_of_range("tuple entry outside finite domain");
      r = r * static_cast<Nat>(d_) + v;
    }
    return r;
  }
  const Nat m = *std::max_element(t.begin(), t.end());
  Nat r = ipow(m, n_);
  bool has_max = false;
  for (int i = 0; i < n_; ++i) {
    const int rest = n_ - i - 1;
    for (Nat v = 0; v < t[static_cast<std::size_t>(i)]; ++v) {
      bool covered = has_max || v == m;
      r += covered ? ipow(m + 1, rest) : ipow(m + 1, rest) - ipow(m, rest);
    }
    has_max |= (t[static_cast<std::size_t>(i)] == m);
  }
  return r;
}

NatTuple TupleEnumeration::unrank(Nat index) const {
  NatTuple t(static_cast<std::size_t>(n_), 0);
  if (finite_) {
    if (index >= size()) throw std::out_of_range("index beyond finite enumeration");
    for (int i = n_ - 1; i >= 0; --i) {
      t[static_cast<std::size_t>(i)] = index % static_cast<Nat>(d_);
      index /= static_cast<Nat>(d_);
    }
    return t;
  }
  Nat m = static_cast<Nat>(std::floor(std::pow(static_cast<long double>(index), 1.0L / n_)));
  while (m > 0 && ipow(m, n_) > index) --m;
  while (ipow(m + 1, n_) <= index) ++m;
  Nat r = index - ipow(m, n_);
  bool has_max = false;
  for (int i = 0; i < n_; ++i) {
    const int rest = n_ - i - 1;
    for (Nat v = 0; v <= m; ++v) {
      bool covered = has_max || v == m;
      Nat block = covered ? ipow(m + 1, rest) : ipow(m + 1, rest) - ipow(m, rest);
      if (r < block) {
        t[static_cast<std::size_t>(i)] = v;
        has_max = covered;
        break;
      }
      r -= block;
    }
  }
  return t;
}

TupleEnumeration Evaluator::enumeration() const {
  return finite_domain ? TupleEnumeration::finite(*finite_domain, arity) : TupleEnumeration::countable(arity);
}

Evaluator table_evaluator(const FiniteOperation& f) {
  Evaluator e;
  e.arity = f.arity();
  e.finite_domain = f.domain_size();
  e.fn = [f](const NatTuple& x) {
    Tuple t(x.begin(), x.end());
    return static_cast<Nat>(f(t));
  };
  return e;
}

Evaluator nat_evaluator(int arity, std::function<Nat(const NatTuple&)> fn) {
  Evaluator e;
  e.arity = arity;
  e.fn = std::move(fn);
  return e;
}

double Distance::value() const {
  switch (kind) {
    case Kind::One: return 1.0;
    case Kind::Exact: return std::ldexp(1.0, -static_cast<int>(std::min<Nat>(index, 1000)));
    default: return 0.0;
  }
}

std::string Distance::to_string() const {
  switch (kind) {
    case Kind::One: return "one";
    case Kind::Exact: return "exact 2^-" + std::to_string(index);
    default: return "zero-so-far " + std::to_string(index);
  }
}

static Nat probe_limit(const Evaluator& f, const Evaluator& g, Nat budget) {
  if (f.finite_domain && g.finite_domain && *f.finite_domain == *g.finite_domain) {
    return std::min(budget, f.enumeration().size());
  }
  return budget;
}

static TupleEnumeration common_enumeration(const Evaluator& f, const Evaluator& g) {
  if (f.finite_domain && g.finite_domain && *f.finite_domain == *g.finite_domain) return f.enumeration();
  return TupleEnumeration::countable(f.arity);
}

Nat agreement_length(const Evaluator& f, const Evaluator& g, Nat probe_budget) {
  if (f.arity != g.arity) return 0;
  auto en = common_enumeration(f, g);
  const Nat limit = probe_limit(f, g, probe_budget);
  for (Nat i = 0; i < limit; ++i) {
    auto x = en.unrank(i);
    if (f(x) != g(x)) return i;
  }
  return limit;
}

Distance distance(const Evaluator& f, const Evaluator& g, Nat probe_budget) {
  if (probe_budget < 1) throw std::invalid_argument("probe budget must be at least 1");
  if (f.arity != g.arity) return Distance{Distance::Kind::One, 0};
  const Nat limit = probe_limit(f, g, probe_budget);
  const Nat agree = agreement_length(f, g, probe_budget);
  if (agree < limit) return Distance{Distance::Kind::Exact, agree + 1};
  return Distance{Distance::Kind::ZeroSoFar, limit};
}

bool in_basic_open(const Evaluator& f, const std::vector<std::pair<NatTuple, Nat>>& constraints) {
  for (const auto& [x, v] : constraints) {
    if (static_cast<int>(x.size()) != f.arity) throw std::invalid_argument("constraint tuple arity does not match");
  }
  for (const auto& [x, v] : constraints) {
    if (f(x) != v) return false;
  }
  return true;
}

CauchyPrefix CauchyPrefix::from_elements(std::vector<Evaluator> elements, Nat probe_budget) {
  CauchyPrefix p;
  if (elements.empty()) throw std::invalid_argument("empty Cauchy prefix");
  p.arity = elements.front().arity;
  for (const auto& e : elements) {
    if (e.arity != p.arity) throw std::invalid_argument("Cauchy prefix mixes arities");
  }
  for (std::size_t j = 0; j + 1 < elements.size(); ++j) {
    p.profile.push_back(agreement_length(elements[j], elements[j + 1], probe_budget));
  }
  p.elements = std::move(elements);
  return p;
}

std::vector<Nat> extend_uniformly_continuous(const ModulusMap& map, const CauchyPrefix& target, Nat precision) {
  const Nat need = map.modulus(precision);
  const Nat achieved = target.profile.empty() ? 0 : target.profile.back();
  if (target.elements.size() < 2 || achieved < need) throw InsufficientConvergence(achieved, need);
  Evaluator image = map.map(target.elements.back());
  auto en = image.enumeration();
  std::vector<Nat> out;
  for (Nat i = 0; i < precision; ++i) out.push_back(image(en.unrank(i)));
  return out;
}

ModulusMap conjugation_map(std::function<Nat(Nat)> s, std::function<Nat(Nat)> s_inverse) {
  ModulusMap m;
  m.map = [s, s_inverse](const Evaluator& g) {
    return nat_evaluator(1, [s, s_inverse, g](const NatTuple& x) { return s(g(NatTuple{s_inverse(x[0])})); });
  };
  m.modulus = [s_inverse](Nat k) {
    Nat n = 0;
    for (Nat x = 0; x < k; ++x) n = std::max(n, s_inverse(x) + 1);
    return n;
  };
  return m;
}

}  // namespace clonekit
