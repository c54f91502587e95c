#include "clonekit/clone.hpp"

#include <functional>

namespace clonekit {

const std::vector<FiniteOperation>& FunctionClone::members(int arity) const {
  if (arity < 1 || arity > cap_) throw std::out_of_range("arity " + std::to_string(arity) + " outside 1.." + std::to_string(cap_));
  return levels_[static_cast<std::size_t>(arity - 1)].ops;
}

const Term& FunctionClone::witness(int arity, std::size_t index) const {
  return levels_.at(static_cast<std::size_t>(arity - 1)).witnesses.at(index);
}

std::optional<std::size_t> FunctionClone::index_of(const FiniteOperation& f) const {
  if (f.domain_size() != d_ || f.arity() < 1 || f.arity() > cap_) return std::nullopt;
  const auto& idx = levels_[static_cast<std::size_t>(f.arity() - 1)].index;
  auto it = idx.find(f);
  if (it == idx.end()) return std::nullopt;
  return it->second;
}

std::size_t FunctionClone::size() const {
  std::size_t s = 0;
  for (const auto& l : levels_) s += l.ops.size();
  return s;
}

int FunctionClone::derivation_symbol(int arity, std::size_t index) const {
  return levels_.at(static_cast<std::size_t>(arity - 1)).symbol.at(index);
}

const std::vector<std::size_t>& FunctionClone::derivation_args(int arity, std::size_t index) const {
  return levels_.at(static_cast<std::size_t>(arity - 1)).args.at(index);
}

Equation FunctionClone::to_equation(const GroundEquation& g) const {
  const auto& level = levels_.at(static_cast<std::size_t>(g.arity - 1));
  std::vector<Term> children;
  for (std::size_t a : g.args) children.push_back(level.witnesses[a]);
  return Equation{make_apply(g.symbol, std::move(children)), level.witnesses[g.result], g.arity};
}

std::vector<Equation> FunctionClone::equations(std::size_t limit) const {
  std::vector<Equation> out;
  for (const auto& g : ground_) {
    if (out.size() >= limit) break;
    out.push_back(to_equation(g));
  }
  return out;
}

FunctionClone generate_clone(const std::vector<FiniteOperation>& generators, const GenerateOptions& options) {
  if (options.arity_cap < 1) throw std::invalid_argument("arity cap must be at least 1");
  int d = 0;
  for (const auto& g : generators) {
    if (d == 0) d = g.domain_size();
    if (g.domain_size() != d) throw std::invalid_argument("generators live on different domains");
    if (g.arity() > options.arity_cap) {
      throw std::invalid_argument("generator arity " + std::to_string(g.arity()) + " exceeds the arity cap " +
                                  std::to_string(options.arity_cap));
    }
  }
  if (d == 0) d = 2;
  if (d > 4 && !options.allow_large_domain) {
    throw std::invalid_argument("domain size " + std::to_string(d) + " needs an explicit large-domain override");
  }

  FunctionClone c;
  c.d_ = d;
  c.cap_ = options.arity_cap;
  c.generators_ = generators;
  c.levels_.resize(static_cast<std::size_t>(options.arity_cap));
  std::size_t total = 0;

  for (int m = 1; m <= options.arity_cap; ++m) {
    auto& level = c.levels_[static_cast<std::size_t>(m - 1)];
    auto add = [&](FiniteOperation op, Term w, int symbol, std::vector<std::size_t> args) {
      level.index.emplace(op, level.ops.size());
      level.ops.push_back(std::move(op));
      level.witnesses.push_back(std::move(w));
      level.symbol.push_back(symbol);
      level.args.push_back(std::move(args));
      if (++total > options.max_members) {
        throw CloneSizeExceeded("clone exceeds " + std::to_string(options.max_members) + " members");
      }
    };
    for (int k = 1; k <= m; ++k) add(FiniteOperation::projection(d, m, k), make_var(k - 1), -1, {});

    std::size_t frontier_begin = 0;
    while (frontier_begin < level.ops.size()) {
      const std::size_t round_end = level.ops.size();
      for (std::size_t gi = 0; gi < generators.size(); ++gi) {
        const auto& g = generators[gi];
        const auto r = static_cast<std::size_t>(g.arity());
        std::vector<std::size_t> pick(r, 0);
        while (true) {
          bool touches_frontier = false;
          for (std::size_t p : pick) touches_frontier |= (p >= frontier_begin);
          if (touches_frontier) {
            std::vector<FiniteOperation> args;
            args.reserve(r);
            for (std::size_t p : pick) args.push_back(level.ops[p]);
            FiniteOperation composite = compose(g, args);
            auto it = level.index.find(composite);
            if (it == level.index.end()) {
              std::vector<Term> children;
              for (std::size_t p : pick) children.push_back(level.witnesses[p]);
              add(std::move(composite), make_apply(static_cast<int>(gi), std::move(children)), static_cast<int>(gi), pick);
            } else {
              c.ground_.push_back(GroundEquation{m, static_cast<int>(gi), pick, it->second});
            }
          }
          if (!next_index_tuple(pick, round_end)) break;
        }
      }
      frontier_begin = round_end;
    }
  }
  return c;
}

ElementClass classify_element(const FunctionClone& clone, const FiniteOperation& f) {
  if (f.arity() != 1) throw std::invalid_argument("classification needs a unary operation");
  if (!clone.contains(f)) throw NotAMember("operation " + f.to_string() + " is not a member of the clone");
  ElementClass out;
  out.constant = f.is_constant();
  const auto id = FiniteOperation::projection(clone.domain_size(), 1, 1);
  for (const auto& g : clone.members(1)) {
    if (compose_unary(f, g) == id && compose_unary(g, f) == id) {
      out.invertible = true;
      out.inverse = g;
      break;
    }
  }
  return out;
}

EquationCheck check_term_equation(const Equation& e, const Binding& binding, int domain_size) {
  const int needed = std::max(max_variable(e.lhs), max_variable(e.rhs)) + 1;
  if (needed > e.arity) throw std::invalid_argument("equation uses more variables than its declared arity");
  const int n = std::max(e.arity, 1);
  FiniteOperation l = evaluate_term(e.lhs, binding, domain_size, n);
  FiniteOperation r = evaluate_term(e.rhs, binding, domain_size, n);
  EquationCheck out;
  for (std::size_t i = 0; i < l.table().size(); ++i) {
    if (l.at(i) != r.at(i)) {
      out.holds = false;
      out.witness = unrank_tuple(domain_size, n, i);
      break;
    }
  }
  return out;
}

HomomorphismReport verify_clone_homomorphism(const CloneMap& map, const HomCheckOptions& options) {
  HomomorphismReport rep;
  const auto& src = map.source;
  const auto& tgt = map.target;
  auto image = [&](const FiniteOperation& f) -> const FiniteOperation* {
    auto it = map.assignment.find(f);
    return it == map.assignment.end() ? nullptr : &it->second;
  };
  if (src.arity_cap() > tgt.arity_cap()) rep.problems.push_back("target clone has a smaller arity cap than the source");
  for (int n = 1; n <= src.arity_cap(); ++n) {
    for (const auto& f : src.members(n)) {
      const auto* g = image(f);
      if (!g) {
        rep.problems.push_back("member " + f.to_string() + " has no image");
        continue;
      }
      if (g->arity() != n) rep.problems.push_back("image of " + f.to_string() + " changes arity");
      else if (!tgt.contains(*g)) rep.problems.push_back("image " + g->to_string() + " is not in the target clone");
    }
    for (int k = 1; k <= n; ++k) {
      const auto* g = image(FiniteOperation::projection(src.domain_size(), n, k));
      if (g && *g != FiniteOperation::projection(tgt.domain_size(), n, k)) {
        rep.problems.push_back("projection " + std::to_string(k) + "/" + std::to_string(n) + " is not sent to the matching projection");
      }
    }
  }
  if (!rep.problems.empty()) {
    rep.verdict = false;
    return rep;
  }
  for (int n = 1; n <= src.arity_cap(); ++n) {
    for (const auto& f : src.members(n)) {
      const FiniteOperation& fi = *image(f);
      for (int m = 1; m <= src.arity_cap(); ++m) {
        const auto& level = src.members(m);
        std::vector<std::size_t> pick(static_cast<std::size_t>(n), 0);
        while (true) {
          if (options.max_checks && rep.compositions_checked >= options.max_checks) {
            rep.exhaustive = false;
            return rep;
          }
          std::vector<FiniteOperation> args, imgs;
          for (std::size_t p : pick) {
            args.push_back(level[p]);
            imgs.push_back(*image(level[p]));
          }
          FiniteOperation lhs = *image(compose(f, args));
          FiniteOperation rhs = compose(fi, imgs);
          ++rep.compositions_checked;
          if (lhs != rhs) {
            rep.verdict = false;
            if (rep.violations.size() < options.max_reported) {
              rep.violations.push_back(CompositionViolation{f, args, lhs, rhs});
            }
          }
          if (!next_index_tuple(pick, level.size())) break;
        }
      }
    }
  }
  return rep;
}

namespace {

int collapse(const FunctionClone& c, int arity, std::size_t index, const std::vector<int>& coords) {
  int sym = c.derivation_symbol(arity, index);
  if (sym < 0) return static_cast<int>(index) + 1;
  const auto& args = c.derivation_args(arity, index);
  return collapse(c, arity, args[static_cast<std::size_t>(coords[static_cast<std::size_t>(sym)] - 1)], coords);
}

}  // namespace

int projection_image(const FunctionClone& clone, int arity, std::size_t index, const std::vector<int>& coordinates) {
  return collapse(clone, arity, index, coordinates);
}

ProjectionHomResult find_projection_homomorphism(const FunctionClone& clone) {
  ProjectionHomResult out;
  out.arity_cap = clone.arity_cap();
  out.scope = "certifies the fragment up to arity " + std::to_string(clone.arity_cap()) +
              " only; a verdict for the whole clone needs the arity cap raised";
  const auto& gens = clone.generators();
  const std::size_t k = gens.size();

  // Highest generator id an equation depends on, through the derivations of its members.
  std::vector<std::vector<int>> member_top(static_cast<std::size_t>(clone.arity_cap()));
  for (int m = 1; m <= clone.arity_cap(); ++m) {
    auto& tops = member_top[static_cast<std::size_t>(m - 1)];
    tops.resize(clone.members(m).size(), -1);
    for (std::size_t i = 0; i < tops.size(); ++i) {
      int sym = clone.derivation_symbol(m, i);
      if (sym < 0) continue;
      int t = sym;
      for (std::size_t a : clone.derivation_args(m, i)) t = std::max(t, tops[a]);
      tops[i] = t;
    }
  }
  std::vector<std::vector<const GroundEquation*>> by_top(k);
  for (const auto& g : clone.ground_equations()) {
    const auto& tops = member_top[static_cast<std::size_t>(g.arity - 1)];
    int t = std::max(g.symbol, tops[g.result]);
    for (std::size_t a : g.args) t = std::max(t, tops[a]);
    by_top[static_cast<std::size_t>(t)].push_back(&g);
  }

  std::vector<int> coords(k, 1);
  std::function<bool(std::size_t)> search = [&](std::size_t i) -> bool {
    if (i == k) return true;
    for (int c = 1; c <= gens[i].arity(); ++c) {
      coords[i] = c;
      bool ok = true;
      for (const auto* g : by_top[i]) {
        ++out.equations_checked;
        int lhs = collapse(clone, g->arity, g->args[static_cast<std::size_t>(coords[static_cast<std::size_t>(g->symbol)] - 1)], coords);
        if (lhs != collapse(clone, g->arity, g->result, coords)) {
          ok = false;
          break;
        }
      }
      if (ok && search(i + 1)) return true;
    }
    return false;
  };
  if (search(0)) out.coordinates = coords;
  return out;
}

}  // namespace clonekit
