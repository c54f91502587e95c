#include "clonekit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <functional>
#include <memory>
#include <set>
#include <sstream>

#include "clonekit/back_and_forth.hpp"
#include "clonekit/birkhoff.hpp"
#include "clonekit/clone.hpp"
#include "clonekit/fraisse.hpp"
#include "clonekit/gates.hpp"
#include "clonekit/monoids.hpp"
#include "clonekit/structures.hpp"
#include "clonekit/topology.hpp"

namespace clonekit {

namespace {

const char* kCapsSource = "CLONEKIT_CAPS";

}  // namespace

const std::vector<std::string>& Caps::known_keys() {
  static const std::vector<std::string> keys{
      "approximants", "arity",   "budget", "cap",     "depth",  "generators",      "limit",        "pairs",
      "points",       "power",   "precision", "prefix", "richness-cap", "requirement-cap", "saturate", "seed",
      "size",         "steps",   "support", "vars",   "width",  "window"};
  return keys;
}

Caps Caps::parse(const std::string& text) {
  Caps caps;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    const std::string item = text.substr(pos, end - pos);
    const int col = static_cast<int>(pos) + 1;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ParseError(kCapsSource, 1, col, "expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ParseError(kCapsSource, 1, col, "unknown key '" + key + "'");
    auto v = parse_int_list(value, 0, std::numeric_limits<int>::max(), kCapsSource);
    if (v.size() != 1) throw ParseError(kCapsSource, 1, col + static_cast<int>(eq) + 1, "value of '" + key + "' must be one integer");
    if (!caps.values_.emplace(key, v[0]).second) throw ParseError(kCapsSource, 1, col, "key '" + key + "' repeated");
    pos = end + 1;
  }
  return caps;
}

long long Caps::get(const std::string& key, long long fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

namespace {

struct Ctx {
  Caps caps;
  std::uint64_t seed = 1;
  std::string command;
  std::function<void(Report&)> action;
};

// Undetermined outcome raised from inside a handler.
struct Suspended {
  std::string why;
};

template <class T>
CLI::Option* num(CLI::App* sc, const Ctx& ctx, const std::string& key, T& var, long long fallback, long long lo,
                 long long hi, const std::string& desc) {
  const long long v = ctx.caps.get(key, fallback);
  if (v < lo || v > hi)
    throw ParseError(kCapsSource, 1, 0, key + "=" + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                                            std::to_string(hi) + "]");
  var = static_cast<T>(v);
  return sc->add_option("--" + key, var, desc)->capture_default_str()->check(CLI::Range(lo, hi));
}

CLI::Option* file(CLI::App* sc, const std::string& flag, std::string& var, const std::string& desc) {
  return sc->add_option(flag, var, desc)->required();
}

void on(CLI::App* sc, Ctx& ctx, const std::string& name, std::function<void(Report&)> fn) {
  sc->callback([&ctx, name, fn] {
    ctx.command = name;
    ctx.action = fn;
  });
}

std::vector<FiniteOperation> load_ops(const std::string& path) { return parse_ops(read_text_file(path), path); }
RelationalStructure load_structure(const std::string& path) { return parse_structure(read_text_file(path), path); }
Algebra load_algebra(const std::string& path) { return parse_algebra(read_text_file(path), path); }
std::vector<ScriptedEvaluator> load_script(const std::string& path) {
  return parse_evaluator_script(read_text_file(path), path);
}

int shared_domain(const std::vector<FiniteOperation>& ops, const std::string& path) {
  for (const auto& f : ops)
    if (f.domain_size() != ops.front().domain_size()) throw ParseError(path, 0, 0, "operations must share one domain");
  return ops.front().domain_size();
}

const FiniteOperation& single_op(const std::vector<FiniteOperation>& ops, const std::string& path) {
  if (ops.size() != 1) throw ParseError(path, 0, 0, "expected exactly one op block, found " + std::to_string(ops.size()));
  return ops.front();
}

FunctionClone clone_of(const std::vector<FiniteOperation>& ops, int cap) {
  GenerateOptions g;
  g.arity_cap = cap;
  g.allow_large_domain = true;
  auto c = generate_clone(ops, g);
  c.set_generator_names(generator_names(ops.size()));
  return c;
}

Record tuple_json(const std::vector<int>& t) {
  Record a = Record::array();
  for (int v : t) a.push_back(v);
  return a;
}

Record nat_json(const NatTuple& t) {
  Record a = Record::array();
  for (Nat v : t) a.push_back(v);
  return a;
}

std::vector<int> first_points(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}

std::string fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

Verdict verdict_of(bool b) { return b ? Verdict::True : Verdict::False; }

// ---------------------------------------------------------------------------------------------------------------

void add_clone(CLI::App& app, Ctx& ctx) {
  auto* grp = app.add_subcommand("clone", "finite clones: generation, membership, equations, homomorphisms");
  grp->require_subcommand(1, 1);

  {
    struct O { std::string in; int cap = 3; int limit = 1000; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("gen", "generate the clone of an ops bundle up to an arity cap");
    file(sc, "--in", o->in, "ops bundle");
    num(sc, ctx, "cap", o->cap, 3, 1, 6, "arity cap");
    num(sc, ctx, "limit", o->limit, 1000, 0, 1 << 30, "members listed per arity");
    on(sc, ctx, "clone gen", [o](Report& r) {
      auto ops = load_ops(o->in);
      auto clone = clone_of(ops, o->cap);
      const auto names = generator_names(ops.size());
      for (int n = 1; n <= o->cap; ++n) {
        const auto& ms = clone.members(n);
        for (std::size_t i = 0; i < ms.size() && i < static_cast<std::size_t>(o->limit); ++i) {
          auto& m = r.add("member");
          m["arity"] = n;
          m["index"] = i;
          m["op"] = ms[i].to_string();
          m["term"] = term_to_string(clone.witness(n, i), names);
        }
        auto& a = r.add("arity");
        a["arity"] = n;
        a["members"] = ms.size();
      }
      auto& s = r.add("summary");
      s["members"] = clone.size();
      s["arity_cap"] = o->cap;
      s["ground_equations"] = clone.ground_equations().size();
    });
  }
  {
    struct O { std::string in, element; int cap = 2; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("classify", "is a unary member invertible in the clone, is it constant");
    file(sc, "--in", o->in, "ops bundle");
    sc->add_option("--element", o->element, "unary table, e.g. \"1 0\"")->required();
    num(sc, ctx, "cap", o->cap, 2, 1, 6, "arity cap");
    on(sc, ctx, "clone classify", [o](Report& r) {
      auto ops = load_ops(o->in);
      const int d = shared_domain(ops, o->in);
      auto table = parse_int_list(o->element, 0, d - 1, "--element");
      if (static_cast<int>(table.size()) != d)
        throw ParseError("--element", 1, 0, "a unary table over d = " + std::to_string(d) + " has " + std::to_string(d) + " entries");
      FiniteOperation f(d, 1, table);
      auto clone = clone_of(ops, o->cap);
      auto& e = r.add("element");
      e["op"] = f.to_string();
      e["member"] = clone.contains(f);
      if (!clone.contains(f)) {
        r.verdict = Verdict::False;
        return;
      }
      auto c = classify_element(clone, f);
      auto& k = r.add("class");
      k["invertible"] = c.invertible;
      k["inverse"] = c.inverse ? Record(c.inverse->to_string()) : Record(nullptr);
      k["constant"] = c.constant;
    });
  }
  {
    struct O { std::string in, eq; int vars = 0; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("eq", "check a term equation over the generators f1..fk");
    file(sc, "--in", o->in, "ops bundle");
    sc->add_option("--eq", o->eq, "equation, e.g. \"f1(x1,x2) = f1(x2,x1)\"")->required();
    num(sc, ctx, "vars", o->vars, 0, 0, 8, "read the equation over at least this many variables");
    on(sc, ctx, "clone eq", [o](Report& r) {
      auto ops = load_ops(o->in);
      const int d = shared_domain(ops, o->in);
      std::vector<int> arities;
      Binding b;
      for (std::size_t i = 0; i < ops.size(); ++i) {
        arities.push_back(ops[i].arity());
        b[static_cast<int>(i)] = ops[i];
      }
      auto e = parse_equation(o->eq, arities, o->vars, "--eq");
      auto& q = r.add("equation");
      q["equation"] = equation_to_string(e, generator_names(ops.size()));
      q["arity"] = e.arity;
      auto c = check_term_equation(e, b, d);
      if (!c.holds) {
        auto& w = r.add("witness");
        w["point"] = tuple_json(*c.witness);
        w["lhs"] = evaluate_term_at(e.lhs, b, *c.witness);
        w["rhs"] = evaluate_term_at(e.rhs, b, *c.witness);
      }
      r.verdict = verdict_of(c.holds);
    });
  }
  {
    struct O { std::string in, images; int cap = 2; int limit = 8; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("hom", "does generator i -> image i extend to a clone homomorphism");
    file(sc, "--in", o->in, "source ops bundle");
    file(sc, "--images", o->images, "one image per generator, same arities");
    num(sc, ctx, "cap", o->cap, 2, 1, 4, "arity cap");
    num(sc, ctx, "limit", o->limit, 8, 0, 1 << 20, "violations listed");
    on(sc, ctx, "clone hom", [o](Report& r) {
      auto src = load_ops(o->in), img = load_ops(o->images);
      shared_domain(src, o->in);
      const int d2 = shared_domain(img, o->images);
      if (img.size() != src.size())
        throw ParseError(o->images, 0, 0, "expected " + std::to_string(src.size()) + " images, found " + std::to_string(img.size()));
      Binding b;
      for (std::size_t i = 0; i < src.size(); ++i) {
        if (img[i].arity() != src[i].arity())
          throw ParseError(o->images, 0, 0, "image " + std::to_string(i + 1) + " has arity " + std::to_string(img[i].arity()) +
                                                ", generator has " + std::to_string(src[i].arity()));
        b[static_cast<int>(i)] = img[i];
      }
      CloneMap m{clone_of(src, o->cap), clone_of(img, o->cap), {}};
      for (int n = 1; n <= o->cap; ++n)
        for (std::size_t i = 0; i < m.source.members(n).size(); ++i)
          m.assignment[m.source.members(n)[i]] = evaluate_term(m.source.witness(n, i), b, d2, n);
      auto rep = verify_clone_homomorphism(m);
      auto& c = r.add("check");
      c["source_members"] = m.source.size();
      c["target_members"] = m.target.size();
      c["compositions_checked"] = rep.compositions_checked;
      c["exhaustive"] = rep.exhaustive;
      for (const auto& p : rep.problems) r.add("problem")["text"] = p;
      for (std::size_t i = 0; i < rep.violations.size() && i < static_cast<std::size_t>(o->limit); ++i) {
        const auto& v = rep.violations[i];
        auto& x = r.add("violation");
        x["outer"] = v.outer.to_string();
        x["args"] = Record::array();
        for (const auto& a : v.args) x["args"].push_back(a.to_string());
        x["image_of_composite"] = v.image_of_composite.to_string();
        x["composite_of_images"] = v.composite_of_images.to_string();
      }
      r.verdict = verdict_of(rep.verdict);
    });
  }
  {
    struct O { std::string in; int cap = 3; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("proj-hom", "search for a homomorphism onto the projection clone");
    file(sc, "--in", o->in, "ops bundle");
    num(sc, ctx, "cap", o->cap, 3, 1, 6, "arity cap");
    on(sc, ctx, "clone proj-hom", [o](Report& r) {
      auto ops = load_ops(o->in);
      auto clone = clone_of(ops, o->cap);
      auto res = find_projection_homomorphism(clone);
      auto& s = r.add("search");
      s["equations_checked"] = res.equations_checked;
      s["arity_cap"] = res.arity_cap;
      s["scope"] = res.scope;
      if (res.coordinates)
        for (std::size_t i = 0; i < res.coordinates->size(); ++i) {
          auto& a = r.add("assignment");
          a["generator"] = "f" + std::to_string(i + 1);
          a["coordinate"] = (*res.coordinates)[i];
        }
      r.verdict = verdict_of(res.coordinates.has_value());
    });
  }
}

void add_top(CLI::App& app, Ctx& ctx) {
  auto* grp = app.add_subcommand("top", "the pointwise-convergence metric on evaluators");
  grp->require_subcommand(1, 1);
  {
    struct O { std::string f, g; int budget = 4096; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("distance", "distance between the first evaluators of two scripts");
    file(sc, "--f", o->f, "evaluator script");
    file(sc, "--g", o->g, "evaluator script");
    num(sc, ctx, "budget", o->budget, 4096, 1, 1 << 30, "tuples probed");
    on(sc, ctx, "top distance", [o](Report& r) {
      auto f = load_script(o->f), g = load_script(o->g);
      if (f.front().evaluator.arity != g.front().evaluator.arity)
        throw ParseError(o->g, 0, 0, "arity differs from the first evaluator");
      auto d = distance(f.front().evaluator, g.front().evaluator, static_cast<Nat>(o->budget));
      auto& x = r.add("distance");
      x["f"] = f.front().description;
      x["g"] = g.front().description;
      x["kind"] = d.kind == Distance::Kind::Exact ? "exact" : d.kind == Distance::Kind::One ? "one" : "zero-so-far";
      x["index"] = d.index;
      x["value"] = d.to_string();
    });
  }
  {
    struct O { std::string target, swap = "0 1"; int precision = 8, budget = 256; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("extend", "extend conjugation by a transposition along a Cauchy prefix");
    file(sc, "--target", o->target, "evaluator script: the unary prefix elements in order");
    sc->add_option("--swap", o->swap, "the transposition \"a b\"")->capture_default_str();
    num(sc, ctx, "precision", o->precision, 8, 1, 1 << 20, "output points");
    num(sc, ctx, "budget", o->budget, 256, 1, 1 << 24, "agreement probe budget");
    on(sc, ctx, "top extend", [o](Report& r) {
      auto script = load_script(o->target);
      std::vector<Evaluator> els;
      for (const auto& s : script) {
        if (s.evaluator.arity != 1) throw ParseError(o->target, 0, 0, "prefix elements must be unary: " + s.description);
        els.push_back(s.evaluator);
      }
      auto ab = parse_int_list(o->swap, 0, std::numeric_limits<int>::max(), "--swap");
      if (ab.size() != 2) throw ParseError("--swap", 1, 0, "expected two points");
      const Nat a = static_cast<Nat>(ab[0]), b = static_cast<Nat>(ab[1]);
      auto s = [a, b](Nat x) { return x == a ? b : x == b ? a : x; };
      auto prefix = CauchyPrefix::from_elements(els, static_cast<Nat>(o->budget));
      auto& p = r.add("prefix");
      p["elements"] = els.size();
      p["profile"] = nat_json(prefix.profile);
      try {
        auto values = extend_uniformly_continuous(conjugation_map(s, s), prefix, static_cast<Nat>(o->precision));
        r.add("values")["values"] = nat_json(values);
      } catch (const InsufficientConvergence& e) {
        auto& c = r.add("convergence");
        c["achieved"] = e.achieved();
        c["required"] = e.required();
        r.verdict = Verdict::Undetermined;
      }
    });
  }
}

void add_struct(CLI::App& app, Ctx& ctx) {
  auto* grp = app.add_subcommand("struct", "polymorphisms, invariants, orbits and related structure checks");
  grp->require_subcommand(1, 1);
  {
    struct O { std::string in; int arity = 2, limit = 256; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("pol", "polymorphisms of a structure at one arity");
    file(sc, "--in", o->in, "structure file");
    num(sc, ctx, "arity", o->arity, 2, 1, 4, "arity");
    num(sc, ctx, "limit", o->limit, 256, 0, 1 << 30, "members listed");
    on(sc, ctx, "struct pol", [o](Report& r) {
      auto s = load_structure(o->in);
      auto p = polymorphisms(s, o->arity);
      for (std::size_t i = 0; i < p.members.size() && i < static_cast<std::size_t>(o->limit); ++i) {
        auto& m = r.add("member");
        m["index"] = i;
        m["op"] = p.members[i].to_string();
      }
      auto& x = r.add("summary");
      x["arity"] = p.arity;
      x["members"] = p.members.size();
    });
  }
  {
    struct O { std::string in; int arity = 2, limit = 64; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("inv", "relations of one arity invariant under an ops bundle");
    file(sc, "--in", o->in, "ops bundle");
    num(sc, ctx, "arity", o->arity, 2, 1, 4, "relation arity");
    num(sc, ctx, "limit", o->limit, 64, 0, 1 << 30, "relations listed");
    on(sc, ctx, "struct inv", [o](Report& r) {
      auto ops = load_ops(o->in);
      auto rels = invariant_relations(ops, shared_domain(ops, o->in), o->arity);
      for (std::size_t i = 0; i < rels.size() && i < static_cast<std::size_t>(o->limit); ++i) {
        auto& x = r.add("relation");
        x["index"] = i;
        x["size"] = rels[i].size();
        x["tuples"] = Record::array();
        for (const auto& t : rels[i]) x["tuples"].push_back(tuple_json(t));
      }
      auto& s = r.add("summary");
      s["arity"] = o->arity;
      s["relations"] = rels.size();
    });
  }
  {
    struct O { std::string in; int n = 2, limit = 64; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("orbits", "orbits on n-tuples of the group generated by unary permutations");
    file(sc, "--in", o->in, "ops bundle of unary permutations");
    sc->add_option("--n", o->n, "tuple length")->capture_default_str()->check(CLI::Range(1, 6));
    num(sc, ctx, "limit", o->limit, 64, 0, 1 << 30, "orbits listed");
    on(sc, ctx, "struct orbits", [o](Report& r) {
      auto ops = load_ops(o->in);
      const int d = shared_domain(ops, o->in);
      for (const auto& f : ops)
        if (f.arity() != 1) throw ParseError(o->in, 0, 0, "generators must be unary");
      auto rep = orbit_count(TransformationMonoid::generated(d, ops).elements(), o->n);
      if (!rep.is_group) {
        r.add("violation")["what"] = rep.violation;
        r.verdict = Verdict::False;
        return;
      }
      for (std::size_t i = 0; i < rep.orbits.size() && i < static_cast<std::size_t>(o->limit); ++i) {
        auto& x = r.add("orbit");
        x["index"] = i;
        x["size"] = rep.orbits[i].size();
        x["representative"] = tuple_json(rep.orbits[i].front());
      }
      r.add("summary")["orbits"] = rep.count;
    });
  }
  {
    struct O { std::string in; int cap = 2; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("transitive", "do the invertible unary members act transitively");
    file(sc, "--in", o->in, "ops bundle");
    num(sc, ctx, "cap", o->cap, 2, 1, 6, "arity cap");
    on(sc, ctx, "struct transitive", [o](Report& r) {
      auto rep = is_transitive_clone(clone_of(load_ops(o->in), o->cap));
      for (const auto& orb : rep.orbits) r.add("orbit")["points"] = tuple_json(orb);
      r.verdict = verdict_of(rep.transitive);
    });
  }
  {
    struct O { std::string f, gs; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("pmap", "x -> f(g1(x), ..., gk(x))");
    file(sc, "--f", o->f, "ops file with the k-ary f");
    file(sc, "--gs", o->gs, "ops bundle g1..gk of one arity");
    on(sc, ctx, "struct pmap", [o](Report& r) {
      const auto f = single_op(load_ops(o->f), o->f);
      auto gs = load_ops(o->gs);
      if (static_cast<int>(gs.size()) != f.arity())
        throw ParseError(o->gs, 0, 0, "f has arity " + std::to_string(f.arity()) + ", found " + std::to_string(gs.size()) + " maps");
      auto& x = r.add("result");
      x["f"] = f.to_string();
      x["op"] = p_map(f, gs).to_string();
    });
  }
  {
    struct O { std::string in, args; int cap = 2, value = 0; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("openeq", "encode the open set {h : h(a) = b} as an equation and check it");
    file(sc, "--in", o->in, "ops bundle");
    sc->add_option("--args", o->args, "the point a, e.g. \"0 1\"")->required();
    sc->add_option("--value", o->value, "the value b")->required();
    num(sc, ctx, "cap", o->cap, 2, 1, 6, "arity cap");
    on(sc, ctx, "struct openeq", [o](Report& r) {
      auto ops = load_ops(o->in);
      const int d = shared_domain(ops, o->in);
      auto a = parse_int_list(o->args, 0, d - 1, "--args");
      if (a.empty() || static_cast<int>(a.size()) > o->cap) throw ParseError("--args", 1, 0, "need 1 to cap values");
      if (o->value < 0 || o->value >= d) throw ParseError("--value", 1, 0, "outside the domain");
      auto clone = clone_of(ops, o->cap);
      auto e = encode_open_set_as_equation(clone, a, o->value);
      std::vector<std::string> names{"h"};
      for (int c = 0; c < d; ++c) names.push_back("c" + std::to_string(c));
      auto check = verify_open_set_equation(clone, e, a, o->value);
      r.add("equation")["equation"] = equation_to_string(e, names);
      auto& c = r.add("check");
      c["members_checked"] = check.members_checked;
      c["solutions"] = check.solutions;
      r.verdict = verdict_of(check.holds);
    });
  }
}

Congruence congruence_from_pairs(const Algebra& a, const std::string& text) {
  auto v = parse_int_list(text, 0, a.domain_size - 1, "--pairs");
  if (v.size() % 2) throw ParseError("--pairs", 1, 0, "expected an even number of elements");
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < v.size(); i += 2) pairs.emplace_back(v[i], v[i + 1]);
  return congruence_generated(a, pairs);
}

void add_alg(CLI::App& app, Ctx& ctx) {
  auto* grp = app.add_subcommand("alg", "finite algebras: subuniverses, congruences, HSP and equations");
  grp->require_subcommand(1, 1);
  {
    struct O { std::string in, gens; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("sub", "subuniverse generated by a set");
    file(sc, "--in", o->in, "algebra file");
    sc->add_option("--gens", o->gens, "generators, e.g. \"0 2\"")->required();
    on(sc, ctx, "alg sub", [o](Report& r) {
      auto a = load_algebra(o->in);
      auto g = parse_int_list(o->gens, 0, a.domain_size - 1, "--gens");
      r.add("subuniverse")["elements"] = tuple_json(generated_subuniverse(a, g));
    });
  }
  {
    struct O { std::string in, pairs; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("cong", "congruence generated by pairs");
    file(sc, "--in", o->in, "algebra file");
    sc->add_option("--pairs", o->pairs, "flat pair list, e.g. \"0 1 2 3\"")->required();
    on(sc, ctx, "alg cong", [o](Report& r) {
      auto a = load_algebra(o->in);
      auto c = congruence_from_pairs(a, o->pairs);
      auto& x = r.add("congruence");
      x["blocks"] = tuple_json(c.block);
      x["block_count"] = c.block_count();
    });
  }
  {
    struct O { std::string a, b; int power = 2, generators = 3; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("hsp", "is B a quotient of a subalgebra of a power of A");
    file(sc, "--b", o->b, "algebra B");
    file(sc, "--a", o->a, "algebra A");
    num(sc, ctx, "power", o->power, 2, 1, 4, "largest power searched");
    num(sc, ctx, "generators", o->generators, 3, 1, 8, "largest generating set");
    on(sc, ctx, "alg hsp", [o](Report& r) {
      auto b = load_algebra(o->b), a = load_algebra(o->a);
      auto w = hsp_membership(b, a, {o->power, o->generators});
      auto& s = r.add("search");
      s["power"] = o->power;
      s["generators"] = o->generators;
      if (!w) {
        r.verdict = Verdict::Undetermined;
        return;
      }
      std::string why;
      const bool ok = verify_hsp_witness(b, a, *w, &why);
      auto& x = r.add("witness");
      x["power"] = w->power;
      x["generators"] = Record::array();
      for (const auto& t : w->generators) x["generators"].push_back(tuple_json(t));
      x["subuniverse_size"] = w->subuniverse.size();
      x["congruence"] = tuple_json(w->congruence.block);
      x["iso"] = tuple_json(w->iso);
      x["verified"] = ok;
      if (!ok) x["failure"] = why;
      r.verdict = verdict_of(ok);
    });
  }
  {
    struct O { std::string a, b; int depth = 3, vars = 3; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("eqinc", "does every equation of A up to a depth hold in B");
    file(sc, "--a", o->a, "algebra A");
    file(sc, "--b", o->b, "algebra B");
    num(sc, ctx, "depth", o->depth, 3, 0, 4, "term depth cap");
    num(sc, ctx, "vars", o->vars, 3, 1, 4, "variables");
    on(sc, ctx, "alg eqinc", [o](Report& r) {
      auto a = load_algebra(o->a), b = load_algebra(o->b);
      auto res = equational_inclusion(a, b, o->depth, o->vars);
      r.add("search")["term_classes"] = res.term_classes;
      if (res.counterexample) r.add("counterexample")["equation"] = equation_to_string(*res.counterexample, generator_names(a.ops.size()));
      r.verdict = verdict_of(res.holds);
    });
  }
  {
    struct O { std::string in, ops; bool unary = false; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("finrange", "kernel analysis of a relation S on a finite codomain");
    file(sc, "--in", o->in, "structure file with a relation named S");
    sc->add_option("--ops", o->ops, "optional ops bundle checked for closure");
    sc->add_flag("--unary", o->unary, "also check closure under unary maps");
    on(sc, ctx, "alg finrange", [o](Report& r) {
      auto s = load_structure(o->in);
      const Relation* rel = nullptr;
      for (const auto& x : s.relations())
        if (x.name == "S") rel = &x;
      if (!rel) throw ParseError(o->in, 0, 0, "no relation named S");
      std::vector<FiniteOperation> ops;
      if (!o->ops.empty()) ops = load_ops(o->ops);
      auto rep = finite_range_restriction(rel->tuples, s.domain_size(), rel->arity, o->unary, ops);
      auto& k = r.add("kernels");
      k["present"] = Record::array();
      for (const auto& x : rep.kernels_present) k["present"].push_back(tuple_json(x));
      k["filtration"] = Record::array();
      for (auto v : rep.filtration_sizes) k["filtration"].push_back(v);
      auto& f = r.add("closure");
      f["kernel_dependent"] = rep.kernel_dependent;
      f["upward_closed"] = rep.upward_closed;
      f["unary_closed"] = rep.unary_closed ? Record(*rep.unary_closed) : Record(nullptr);
      if (rep.dependence_counterexample) {
        auto& c = r.add("dependence-counterexample");
        c["in_s"] = tuple_json(rep.dependence_counterexample->first);
        c["not_in_s"] = tuple_json(rep.dependence_counterexample->second);
      }
      if (rep.upward_counterexample) {
        auto& c = r.add("upward-counterexample");
        c["present"] = tuple_json(rep.upward_counterexample->first);
        c["missing"] = tuple_json(rep.upward_counterexample->second);
      }
      if (rep.unary_counterexample) {
        auto& c = r.add("unary-counterexample");
        c["map"] = rep.unary_counterexample->first.to_string();
        c["tuple"] = tuple_json(rep.unary_counterexample->second);
      }
      r.verdict = verdict_of(rep.kernel_dependent && rep.upward_closed && rep.unary_closed.value_or(true));
    });
  }
  {
    struct O { std::string in, theta, action; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("coordcong", "find a coordinate that determines a congruence on S");
    file(sc, "--in", o->in, "structure file: relation S (tuples, sorted order) and optional binary E");
    sc->add_option("--theta", o->theta, "block label per tuple of S in sorted order")->required();
    sc->add_option("--action", o->action, "optional ops bundle of unary maps acting on S");
    on(sc, ctx, "alg coordcong", [o](Report& r) {
      auto s = load_structure(o->in);
      const Relation *rel = nullptr, *edges = nullptr;
      for (const auto& x : s.relations()) {
        if (x.name == "S") rel = &x;
        if (x.name == "E") edges = &x;
      }
      if (!rel) throw ParseError(o->in, 0, 0, "no relation named S");
      if (edges && edges->arity != 2) throw ParseError(o->in, 0, 0, "relation E must be binary");
      std::vector<Tuple> tuples(rel->tuples.begin(), rel->tuples.end());
      auto labels = parse_int_list(o->theta, 0, std::numeric_limits<int>::max(), "--theta");
      if (labels.size() != tuples.size())
        throw ParseError("--theta", 1, 0, "expected " + std::to_string(tuples.size()) + " labels");
      std::vector<FiniteOperation> action;
      if (!o->action.empty()) action = load_ops(o->action);
      std::set<std::pair<Value, Value>> e;
      if (edges)
        for (const auto& t : edges->tuples) e.insert({t[0], t[1]});
      auto res = coordinate_congruence_analysis(tuples, s.domain_size(), normalize_partition(labels), action,
                                                edges ? &e : nullptr);
      auto pairs = [](const std::vector<std::pair<int, int>>& v) {
        Record a = Record::array();
        for (auto [x, y] : v) a.push_back(Record::array({x, y}));
        return a;
      };
      auto& c = r.add("coordinates");
      c["edge_pairs"] = pairs(res.edge_pairs);
      c["equal_pairs"] = pairs(res.equal_pairs);
      c["free_pairs"] = pairs(res.free_pairs);
      auto& w = r.add("agreement-family");
      w["sets"] = Record::array();
      for (const auto& x : res.w_family) w["sets"].push_back(tuple_json(x));
      w["depends_only_on_agreement"] = res.depends_only_on_agreement;
      w["upward_closed"] = res.upward_closed;
      w["intersection_closed"] = res.intersection_closed;
      w["empty_in_w"] = res.empty_in_w;
      if (res.witness) r.add("witness")["coordinate"] = *res.witness + 1;
      else r.add("failure")["text"] = res.failure;
      r.verdict = verdict_of(res.witness.has_value());
    });
  }
}

Record span_json(const AmalgamationSpan& s) {
  Record x = Record::object();
  x["base_size"] = s.base.size();
  x["base"] = s.base.code();
  x["left"] = Record::array();
  for (auto v : s.left) x["left"].push_back(static_cast<int>(v));
  x["right"] = Record::array();
  for (auto v : s.right) x["right"].push_back(static_cast<int>(v));
  return x;
}

void add_fraisse(CLI::App& app, Ctx& ctx) {
  auto* grp = app.add_subcommand("fraisse", "ages, amalgamation, lazily built limits");
  grp->require_subcommand(1, 1);
  const std::string spec_help = "age file or preset:<graphs|tournaments|linear-orders|k3-free>";
  {
    struct O { std::string spec; int size = 3, cap = 6, limit = 256; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("age", "members of the age of one size, up to isomorphism");
    file(sc, "--spec", o->spec, spec_help);
    num(sc, ctx, "size", o->size, 3, 0, 8, "structure size");
    num(sc, ctx, "cap", o->cap, 6, 0, 8, "largest size enumerated");
    num(sc, ctx, "limit", o->limit, 256, 0, 1 << 30, "structures listed");
    on(sc, ctx, "fraisse age", [o](Report& r) {
      auto members = enumerate_age(load_age(o->spec), o->size, o->cap);
      for (std::size_t i = 0; i < members.size() && i < static_cast<std::size_t>(o->limit); ++i) {
        auto& x = r.add("structure");
        x["index"] = i;
        x["code"] = members[i].code();
      }
      auto& s = r.add("summary");
      s["size"] = o->size;
      s["structures"] = members.size();
    });
  }
  {
    struct O { std::string spec; int cap = 3; bool strong = false; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("amalg", "one-point amalgamation up to a size cap");
    file(sc, "--spec", o->spec, spec_help);
    num(sc, ctx, "cap", o->cap, 3, 0, 6, "base size cap");
    sc->add_flag("--strong", o->strong, "require strong amalgamation");
    on(sc, ctx, "fraisse amalg", [o](Report& r) {
      auto res = check_amalgamation(load_age(o->spec), o->cap, o->strong);
      auto& s = r.add("search");
      s["spans_checked"] = res.spans_checked;
      s["strong"] = o->strong;
      if (res.counterexample) {
        auto x = span_json(*res.counterexample);
        auto& c = r.add("counterexample");
        for (auto it = x.begin(); it != x.end(); ++it) c[it.key()] = it.value();
      }
      r.verdict = verdict_of(res.verdict);
    });
  }
  {
    struct O { std::string spec; int size = 64, requirement_cap = 3, window = 0, cap = 3; bool dump = false; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("build", "build a prefix of the limit, optionally checking the extension property");
    file(sc, "--spec", o->spec, spec_help);
    num(sc, ctx, "size", o->size, 64, 1, 1 << 16, "points");
    num(sc, ctx, "requirement-cap", o->requirement_cap, 3, 0, 4, "largest requirement base");
    num(sc, ctx, "window", o->window, 0, 0, 1 << 10, "extension check window, 0 to skip");
    num(sc, ctx, "cap", o->cap, 3, 0, 4, "extension check subset size");
    sc->add_flag("--dump", o->dump, "include the serialized prefix");
    on(sc, ctx, "fraisse build", [o, &ctx](Report& r) {
      LazyLimit lim(load_age(o->spec), {o->requirement_cap, ctx.seed});
      lim.ensure(o->size);
      lim.saturate(o->size);
      const auto text = lim.serialize();
      auto& x = r.add("limit");
      x["points"] = lim.size();
      x["requirements"] = lim.requirements_processed();
      x["digest"] = fnv1a(text);
      if (o->dump) r.add("serialization")["text"] = text;
      if (o->window > 0) {
        auto fail = check_extension_property(lim, std::min(o->window, lim.size()), o->cap);
        auto& e = r.add("extension");
        e["window"] = std::min(o->window, lim.size());
        e["cap"] = o->cap;
        e["holds"] = !fail.has_value();
        if (fail) {
          e["subset"] = tuple_json(fail->subset);
          e["facts"] = Record::array();
          for (auto v : fail->facts) e["facts"].push_back(static_cast<int>(v));
          r.verdict = Verdict::False;
        }
      }
    });
  }
  {
    struct O { std::string spec; int size = 32, cap = 3, window = 8, requirement_cap = 3; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("rich", "both sides of a random unary split are rich up to a cap");
    file(sc, "--spec", o->spec, spec_help);
    num(sc, ctx, "size", o->size, 32, 1, 1 << 14, "points built");
    num(sc, ctx, "cap", o->cap, 3, 0, 4, "subset size");
    num(sc, ctx, "window", o->window, 8, 1, 64, "subsets drawn from the first window points");
    num(sc, ctx, "requirement-cap", o->requirement_cap, 3, 0, 4, "largest requirement base");
    on(sc, ctx, "fraisse rich", [o, &ctx](Report& r) {
      RichPartition rp(load_age(o->spec), {o->requirement_cap, ctx.seed});
      rp.limit().ensure(o->size);
      rp.limit().saturate(o->size);
      bool both = true;
      for (bool side : {true, false}) {
        auto rep = rp.is_rich_upto(side, o->cap, o->window);
        auto& x = r.add("side");
        x["side"] = side ? "U" : "complement";
        x["witnessed"] = rep.verdict == RichVerdict::Witnessed;
        x["demands_checked"] = rep.demands_checked;
        if (rep.failing) {
          x["subset"] = tuple_json(rep.failing->subset);
          x["moved"] = rep.failing->moved;
        }
        both = both && rep.verdict == RichVerdict::Witnessed;
      }
      r.verdict = both ? Verdict::True : Verdict::Undetermined;
    });
  }
  {
    struct O { std::string spec; int cap = 2; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("jep", "joint extension of one-point extensions up to a cap");
    file(sc, "--spec", o->spec, spec_help);
    num(sc, ctx, "cap", o->cap, 2, 0, 4, "domain size cap");
    on(sc, ctx, "fraisse jep", [o, &ctx](Report& r) {
      auto res = joint_extension_upto(load_age(o->spec), o->cap, ctx.seed);
      r.add("search")["configurations"] = res.configurations;
      if (res.counterexample) {
        const auto& c = *res.counterexample;
        auto& x = r.add("counterexample");
        x["domain_size"] = c.domain.size();
        x["domain"] = c.domain.code();
        x["overlap"] = tuple_json(c.overlap);
        x["images_size"] = c.images.size();
        x["images"] = c.images.code();
        x["second_copy"] = tuple_json(c.second_copy);
        if (c.limit) {
          x["limit_domain"] = tuple_json(c.limit_domain);
          x["limit_first"] = tuple_json(c.limit_first);
          x["limit_second"] = tuple_json(c.limit_second);
          x["limit_u"] = c.limit_u;
        }
      }
      r.verdict = verdict_of(res.verdict);
    });
  }
}

void add_steps(Report& r, const std::vector<StepRecord>& log, int limit) {
  for (std::size_t i = 0; i < log.size() && i < static_cast<std::size_t>(limit); ++i) {
    auto& x = r.add("step");
    x["index"] = i;
    x["kind"] = log[i].kind;
    x["points"] = tuple_json(log[i].points);
  }
}

void add_bnf(CLI::App& app, Ctx& ctx) {
  auto* grp = app.add_subcommand("bnf", "back-and-forth runs on a self-embedding onto the U side");
  grp->require_subcommand(1, 1);
  struct Base { std::string spec = "preset:graphs"; int saturate = 8, limit = 64; };
  const auto base_opts = [&ctx](CLI::App* sc, Base& b) {
    sc->add_option("--spec", b.spec, "age file or preset")->capture_default_str();
    num(sc, ctx, "saturate", b.saturate, 8, 0, 1 << 12, "limit saturation before the run");
    num(sc, ctx, "limit", b.limit, 64, 0, 1 << 30, "log records listed");
  };
  const auto oracle = [&ctx](const Base& b) {
    RichPartition rp(load_age(b.spec), {3, ctx.seed});
    rp.limit().saturate(b.saturate);
    return std::make_unique<EmbeddingOracle>(std::move(rp));
  };
  {
    struct O : Base { int support = 8, steps = 0; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("run-extension", "extend a, b with a f b = f over a support");
    base_opts(sc, *o);
    num(sc, ctx, "support", o->support, 8, 0, 1 << 12, "support points 0..n-1");
    num(sc, ctx, "steps", o->steps, 0, 0, 1 << 20, "extra round-robin steps");
    on(sc, ctx, "bnf run-extension", [o, oracle](Report& r) {
      auto orc = oracle(*o);
      ExtensionState st(*orc);
      auto run = run_extension(st, first_points(o->support), static_cast<std::size_t>(o->steps));
      add_steps(r, st.log(), o->limit);
      auto& x = r.add("run");
      x["steps"] = run.steps;
      x["alpha"] = run.alpha.size();
      x["beta"] = run.beta.size();
      x["log"] = st.log().size();
      auto bad = st.violated_invariant();
      r.add("invariants")["violated"] = bad ? Record(*bad) : Record(nullptr);
      r.verdict = verdict_of(!bad);
    });
  }
  {
    struct O : Base { int support = 0, steps = 500, richness_cap = 3; bool no_settle = false; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("run-tu", "three-map run with richness demands");
    base_opts(sc, *o);
    num(sc, ctx, "support", o->support, 0, 0, 1 << 12, "support points 0..n-1");
    num(sc, ctx, "steps", o->steps, 500, 0, 1 << 20, "round-robin steps");
    num(sc, ctx, "richness-cap", o->richness_cap, 3, 0, 4, "largest demand base");
    sc->add_flag("--no-settle", o->no_settle, "leave pending demands");
    on(sc, ctx, "bnf run-tu", [o, oracle](Report& r) {
      auto orc = oracle(*o);
      TuState st(*orc, {}, {}, {}, o->richness_cap);
      auto run = run_tu(st, first_points(o->support), static_cast<std::size_t>(o->steps), !o->no_settle);
      add_steps(r, st.log(), o->limit);
      auto& k = r.add("kinds");
      for (std::size_t i = 0; i < kTuKinds; ++i) k[tu_kind_name(static_cast<TuKind>(i))] = st.kind_counts()[i];
      auto& q = r.add("demands");
      q["discharged"] = Record::array();
      q["pending"] = Record::array();
      for (std::size_t i = 0; i < kDemandQueues; ++i) {
        q["discharged"].push_back(run.discharged[i]);
        q["pending"].push_back(run.pending[i]);
      }
      auto& x = r.add("run");
      x["steps"] = run.steps;
      x["alpha1"] = run.alpha1.size();
      x["alpha2"] = run.alpha2.size();
      x["beta"] = run.beta.size();
      auto bad = st.violated_invariant();
      r.add("invariants")["violated"] = bad ? Record(*bad) : Record(nullptr);
      r.verdict = verdict_of(!bad);
    });
  }
  for (bool triples : {false, true}) {
    struct O : Base { int u = -1, pairs = 40, window = 32, steps = 0; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand(triples ? "recover3" : "recover",
                                   triples ? "recover f(u) from separating triples" : "recover f(u) from separating pairs");
    base_opts(sc, *o);
    sc->add_option("--u", o->u, "point; default the first u with f(u) inside the window")->capture_default_str();
    num(sc, ctx, "pairs", o->pairs, 40, 0, 1 << 16, "separating runs");
    num(sc, ctx, "window", o->window, 32, 1, 1 << 12, "candidate window");
    num(sc, ctx, "steps", o->steps, 0, 0, 1 << 16, "extra steps per run");
    on(sc, ctx, triples ? "bnf recover3" : "bnf recover", [o, oracle, triples](Report& r) {
      auto orc = oracle(*o);
      int u = o->u;
      if (u < 0)
        for (u = 0; orc->f(u) >= o->window; ++u) {
        }
      RecoveryBudget budget{static_cast<std::size_t>(o->pairs), o->window, static_cast<std::size_t>(o->steps)};
      Recovery rec;
      try {
        rec = triples ? recover_value_via_triples(*orc, u, budget) : recover_value(*orc, u, budget);
      } catch (const JepRefused& e) {
        auto& x = r.add("refusal");
        x["reason"] = e.what();
        x["domain_size"] = e.counterexample.domain.size();
        x["domain"] = e.counterexample.domain.code();
        x["overlap"] = tuple_json(e.counterexample.overlap);
        x["images"] = e.counterexample.images.code();
        r.verdict = Verdict::False;
        return;
      }
      const int direct = orc->f(u);
      auto& x = r.add("recovery");
      x["u"] = u;
      x["value"] = rec.value ? Record(*rec.value) : Record(nullptr);
      x["direct"] = direct;
      x["survivors"] = tuple_json(rec.survivors);
      x["runs"] = rec.certificate.size();
      r.verdict = !rec.value ? Verdict::Undetermined : verdict_of(*rec.value == direct);
    });
  }
}

void add_gate(CLI::App& app, Ctx& ctx) {
  auto* grp = app.add_subcommand("gate", "canonical forms and gate decompositions");
  grp->require_subcommand(1, 1);
  {
    struct O { std::string in; int width = 4; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("horn-form", "essentially injective canonical form of the first evaluator");
    file(sc, "--in", o->in, "evaluator script");
    num(sc, ctx, "width", o->width, 4, 0, 1 << 10, "probe grid width");
    on(sc, ctx, "gate horn-form", [o](Report& r) {
      auto g = load_script(o->in).front();
      auto res = horn_canonical_form(g.evaluator, o->width);
      auto& p = r.add("probe");
      p["evaluator"] = g.description;
      p["width"] = res.probe_width;
      p["evaluations"] = res.evaluations;
      switch (res.verdict) {
        case HornVerdict::EssentiallyInjective: {
          auto& f = r.add("form");
          f["arity"] = res.form->arity;
          f["indices"] = tuple_json(res.form->indices);
          r.verdict = Verdict::True;
          break;
        }
        case HornVerdict::Rejected:
          for (const auto& [x, y] : res.witness) {
            auto& w = r.add("witness");
            w["x"] = nat_json(x);
            w["y"] = nat_json(y);
            w["gx"] = g.evaluator(x);
            w["gy"] = g.evaluator(y);
          }
          r.verdict = Verdict::False;
          break;
        case HornVerdict::Undetermined:
          for (const auto& c : res.candidates) r.add("candidate")["indices"] = tuple_json(c);
          r.verdict = Verdict::Undetermined;
          break;
      }
    });
  }
  const auto world_of = [](std::uint64_t seed) {
    RichPartition rp(AgeSpec::graphs(), {3, seed});
    rp.limit().ensure(12);
    rp.limit().saturate(8);
    return rp;
  };
  {
    struct O { std::string horn; int arity = 2, support = 24, width = 4, limit = 64; long long poly_seed = -1; bool allow_u = false, endo = false; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("decompose", "write a polymorphism as alpha o gate o (beta_1..beta_n)");
    sc->add_option("--horn", o->horn, "evaluator script: decompose its first evaluator through a Horn gate instead");
    num(sc, ctx, "arity", o->arity, 2, 1, 3, "polymorphism arity");
    num(sc, ctx, "support", o->support, 24, 0, 1 << 12, "support size");
    num(sc, ctx, "width", o->width, 4, 2, 1 << 10, "Horn probe width");
    num(sc, ctx, "limit", o->limit, 64, 0, 1 << 30, "steps listed");
    sc->add_option("--poly-seed", o->poly_seed, "seed of the random polymorphism; default 7 * seed");
    sc->add_flag("--allow-u", o->allow_u, "let the polymorphism hit U (violates the precondition)");
    sc->add_flag("--endo", o->endo, "non-injective unary polymorphism through the endomorphism gate");
    on(sc, ctx, "gate decompose", [o, &ctx, world_of](Report& r) {
      if (!o->horn.empty()) {
        auto g = load_script(o->horn).front();
        auto form = horn_canonical_form(g.evaluator, o->width);
        if (form.verdict != HornVerdict::EssentiallyInjective) {
          r.add("form")["verdict"] = form.verdict == HornVerdict::Rejected ? "rejected" : "undetermined";
          r.verdict = form.verdict == HornVerdict::Rejected ? Verdict::False : Verdict::Undetermined;
          return;
        }
        auto gate = horn_gate(form.form->arity, form.form->indices);
        auto d = horn_gate_decompose(*form.form, gate, static_cast<Nat>(o->support));
        auto& x = r.add("horn");
        x["indices"] = tuple_json(form.form->indices);
        x["alpha"] = nat_json(d.alpha);
        x["verified"] = d.verified;
        if (!d.verified) x["failure"] = d.failure;
        r.verdict = verdict_of(d.verified);
        return;
      }
      if (o->endo && o->arity != 1) throw ParseError("--arity", 1, 0, "the endomorphism gate is unary");
      auto world = world_of(ctx.seed);
      auto support = enumerated_support(world, o->arity, static_cast<std::size_t>(o->support));
      const std::uint64_t ps = o->poly_seed >= 0 ? static_cast<std::uint64_t>(o->poly_seed) : ctx.seed * 7;
      RandomPolymorphism g(world, {o->arity, !o->endo, !o->allow_u, o->endo ? 0.5 : 0.0, ps});
      std::vector<int> values;
      for (const auto& p : support) values.push_back(g(p));
      GateOptions go;
      go.injective = !o->endo;
      auto d = gate_decompose_graph(world, support, values, build_graph_gate(o->arity, ctx.seed, go));
      if (d.violation) {
        auto& v = r.add("violation");
        v["what"] = d.violation->what;
        v["tuples"] = Record::array();
        for (const auto& t : d.violation->tuples) v["tuples"].push_back(tuple_json(t));
        r.verdict = Verdict::False;
        return;
      }
      for (std::size_t i = 0; i < d.steps.size() && i < static_cast<std::size_t>(o->limit); ++i) {
        auto& s = r.add("step");
        s["index"] = i;
        s["text"] = d.steps[i];
      }
      for (std::size_t i = 0; i < support.size() && i < static_cast<std::size_t>(o->limit); ++i) {
        auto& p = r.add("point");
        p["tuple"] = tuple_json(support[i]);
        p["value"] = values[i];
        p["gate_point"] = d.gate_points[i];
      }
      auto& x = r.add("decomposition");
      x["support"] = support.size();
      x["alpha"] = d.alpha.size();
      x["deferred"] = d.deferred.size();
      x["verified"] = d.verified;
      if (!d.verified) x["failure"] = d.failure;
      r.verdict = verdict_of(d.verified);
    });
  }
  {
    struct O { int arity = 2, window = 6, cap = 2; bool endo = false, dump = false; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("graph-gate", "build a graph gate and check its axioms");
    num(sc, ctx, "arity", o->arity, 2, 1, 3, "gate arity");
    num(sc, ctx, "window", o->window, 6, 1, 64, "extension probe window");
    num(sc, ctx, "cap", o->cap, 2, 0, 3, "extension probe subset size");
    sc->add_flag("--endo", o->endo, "the non-injective endomorphism gate");
    sc->add_flag("--dump", o->dump, "include the serialized gate");
    on(sc, ctx, "gate graph-gate", [o, &ctx](Report& r) {
      GateOptions go;
      go.injective = !o->endo;
      auto b = build_graph_gate(o->arity, ctx.seed, go);
      const auto& g = *b.graph;
      auto& x = r.add("gate");
      x["a_points"] = g.points(GraphGate::Side::A).size();
      x["b_points"] = g.points(GraphGate::Side::B).size();
      x["phi"] = g.phi_table().size();
      bool ok = true;
      auto ax = g.check_axioms();
      r.add("axioms")["failure"] = ax ? Record(*ax) : Record(nullptr);
      ok = ok && !ax;
      for (auto side : {GraphGate::Side::A, GraphGate::Side::B}) {
        auto f = g.extension_probe(side, o->window, o->cap);
        auto& p = r.add("probe");
        p["side"] = side == GraphGate::Side::A ? "A" : "B";
        p["holds"] = !f.has_value();
        if (f) p["subset"] = tuple_json(f->subset);
        ok = ok && !f;
      }
      if (o->dump) r.add("serialization")["text"] = g.serialize();
      r.verdict = verdict_of(ok);
    });
  }
  {
    struct O { int arity = 1, support = 20, limit = 64; long long poly_seed = -1; bool injective = false; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("hf-split", "write a polymorphism as h o f with f injective");
    num(sc, ctx, "arity", o->arity, 1, 1, 3, "polymorphism arity");
    num(sc, ctx, "support", o->support, 20, 0, 1 << 12, "support size");
    num(sc, ctx, "limit", o->limit, 64, 0, 1 << 30, "steps listed");
    sc->add_option("--poly-seed", o->poly_seed, "seed of the random polymorphism; default 7 * seed");
    sc->add_flag("--injective", o->injective, "draw an injective polymorphism");
    on(sc, ctx, "gate hf-split", [o, &ctx, world_of](Report& r) {
      auto world = world_of(ctx.seed);
      auto support = enumerated_support(world, o->arity, static_cast<std::size_t>(o->support));
      const std::uint64_t ps = o->poly_seed >= 0 ? static_cast<std::uint64_t>(o->poly_seed) : ctx.seed * 7;
      RandomPolymorphism g(world, {o->arity, o->injective, true, o->injective ? 0.0 : 0.3, ps});
      std::vector<int> values;
      for (const auto& p : support) values.push_back(g(p));
      auto s = hf_decompose(world, support, values);
      if (s.violation) {
        auto& v = r.add("violation");
        v["what"] = s.violation->what;
        r.verdict = Verdict::False;
        return;
      }
      for (std::size_t i = 0; i < s.steps.size() && i < static_cast<std::size_t>(o->limit); ++i) {
        auto& st = r.add("step");
        st["index"] = i;
        st["text"] = s.steps[i];
      }
      std::set<int> gv(values.begin(), values.end());
      auto& x = r.add("split");
      x["support"] = support.size();
      x["distinct_values"] = gv.size();
      x["f"] = tuple_json(s.f);
      x["h"] = s.h.size();
      x["verified"] = s.verified;
      if (!s.verified) x["failure"] = s.failure;
      r.verdict = verdict_of(s.verified);
    });
  }
}

void add_monoid(CLI::App& app, Ctx& ctx) {
  auto* grp = app.add_subcommand("monoid", "transformation monoids: lifting and discontinuity");
  grp->require_subcommand(1, 1);
  {
    struct O { std::string source, images; int arity = 2; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("lift", "lift a monoid homomorphism given on generators to the clones");
    file(sc, "--source", o->source, "ops bundle of unary generators");
    file(sc, "--images", o->images, "ops bundle: image of each generator");
    num(sc, ctx, "arity", o->arity, 2, 1, 4, "arity cap of the lifted clone map");
    on(sc, ctx, "monoid lift", [o](Report& r) {
      auto gens = load_ops(o->source), imgs = load_ops(o->images);
      const int d = shared_domain(gens, o->source), d2 = shared_domain(imgs, o->images);
      if (gens.size() != imgs.size())
        throw ParseError(o->images, 0, 0, "expected " + std::to_string(gens.size()) + " images, found " + std::to_string(imgs.size()));
      for (const auto& f : gens)
        if (f.arity() != 1) throw ParseError(o->source, 0, 0, "generators must be unary");
      for (const auto& f : imgs)
        if (f.arity() != 1) throw ParseError(o->images, 0, 0, "images must be unary");
      // Words in the generators, mapped letter by letter; two words for one element must agree.
      std::map<FiniteOperation, FiniteOperation> assign;
      std::vector<FiniteOperation> queue{FiniteOperation::projection(d, 1, 1)};
      assign[queue[0]] = FiniteOperation::projection(d2, 1, 1);
      for (std::size_t q = 0; q < queue.size(); ++q) {
        const auto e = queue[q];
        const auto ei = assign.at(e);
        for (std::size_t i = 0; i < gens.size(); ++i) {
          auto x = compose_unary(gens[i], e), xi = compose_unary(imgs[i], ei);
          auto [it, fresh] = assign.emplace(x, xi);
          if (fresh) {
            queue.push_back(x);
          } else if (it->second != xi) {
            auto& c = r.add("not-well-defined");
            c["element"] = x.to_string();
            c["image"] = it->second.to_string();
            c["other_image"] = xi.to_string();
            r.verdict = Verdict::False;
            return;
          }
        }
      }
      MonoidMap m{TransformationMonoid::generated(d, gens), TransformationMonoid::generated(d2, imgs), assign};
      auto& s = r.add("monoids");
      s["source"] = m.source.elements().size();
      s["target"] = m.target.elements().size();
      auto res = lift_monoid_hom(m, o->arity);
      switch (res.status) {
        case LiftStatus::Lifted: {
          auto& x = r.add("lift");
          x["arity_cap"] = o->arity;
          x["compositions_checked"] = res.clone_report.compositions_checked;
          x["verified"] = res.clone_report.verdict;
          r.verdict = verdict_of(res.clone_report.verdict);
          break;
        }
        case LiftStatus::ConstantViolation: {
          auto& x = r.add("constant-violation");
          x["constant"] = res.violating_constant->to_string();
          x["image"] = assign.at(*res.violating_constant).to_string();
          r.verdict = Verdict::False;
          break;
        }
        case LiftStatus::NotAHomomorphism:
          r.add("not-a-homomorphism")["problem"] = res.hom_check.problem;
          r.verdict = Verdict::False;
          break;
      }
    });
  }
  {
    struct O { int pairs = 1000, prefix = 64, points = 16, approximants = 8, c = 0; };
    auto o = std::make_shared<O>();
    auto* sc = grp->add_subcommand("discont", "discontinuous homomorphism on graph self-embeddings");
    num(sc, ctx, "pairs", o->pairs, 1000, 0, 1 << 20, "sampled pairs");
    num(sc, ctx, "prefix", o->prefix, 64, 1, 1 << 16, "checked prefix");
    num(sc, ctx, "points", o->points, 16, 1, 1 << 12, "points per pair");
    num(sc, ctx, "approximants", o->approximants, 8, 1, 64, "approximants of f");
    sc->add_option("--c", o->c, "point fixed by the shift and avoided by f")->capture_default_str()->check(CLI::Range(0, 64));
    on(sc, ctx, "monoid discont", [o, &ctx](Report& r) {
      GraphEmbeddingMonoid gm(ctx.seed);
      auto f = gm.embedding_avoiding("f", o->c, {});
      std::vector<LazyElement> pool{gm.identity(), gm.automorphism("a", {{0, 3}}), gm.automorphism("b", {{1, 0}}),
                                    gm.automorphism("c", {{2, 5}}), gm.embedding_avoiding("g", o->c + 2, {}),
                                    gm.embedding_avoiding("h", o->c + 7, {})};
      auto approx = gm.approximants(f, o->approximants);
      DiscontinuousHom xi(invertibles_ops(), static_cast<Nat>(o->c));
      DiscontinuityOptions opt;
      opt.prefix = static_cast<Nat>(o->prefix);
      opt.pairs = static_cast<std::size_t>(o->pairs);
      opt.points_per_pair = static_cast<std::size_t>(o->points);
      opt.seed = ctx.seed;
      auto rep = build_discontinuous_hom(xi, pool, f, approx, opt);
      auto& x = r.add("check");
      x["absorption_checked"] = rep.absorption_checked;
      x["pairs_checked"] = rep.pairs_checked;
      if (!rep.detail.empty()) x["detail"] = rep.detail;
      if (rep.failing_pair) x["failing_pair"] = Record::array({rep.failing_pair->first, rep.failing_pair->second});
      for (std::size_t j = 0; j < rep.approximant_agreement.size(); ++j) {
        auto& a = r.add("approximant");
        a["index"] = j + 1;
        a["agreement"] = rep.approximant_agreement[j];
        if (j < rep.divergence.size()) a["divergence"] = rep.divergence[j];
      }
      r.add("divergence")["index"] = rep.divergence_index ? Record(*rep.divergence_index) : Record(nullptr);
      r.verdict = verdict_of(rep.status == DiscontinuityStatus::Witnessed);
    });
  }
}

void input_error(Report& r, const ParseError& e) {
  auto& x = r.add("error");
  x["source"] = e.source();
  x["line"] = e.line();
  x["column"] = e.column();
  x["message"] = e.message();
  r.verdict = Verdict::InputError;
}

}  // namespace

CliResult run_cli(const std::vector<std::string>& args, const std::string& caps_text) {
  CliResult res;
  Ctx ctx;
  bool json = false;
  CLI::App app{"clonekit: clones, polymorphisms, Fraisse limits and gate decompositions"};
  std::vector<std::string> argv_store{"clonekit"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  const auto finish = [&](Report& r) {
    res.report = r;
    res.exit_code = exit_code(r.verdict);
    res.out = json ? r.to_jsonl() : r.to_text();
    return res;
  };
  const auto fail_input = [&](const ParseError& e, const std::string& command) {
    Report r;
    r.command = command;
    r.seed = ctx.seed;
    input_error(r, e);
    res.err = std::string("error: ") + e.what() + "\n";
    return finish(r);
  };

  try {
    ctx.caps = Caps::parse(caps_text);
    ctx.seed = static_cast<std::uint64_t>(ctx.caps.get("seed", 1));
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.add_option("--seed", ctx.seed, "seed for every lazy construction in the run")->capture_default_str();
    app.add_flag("--json", json, "line-delimited JSON report instead of text");
    add_clone(app, ctx);
    add_top(app, ctx);
    add_struct(app, ctx);
    add_alg(app, ctx);
    add_fraisse(app, ctx);
    add_bnf(app, ctx);
    add_gate(app, ctx);
    add_monoid(app, ctx);
  } catch (const ParseError& e) {
    for (const auto& a : args) json = json || a == "--json";
    return fail_input(e, "");
  }

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    const CLI::App* deepest = &app;
    for (auto* sub = deepest->get_subcommands().empty() ? nullptr : deepest->get_subcommands().front(); sub;
         sub = sub->get_subcommands().empty() ? nullptr : sub->get_subcommands().front())
      deepest = sub;
    res.out = deepest->help();
    return res;
  } catch (const CLI::ParseError& e) {
    std::string path;
    for (const auto* sub = &app; !sub->get_subcommands().empty();) {
      sub = sub->get_subcommands().front();
      path += (path.empty() ? "" : " ") + sub->get_name();
    }
    return fail_input(ParseError("<arguments>", 1, 0, e.what()), path.empty() ? ctx.command : path);
  }

  Report r;
  r.command = ctx.command;
  r.seed = ctx.seed;
  try {
    ctx.action(r);
  } catch (const ParseError& e) {
    r.records.clear();
    return fail_input(e, ctx.command);
  } catch (const SearchBoundExceeded& e) {
    r.add("budget")["exceeded"] = e.what();
    r.verdict = Verdict::Undetermined;
  } catch (const CloneSizeExceeded& e) {
    r.add("budget")["exceeded"] = e.what();
    r.verdict = Verdict::Undetermined;
  } catch (const InsufficientConvergence& e) {
    r.add("budget")["exceeded"] = e.what();
    r.verdict = Verdict::Undetermined;
  } catch (const InvariantViolation& e) {
    r.add("invariant-violation")["what"] = e.what();
    r.verdict = Verdict::False;
  } catch (const std::exception& e) {
    r.records.clear();
    return fail_input(ParseError("<request>", 0, 0, e.what()), ctx.command);
  }
  return finish(r);
}

}  // namespace clonekit
