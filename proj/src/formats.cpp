#include "clonekit/formats.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "clonekit/tuples.hpp"

namespace clonekit {

ParseError::ParseError(std::string source, int line, int column, std::string message)
    : std::invalid_argument(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      source_(std::move(source)),
      line_(line),
      column_(column),
      message_(std::move(message)) {}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, 0, "cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

namespace {

struct Token {
  std::string text;
  int column = 0;
};

struct Line {
  int number = 0;
  bool blank = false;  // whitespace only; comment-only lines are dropped
  std::vector<Token> tokens;
  int end_column = 1;  // one past the last token
};

std::vector<Line> lex(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    Line line;
    line.number = number;
    const auto hash = raw.find('#');
    const std::string body = hash == std::string::npos ? raw : raw.substr(0, hash);
    std::size_t i = 0;
    while (i < body.size()) {
      if (std::isspace(static_cast<unsigned char>(body[i]))) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < body.size() && !std::isspace(static_cast<unsigned char>(body[j]))) ++j;
      line.tokens.push_back({body.substr(i, j - i), static_cast<int>(i) + 1});
      line.end_column = static_cast<int>(j) + 1;
      i = j;
    }
    if (line.tokens.empty()) {
      if (hash != std::string::npos && raw.find_first_not_of(" \t") == hash) continue;
      line.blank = true;
    }
    out.push_back(std::move(line));
  }
  return out;
}

class Cursor {
 public:
  Cursor(const std::string& text, std::string source) : lines_(lex(text)), source_(std::move(source)) {}

  [[noreturn]] void fail(int line, int column, const std::string& message) const {
    throw ParseError(source_, line, column, message);
  }
  [[noreturn]] void fail(const Line& l, const Token& t, const std::string& message) const {
    fail(l.number, t.column, message);
  }

  void skip_blank() {
    while (i_ < lines_.size() && lines_[i_].blank) ++i_;
  }
  bool done() const { return i_ >= lines_.size(); }
  const Line& peek() const { return lines_[i_]; }
  const Line& next() { return lines_[i_++]; }
  int last_line() const { return lines_.empty() ? 1 : lines_.back().number; }
  const std::string& source() const { return source_; }

  long long integer(const Line& l, const Token& t, const std::string& what) const {
    long long v = 0;
    const char* b = t.text.data();
    const char* e = b + t.text.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec == std::errc::result_out_of_range) fail(l, t, what + " '" + t.text + "' is out of range");
    if (ec != std::errc() || p != e) fail(l, t, what + " must be an integer, got '" + t.text + "'");
    return v;
  }
  int bounded(const Line& l, const Token& t, const std::string& what, long long lo, long long hi) const {
    const long long v = integer(l, t, what);
    if (v < lo || v > hi)
      fail(l, t, what + " " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
  }
  void expect_count(const Line& l, std::size_t count, const std::string& form) const {
    if (l.tokens.size() < count) fail(l.number, l.end_column, "expected '" + form + "'");
    if (l.tokens.size() > count) fail(l, l.tokens[count], "unexpected token after '" + form + "'");
  }

 private:
  std::vector<Line> lines_;
  std::size_t i_ = 0;
  std::string source_;
};

constexpr int kMaxDomain = 1 << 16;
constexpr std::size_t kMaxTable = std::size_t{1} << 22;

bool is_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

// Cursor sits on an "op" line.
FiniteOperation op_block(Cursor& c, std::optional<int> domain) {
  const Line& h = c.next();
  if (h.tokens[0].text != "op") c.fail(h, h.tokens[0], "expected 'op <d> <arity>'");
  c.expect_count(h, 3, "op <d> <arity>");
  const int d = c.bounded(h, h.tokens[1], "domain size", 1, kMaxDomain);
  const int n = c.bounded(h, h.tokens[2], "arity", 1, 64);
  if (domain && d != *domain)
    c.fail(h, h.tokens[1], "op domain " + std::to_string(d) + " differs from the declared domain " + std::to_string(*domain));
  std::size_t size = 1;
  for (int k = 0; k < n; ++k) {
    if (size > kMaxTable / static_cast<std::size_t>(d)) c.fail(h, h.tokens[2], "table d^arity exceeds 2^22 entries");
    size *= static_cast<std::size_t>(d);
  }
  const std::string expected = "table length must be d^arity = " + std::to_string(size);
  if (c.done() || c.peek().blank) c.fail(h.number + 1, 0, "missing table line; " + expected);
  const Line& t = c.next();
  if (t.tokens.size() > size) c.fail(t, t.tokens[size], expected + ", got " + std::to_string(t.tokens.size()));
  if (t.tokens.size() < size) c.fail(t.number, t.end_column, expected + ", got " + std::to_string(t.tokens.size()));
  std::vector<Value> table;
  table.reserve(size);
  for (const auto& tok : t.tokens) table.push_back(c.bounded(t, tok, "table entry", 0, d - 1));
  return FiniteOperation(d, n, std::move(table));
}

struct RawRelation {
  std::string name;
  int arity = 0;
  int line = 0;
  std::vector<Tuple> tuples;
  std::vector<std::pair<int, int>> positions;  // line, column of each tuple
};

struct RawStructure {
  int domain = 0;
  int line = 0;
  std::vector<RawRelation> relations;
};

// Cursor sits on a "structure" line; consumes through the terminating blank line or the end.
RawStructure structure_block(Cursor& c) {
  const Line& h = c.next();
  if (h.tokens[0].text != "structure") c.fail(h, h.tokens[0], "expected 'structure <d>'");
  c.expect_count(h, 2, "structure <d>");
  RawStructure s;
  s.line = h.number;
  s.domain = c.bounded(h, h.tokens[1], "domain size", 1, kMaxDomain);
  std::set<std::string> names;
  std::set<Tuple> seen;
  while (!c.done() && !c.peek().blank) {
    const Line& l = c.next();
    if (l.tokens[0].text == "rel") {
      c.expect_count(l, 3, "rel <name> <arity>");
      const Token& name = l.tokens[1];
      if (!is_identifier(name.text)) c.fail(l, name, "relation name '" + name.text + "' is not an identifier");
      if (!names.insert(name.text).second) c.fail(l, name, "relation '" + name.text + "' declared twice");
      s.relations.push_back({name.text, c.bounded(l, l.tokens[2], "arity", 1, 16), l.number, {}, {}});
      seen.clear();
      continue;
    }
    if (s.relations.empty()) c.fail(l, l.tokens[0], "tuple before any 'rel' line");
    auto& r = s.relations.back();
    if (static_cast<int>(l.tokens.size()) != r.arity) {
      const int col = static_cast<int>(l.tokens.size()) > r.arity ? l.tokens[static_cast<std::size_t>(r.arity)].column : l.end_column;
      c.fail(l.number, col, "tuple of relation '" + r.name + "' needs " + std::to_string(r.arity) + " entries, got " +
                                std::to_string(l.tokens.size()));
    }
    Tuple t;
    for (const auto& tok : l.tokens) t.push_back(c.bounded(l, tok, "tuple entry", 0, s.domain - 1));
    if (!seen.insert(t).second) c.fail(l, l.tokens[0], "duplicate tuple in relation '" + r.name + "'");
    r.tuples.push_back(std::move(t));
    r.positions.push_back({l.number, l.tokens[0].column});
  }
  return s;
}

void expect_end(Cursor& c, const std::string& what) {
  c.skip_blank();
  if (!c.done()) {
    const Line& l = c.peek();
    c.fail(l, l.tokens[0], "unexpected content after the " + what);
  }
}

std::string join_tokens(const Line& l) {
  std::string s;
  for (const auto& t : l.tokens) s += (s.empty() ? "" : " ") + t.text;
  return s;
}

}  // namespace

std::vector<FiniteOperation> parse_ops(const std::string& text, const std::string& source) {
  Cursor c(text, source);
  std::vector<FiniteOperation> out;
  for (c.skip_blank(); !c.done(); c.skip_blank()) out.push_back(op_block(c, std::nullopt));
  if (out.empty()) c.fail(1, 0, "no 'op' block");
  return out;
}

std::string format_ops(const std::vector<FiniteOperation>& ops) {
  std::ostringstream os;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (i) os << '\n';
    os << "op " << ops[i].domain_size() << ' ' << ops[i].arity() << '\n';
    for (std::size_t j = 0; j < ops[i].table().size(); ++j) os << (j ? " " : "") << ops[i].table()[j];
    os << '\n';
  }
  return os.str();
}

RelationalStructure parse_structure(const std::string& text, const std::string& source) {
  Cursor c(text, source);
  c.skip_blank();
  if (c.done()) c.fail(1, 0, "no 'structure' block");
  auto raw = structure_block(c);
  expect_end(c, "structure");
  RelationalStructure s(raw.domain);
  for (const auto& r : raw.relations) s.add_relation(r.name, r.arity, r.tuples);
  return s;
}

std::string format_structure(const RelationalStructure& s) {
  std::ostringstream os;
  os << "structure " << s.domain_size() << '\n';
  for (const auto& r : s.relations()) {
    os << "rel " << r.name << ' ' << r.arity << '\n';
    for (const auto& t : r.tuples) {
      for (std::size_t i = 0; i < t.size(); ++i) os << (i ? " " : "") << t[i];
      os << '\n';
    }
  }
  return os.str();
}

Algebra parse_algebra(const std::string& text, const std::string& source) {
  Cursor c(text, source);
  c.skip_blank();
  if (c.done()) c.fail(1, 0, "no 'algebra' header");
  const Line& h = c.next();
  if (h.tokens[0].text != "algebra") c.fail(h, h.tokens[0], "expected 'algebra <d> <slot count>'");
  c.expect_count(h, 3, "algebra <d> <slot count>");
  const int d = c.bounded(h, h.tokens[1], "domain size", 1, kMaxDomain);
  const int slots = c.bounded(h, h.tokens[2], "slot count", 0, 64);
  std::vector<FiniteOperation> ops;
  for (int k = 0; k < slots; ++k) {
    c.skip_blank();
    if (c.done()) c.fail(c.last_line(), 0, "algebra declares " + std::to_string(slots) + " slots, found " + std::to_string(k));
    ops.push_back(op_block(c, d));
  }
  expect_end(c, "declared slots");
  return Algebra(d, std::move(ops));
}

std::string format_algebra(const Algebra& a) {
  return "algebra " + std::to_string(a.domain_size) + " " + std::to_string(a.ops.size()) + "\n" + format_ops(a.ops);
}

AgeSpec parse_age(const std::string& text, const std::string& source) {
  Cursor c(text, source);
  AgeSpec spec;
  int first_rel = 0;
  for (c.skip_blank(); !c.done() && c.peek().tokens[0].text == "rel"; c.skip_blank()) {
    const Line& l = c.next();
    if (l.tokens.size() < 3) c.fail(l.number, l.end_column, "expected 'rel <name> <arity> [sym] [irrefl]'");
    RelationSymbol r;
    r.name = l.tokens[1].text;
    if (!is_identifier(r.name)) c.fail(l, l.tokens[1], "relation name '" + r.name + "' is not an identifier");
    if (spec.relation_index(r.name) >= 0) c.fail(l, l.tokens[1], "relation '" + r.name + "' declared twice");
    r.arity = c.bounded(l, l.tokens[2], "arity", 1, 2);
    for (std::size_t k = 3; k < l.tokens.size(); ++k) {
      const auto& t = l.tokens[k];
      bool* flag = t.text == "sym" ? &r.symmetric : t.text == "irrefl" ? &r.irreflexive : nullptr;
      if (!flag) c.fail(l, t, "unknown flag '" + t.text + "' (expected sym or irrefl)");
      if (*flag) c.fail(l, t, "flag '" + t.text + "' repeated");
      if (r.arity != 2) c.fail(l, t, "flag '" + t.text + "' needs arity 2");
      *flag = true;
    }
    if (!first_rel) first_rel = l.number;
    spec.signature.push_back(r);
  }
  if (spec.signature.empty()) c.fail(c.done() ? 1 : c.peek().number, 0, "an age starts with at least one 'rel' line");
  for (c.skip_blank(); !c.done(); c.skip_blank()) {
    const Line& l = c.peek();
    if (l.tokens[0].text == "rel") c.fail(l, l.tokens[0], "signature lines must precede the forbidden structures");
    auto raw = structure_block(c);
    FiniteStructure f(spec.signature, raw.domain);
    for (const auto& r : raw.relations) {
      const int idx = spec.relation_index(r.name);
      if (idx < 0) c.fail(r.line, 0, "relation '" + r.name + "' is not in the signature");
      const auto& sym = spec.signature[static_cast<std::size_t>(idx)];
      if (sym.arity != r.arity)
        c.fail(r.line, 0, "relation '" + r.name + "' has arity " + std::to_string(sym.arity) + " in the signature");
      for (std::size_t k = 0; k < r.tuples.size(); ++k) {
        const auto& t = r.tuples[k];
        const auto [ln, col] = r.positions[k];
        if (sym.irreflexive && t[0] == t[1]) c.fail(ln, col, "irreflexive relation '" + r.name + "' holds on a loop");
        if (sym.symmetric && f.holds(idx, t)) c.fail(ln, col, "symmetric relation '" + r.name + "' lists both orders");
        f.set(idx, t, true);
      }
    }
    spec.forbidden.push_back(std::move(f));
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    c.fail(first_rel, 0, e.what());
  }
  return spec;
}

std::string format_age(const AgeSpec& spec) {
  std::ostringstream os;
  for (const auto& r : spec.signature)
    os << "rel " << r.name << ' ' << r.arity << (r.symmetric ? " sym" : "") << (r.irreflexive ? " irrefl" : "") << '\n';
  for (const auto& f : spec.forbidden) {
    os << "\nstructure " << f.size() << '\n';
    for (std::size_t ri = 0; ri < spec.signature.size(); ++ri) {
      const auto& r = spec.signature[ri];
      os << "rel " << r.name << ' ' << r.arity << '\n';
      for (const auto& t : candidate_tuples(r, f.size())) {
        if (!f.holds(static_cast<int>(ri), t)) continue;
        for (std::size_t i = 0; i < t.size(); ++i) os << (i ? " " : "") << t[i];
        os << '\n';
      }
    }
  }
  return os.str();
}

AgeSpec load_age(const std::string& reference) {
  const std::string prefix = "preset:";
  if (reference.rfind(prefix, 0) == 0) {
    const auto name = reference.substr(prefix.size());
    if (name == "graphs") return AgeSpec::graphs();
    if (name == "tournaments") return AgeSpec::tournaments();
    if (name == "linear-orders") return AgeSpec::linear_orders();
    if (name == "k3-free") return AgeSpec::k3_free_graphs();
    throw ParseError(reference, 0, static_cast<int>(prefix.size()) + 1,
                     "unknown preset '" + name + "' (graphs, tournaments, linear-orders, k3-free)");
  }
  return parse_age(read_text_file(reference), reference);
}

std::vector<ScriptedEvaluator> parse_evaluator_script(const std::string& text, const std::string& source) {
  Cursor c(text, source);
  std::vector<ScriptedEvaluator> out;
  for (c.skip_blank(); !c.done(); c.skip_blank()) {
    const Line& l = c.peek();
    if (l.tokens[0].text == "op") {
      const std::string desc = join_tokens(l);
      out.push_back({desc, table_evaluator(op_block(c, std::nullopt))});
      continue;
    }
    c.next();
    if (l.tokens[0].text != "lazy") c.fail(l, l.tokens[0], "expected 'op' or 'lazy'");
    if (l.tokens.size() < 2) c.fail(l.number, l.end_column, "expected a backend after 'lazy'");
    const std::string backend = l.tokens[1].text;
    const auto arg = [&](std::size_t k, const std::string& what, long long lo, long long hi) {
      if (l.tokens.size() <= k) c.fail(l.number, l.end_column, "'" + backend + "' needs " + what);
      return c.bounded(l, l.tokens[k], what, lo, hi);
    };
    const auto exact = [&](std::size_t count) {
      if (l.tokens.size() > count) c.fail(l, l.tokens[count], "unexpected parameter for '" + backend + "'");
    };
    constexpr long long kBig = std::numeric_limits<int>::max();
    Evaluator e;
    if (backend == "shift" || backend == "swap") {
      if (backend == "shift") {
        const Nat k = static_cast<Nat>(arg(2, "offset", 0, kBig));
        exact(3);
        e = nat_evaluator(1, [k](const NatTuple& x) { return x[0] + k; });
      } else {
        const Nat a = static_cast<Nat>(arg(2, "first point", 0, kBig)), b = static_cast<Nat>(arg(3, "second point", 0, kBig));
        exact(4);
        e = nat_evaluator(1, [a, b](const NatTuple& x) { return x[0] == a ? b : x[0] == b ? a : x[0]; });
      }
    } else {
      const int n = arg(2, "arity", 1, 16);
      if (backend == "projection") {
        const int k = arg(3, "coordinate", 1, n);
        exact(4);
        e = nat_evaluator(n, [k](const NatTuple& x) { return x[static_cast<std::size_t>(k - 1)]; });
      } else if (backend == "constant") {
        const Nat v = static_cast<Nat>(arg(3, "value", 0, kBig));
        exact(4);
        e = nat_evaluator(n, [v](const NatTuple&) { return v; });
      } else if (backend == "max" || backend == "min" || backend == "sum") {
        exact(3);
        if (backend == "max") e = nat_evaluator(n, [](const NatTuple& x) { return *std::max_element(x.begin(), x.end()); });
        if (backend == "min") e = nat_evaluator(n, [](const NatTuple& x) { return *std::min_element(x.begin(), x.end()); });
        if (backend == "sum") e = nat_evaluator(n, [](const NatTuple& x) { Nat s = 0; for (Nat v : x) s += v; return s; });
      } else if (backend == "rank" || backend == "affine") {
        std::size_t k = 3;
        Nat a = 1, b = 0;
        if (backend == "affine") {
          a = static_cast<Nat>(arg(3, "multiplier", 1, kBig));
          b = static_cast<Nat>(arg(4, "offset", 0, kBig));
          k = 5;
        }
        std::vector<int> idx;
        for (; k < l.tokens.size(); ++k) {
          const int i = c.bounded(l, l.tokens[k], "coordinate", 1, n);
          if (!idx.empty() && i <= idx.back()) c.fail(l, l.tokens[k], "coordinates must be strictly increasing");
          idx.push_back(i);
        }
        if (idx.empty()) c.fail(l.number, l.end_column, "'" + backend + "' needs at least one coordinate");
        const auto en = TupleEnumeration::countable(static_cast<int>(idx.size()));
        e = nat_evaluator(n, [en, idx, a, b](const NatTuple& x) {
          NatTuple y;
          for (int i : idx) y.push_back(x[static_cast<std::size_t>(i - 1)]);
          return a * en.rank(y) + b;
        });
      } else {
        c.fail(l, l.tokens[1], "unknown backend '" + backend + "'");
      }
    }
    out.push_back({join_tokens(l), std::move(e)});
  }
  if (out.empty()) c.fail(1, 0, "no evaluator declared");
  return out;
}

namespace {

class TermParser {
 public:
  TermParser(const std::string& text, const std::vector<int>& arities, std::string source)
      : s_(text), arities_(arities), source_(std::move(source)) {}

  [[noreturn]] void fail(std::size_t pos, const std::string& message) const {
    throw ParseError(source_, 1, static_cast<int>(pos) + 1, message);
  }
  void skip() {
    while (p_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[p_]))) ++p_;
  }
  bool at_end() {
    skip();
    return p_ >= s_.size();
  }
  std::size_t pos() const { return p_; }
  bool accept(char ch) {
    skip();
    if (p_ < s_.size() && s_[p_] == ch) {
      ++p_;
      return true;
    }
    return false;
  }

  Term term() {
    skip();
    const std::size_t start = p_;
    if (p_ >= s_.size()) fail(p_, "expected a term");
    const char kind = s_[p_];
    if (kind != 'x' && kind != 'f') fail(p_, "expected a variable x<i> or a symbol f<i>");
    ++p_;
    const std::size_t digits = p_;
    while (p_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p_]))) ++p_;
    if (digits == p_) fail(digits, "expected an index after '" + std::string(1, kind) + "'");
    long long idx = 0;
    auto [ptr, ec] = std::from_chars(s_.data() + digits, s_.data() + p_, idx);
    (void)ptr;
    if (ec != std::errc() || idx < 1 || idx > 4096) fail(digits, "index must be between 1 and 4096");
    if (kind == 'x') {
      max_var_ = std::max(max_var_, static_cast<int>(idx) - 1);
      return make_var(static_cast<int>(idx) - 1);
    }
    if (idx > static_cast<long long>(arities_.size()))
      fail(start, "unknown symbol f" + std::to_string(idx) + " (" + std::to_string(arities_.size()) + " generators)");
    const int arity = arities_[static_cast<std::size_t>(idx - 1)];
    std::vector<Term> args;
    if (!accept('(')) fail(p_, "expected '(' after f" + std::to_string(idx));
    do args.push_back(term());
    while (accept(','));
    if (!accept(')')) fail(p_, "expected ',' or ')'");
    if (static_cast<int>(args.size()) != arity)
      fail(start, "f" + std::to_string(idx) + " takes " + std::to_string(arity) + " arguments, got " +
                      std::to_string(args.size()));
    return make_apply(static_cast<int>(idx) - 1, std::move(args));
  }

  int max_var() const { return max_var_; }

 private:
  const std::string& s_;
  const std::vector<int>& arities_;
  std::string source_;
  std::size_t p_ = 0;
  int max_var_ = -1;
};

}  // namespace

Term parse_term(const std::string& text, const std::vector<int>& symbol_arities, const std::string& source) {
  TermParser p(text, symbol_arities, source);
  Term t = p.term();
  if (!p.at_end()) p.fail(p.pos(), "unexpected text after the term");
  return t;
}

Equation parse_equation(const std::string& text, const std::vector<int>& symbol_arities, int min_arity,
                        const std::string& source) {
  TermParser p(text, symbol_arities, source);
  Equation e;
  e.lhs = p.term();
  if (!p.accept('=')) p.fail(p.pos(), "expected '='");
  e.rhs = p.term();
  if (!p.at_end()) p.fail(p.pos(), "unexpected text after the equation");
  e.arity = std::max(p.max_var() + 1, min_arity);
  return e;
}

std::vector<std::string> generator_names(std::size_t count) {
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= count; ++i) names.push_back("f" + std::to_string(i));
  return names;
}

std::vector<int> parse_int_list(const std::string& text, int lo, int hi, const std::string& source) {
  Cursor c(text, source);
  std::vector<int> out;
  for (c.skip_blank(); !c.done(); c.skip_blank()) {
    const Line& l = c.next();
    for (const auto& t : l.tokens) out.push_back(c.bounded(l, t, "value", lo, hi));
  }
  return out;
}

// ---------------------------------------------------------------------------------------------------------------

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::True: return 0;
    case Verdict::False: return 1;
    case Verdict::Undetermined: return 2;
    case Verdict::InputError: return 3;
  }
  return 3;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::True: return "true";
    case Verdict::False: return "false";
    case Verdict::Undetermined: return "undetermined";
    case Verdict::InputError: return "input-error";
  }
  return "input-error";
}

Record& Report::add(const std::string& kind) {
  records.emplace_back(Record::object());
  records.back()["record"] = kind;
  return records.back();
}

std::string Report::to_jsonl() const {
  std::string out;
  Record h = Record::object();
  h["schema"] = kReportSchema;
  h["command"] = command;
  h["seed"] = seed;
  out += h.dump() + '\n';
  for (const auto& r : records) out += r.dump() + '\n';
  Record v = Record::object();
  v["record"] = "verdict";
  v["verdict"] = verdict_name(verdict);
  v["exit"] = exit_code(verdict);
  out += v.dump() + '\n';
  return out;
}

std::string Report::to_text() const {
  std::ostringstream os;
  os << "clonekit " << command << " seed=" << seed << '\n';
  for (const auto& r : records) {
    os << r.at("record").get<std::string>() << ':';
    for (auto it = r.begin(); it != r.end(); ++it) {
      if (it.key() == "record") continue;
      os << ' ' << it.key() << '=' << (it.value().is_string() ? it.value().get<std::string>() : it.value().dump());
    }
    os << '\n';
  }
  os << "verdict: " << verdict_name(verdict) << " (exit " << exit_code(verdict) << ")\n";
  return os.str();
}

Report Report::from_jsonl(const std::string& text) {
  const std::string src = "<report>";
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string::npos) throw ParseError(src, static_cast<int>(lines.size()) + 1, 0, "missing final newline");
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  if (lines.size() < 2) throw ParseError(src, 1, 0, "a report needs a header and a verdict line");
  std::vector<Record> parsed;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int ln = static_cast<int>(i) + 1;
    Record r;
    try {
      r = Record::parse(lines[i]);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(src, ln, static_cast<int>(e.byte), "invalid JSON");
    }
    if (!r.is_object()) throw ParseError(src, ln, 1, "every line must be a JSON object");
    if (r.dump() != lines[i]) throw ParseError(src, ln, 0, "line is not in canonical serialization");
    parsed.push_back(std::move(r));
  }
  Report rep;
  const auto& h = parsed.front();
  const auto key_at = [](const Record& r, std::size_t k) {
    auto it = r.begin();
    std::advance(it, static_cast<long>(k));
    return it.key();
  };
  if (h.size() != 3 || key_at(h, 0) != "schema" || key_at(h, 1) != "command" || key_at(h, 2) != "seed")
    throw ParseError(src, 1, 0, "header must hold schema, command, seed in that order");
  if (h["schema"] != kReportSchema) throw ParseError(src, 1, 0, "unknown schema");
  if (!h["command"].is_string() || !h["seed"].is_number_unsigned()) throw ParseError(src, 1, 0, "bad header field types");
  rep.command = h["command"].get<std::string>();
  rep.seed = h["seed"].get<std::uint64_t>();
  for (std::size_t i = 1; i + 1 < parsed.size(); ++i) {
    const auto& r = parsed[i];
    if (r.empty() || key_at(r, 0) != "record" || !r["record"].is_string())
      throw ParseError(src, static_cast<int>(i) + 1, 0, "records start with a string 'record' field");
    if (r["record"] == "verdict") throw ParseError(src, static_cast<int>(i) + 1, 0, "verdict before the last line");
    rep.records.push_back(r);
  }
  const auto& v = parsed.back();
  const int last = static_cast<int>(parsed.size());
  if (v.size() != 3 || key_at(v, 0) != "record" || v["record"] != "verdict" || key_at(v, 1) != "verdict" ||
      key_at(v, 2) != "exit")
    throw ParseError(src, last, 0, "last line must be the verdict record");
  bool found = false;
  for (Verdict cand : {Verdict::True, Verdict::False, Verdict::Undetermined, Verdict::InputError})
    if (v["verdict"] == verdict_name(cand)) {
      rep.verdict = cand;
      found = true;
    }
  if (!found) throw ParseError(src, last, 0, "unknown verdict");
  if (v["exit"] != exit_code(rep.verdict)) throw ParseError(src, last, 0, "exit code does not match the verdict");
  return rep;
}

}  // namespace clonekit
