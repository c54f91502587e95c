#include "clonekit/term.hpp"

#include <algorithm>
#include <sstream>

namespace clonekit {

Term make_var(int index) {
  auto n = std::make_shared<TermNode>();
  n->var = index;
  return n;
}

Term make_apply(int symbol, std::vector<Term> children) {
  auto n = std::make_shared<TermNode>();
  n->symbol = symbol;
  n->children = std::move(children);
  return n;
}

bool is_var(const Term& t) { return t->symbol < 0; }

int term_depth(const Term& t) {
  if (is_var(t)) return 0;
  int d = 0;
  for (const auto& c : t->children) d = std::max(d, term_depth(c));
  return d + 1;
}

int max_variable(const Term& t) {
  if (is_var(t)) return t->var;
  int m = -1;
  for (const auto& c : t->children) m = std::max(m, max_variable(c));
  return m;
}

bool terms_equal(const Term& a, const Term& b) {
  if (a.get() == b.get()) return true;
  if (a->symbol != b->symbol || a->var != b->var || a->children.size() != b->children.size()) return false;
  for (std::size_t i = 0; i < a->children.size(); ++i) {
    if (!terms_equal(a->children[i], b->children[i])) return false;
  }
  return true;
}

static void write_term(std::ostringstream& os, const Term& t, const std::vector<std::string>& names) {
  if (is_var(t)) {
    os << 'x' << (t->var + 1);
    return;
  }
  if (t->symbol < static_cast<int>(names.size())) {
    os << names[static_cast<std::size_t>(t->symbol)];
  } else {
    os << 'g' << t->symbol;
  }
  os << '(';
  for (std::size_t i = 0; i < t->children.size(); ++i) {
    if (i) os << ',';
    write_term(os, t->children[i], names);
  }
  os << ')';
}

std::string term_to_string(const Term& t, const std::vector<std::string>& names) {
  std::ostringstream os;
  write_term(os, t, names);
  return os.str();
}

std::string equation_to_string(const Equation& e, const std::vector<std::string>& names) {
  return term_to_string(e.lhs, names) + " = " + term_to_string(e.rhs, names);
}

FiniteOperation evaluate_term(const Term& t, const Binding& binding, int d, int arity) {
  if (is_var(t)) {
    if (t->var >= arity) throw std::invalid_argument("variable x" + std::to_string(t->var + 1) + " exceeds arity");
    return FiniteOperation::projection(d, arity, t->var + 1);
  }
  auto it = binding.find(t->symbol);
  if (it == binding.end()) throw UnboundSymbol(t->symbol);
  if (it->second.arity() != static_cast<int>(t->children.size())) {
    throw std::invalid_argument("symbol " + std::to_string(t->symbol) + " applied to " +
                                std::to_string(t->children.size()) + " arguments but bound to arity " +
                                std::to_string(it->second.arity()));
  }
  if (it->second.domain_size() != d) throw std::invalid_argument("binding domain mismatch");
  std::vector<FiniteOperation> args;
  args.reserve(t->children.size());
  for (const auto& c : t->children) args.push_back(evaluate_term(c, binding, d, arity));
  return compose(it->second, args);
}

Value evaluate_term_at(const Term& t, const Binding& binding, const Tuple& x) {
  if (is_var(t)) return x.at(static_cast<std::size_t>(t->var));
  auto it = binding.find(t->symbol);
  if (it == binding.end()) throw UnboundSymbol(t->symbol);
  Tuple args;
  args.reserve(t->children.size());
  for (const auto& c : t->children) args.push_back(evaluate_term_at(c, binding, x));
  return it->second(args);
}

}  // namespace clonekit
