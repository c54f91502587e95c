#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "clonekit/operation.hpp"

namespace clonekit {

struct TermNode;
using Term = std::shared_ptr<const TermNode>;

// Leaves are variables (symbol < 0, var >= 0, 0-based); inner nodes apply a symbol.
struct TermNode {
  int symbol = -1;
  int var = -1;
  std::vector<Term> children;
};

Term make_var(int index);
Term make_apply(int symbol, std::vector<Term> children);

bool is_var(const Term& t);
int term_depth(const Term& t);
int max_variable(const Term& t);  // -1 when the term has no variables
bool terms_equal(const Term& a, const Term& b);

// x1, x2, ... for variables, names[symbol] (or g<symbol>) for inner nodes.
std::string term_to_string(const Term& t, const std::vector<std::string>& names = {});

struct Equation {
  Term lhs;
  Term rhs;
  int arity = 0;  // number of variables the equation is read over
};

std::string equation_to_string(const Equation& e, const std::vector<std::string>& names = {});

using Binding = std::map<int, FiniteOperation>;

class UnboundSymbol : public std::invalid_argument {
 public:
  explicit UnboundSymbol(int symbol)
      : std::invalid_argument("term symbol " + std::to_string(symbol) + " has no binding"), symbol_(symbol) {}
  int symbol() const { return symbol_; }

 private:
  int symbol_;
};

// The arity-n operation a term computes when symbols are bound to operations on {0..d-1}.
FiniteOperation evaluate_term(const Term& t, const Binding& binding, int d, int arity);

// Value of a term at one point.
Value evaluate_term_at(const Term& t, const Binding& binding, const Tuple& x);

}  // namespace clonekit
