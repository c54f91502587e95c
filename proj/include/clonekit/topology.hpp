#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "clonekit/operation.hpp"

namespace clonekit {

using Nat = std::uint64_t;
using NatTuple = std::vector<Nat>;

class TupleEnumeration {
 public:
  static TupleEnumeration finite(int d, int n);
  static TupleEnumeration countable(int n);

  bool is_finite() const { return finite_; }
  int arity() const { return n_; }
  Nat size() const;  // finite case only
  Nat rank(const NatTuple& t) const;
  NatTuple unrank(Nat index) const;

 private:
  bool finite_ = true;
  int d_ = 0;
  int n_ = 0;
};

// A total function on tuples, either a finite table or a lazily computed map on ℕ^n.
struct Evaluator {
  int arity = 1;
  std::optional<int> finite_domain;
  std::function<Nat(const NatTuple&)> fn;

  Nat operator()(const NatTuple& x) const { return fn(x); }
  TupleEnumeration enumeration() const;
  Nat at_index(Nat i) const { return fn(enumeration().unrank(i)); }  // 0-based
};

Evaluator table_evaluator(const FiniteOperation& f);
Evaluator nat_evaluator(int arity, std::function<Nat(const NatTuple&)> fn);

struct Distance {
  enum class Kind { ZeroSoFar, Exact, One };
  Kind kind = Kind::ZeroSoFar;
  Nat index = 0;  // Exact: 1-based first disagreement; ZeroSoFar: probes that agreed

  double value() const;
  std::string to_string() const;
  friend bool operator==(const Distance& a, const Distance& b) { return a.kind == b.kind && a.index == b.index; }
};

Distance distance(const Evaluator& f, const Evaluator& g, Nat probe_budget);

// Number of leading enumerated tuples on which f and g agree, up to the budget.
Nat agreement_length(const Evaluator& f, const Evaluator& g, Nat probe_budget);

bool in_basic_open(const Evaluator& f, const std::vector<std::pair<NatTuple, Nat>>& constraints);

struct CauchyPrefix {
  int arity = 1;
  std::vector<Evaluator> elements;
  std::vector<Nat> profile;  // profile[j]: agreement length of elements j and j+1

  static CauchyPrefix from_elements(std::vector<Evaluator> elements, Nat probe_budget);
};

struct ModulusMap {
  std::function<Evaluator(const Evaluator&)> map;
  std::function<Nat(Nat)> modulus;  // precision k -> input agreement needed
};

class InsufficientConvergence : public std::runtime_error {
 public:
  InsufficientConvergence(Nat achieved, Nat required)
      : std::runtime_error("insufficient convergence: agreement " + std::to_string(achieved) + " < required " +
                           std::to_string(required)),
        achieved_(achieved),
        required_(required) {}
  Nat achieved() const { return achieved_; }
  Nat required() const { return required_; }

 private:
  Nat achieved_;
  Nat required_;
};

std::vector<Nat> extend_uniformly_continuous(const ModulusMap& map, const CauchyPrefix& target, Nat precision);

// Conjugation g -> s g s^{-1} on unary maps of ℕ, with modulus read off s^{-1} on a window.
ModulusMap conjugation_map(std::function<Nat(Nat)> s, std::function<Nat(Nat)> s_inverse);

}  // namespace clonekit
