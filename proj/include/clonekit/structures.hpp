#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "clonekit/clone.hpp"
#include "clonekit/operation.hpp"

namespace clonekit {

struct Relation {
  std::string name;
  int arity = 0;
  std::set<Tuple> tuples;
};

class RelationalStructure {
 public:
  explicit RelationalStructure(int domain_size = 1);
  int domain_size() const { return d_; }
  void add_relation(const std::string& name, int arity, const std::vector<Tuple>& tuples);
  const std::vector<Relation>& relations() const { return relations_; }
  const Relation& relation(const std::string& name) const;

 private:
  int d_;
  std::vector<Relation> relations_;
};

class SearchBoundExceeded : public std::runtime_error {
 public:
  SearchBoundExceeded(const std::string& what, std::size_t bound) : std::runtime_error(what), bound_(bound) {}
  std::size_t bound() const { return bound_; }

 private:
  std::size_t bound_;
};

struct SearchBounds {
  std::size_t max_nodes = 50'000'000;
  std::size_t max_results = 2'000'000;
  int max_table_bits = 20;  // invariant_relations: d^m must stay below this
};

struct PolymorphismSet {
  int arity = 0;
  std::vector<FiniteOperation> members;
};

PolymorphismSet polymorphisms(const RelationalStructure& s, int k, const SearchBounds& bounds = {});

// Every k-by-arity matrix of R-tuples is sent, column by column, to a tuple in R.
bool preserves(const FiniteOperation& f, const std::set<Tuple>& relation, int arity);

std::vector<std::set<Tuple>> invariant_relations(const std::vector<FiniteOperation>& ops, int domain_size, int m,
                                                 const SearchBounds& bounds = {});

struct OrbitReport {
  bool is_group = true;
  std::string violation;
  std::size_t count = 0;
  std::vector<std::vector<Tuple>> orbits;
};

OrbitReport orbit_count(const std::vector<FiniteOperation>& group, int n);

struct TransitivityReport {
  bool transitive = false;
  std::vector<std::vector<Value>> orbits;  // orbits of the invertible unary members on the domain
};

TransitivityReport is_transitive_clone(const FunctionClone& clone);

// End ⊆ Aut, i.e. every endomorphism is a bijection.
bool endomorphisms_are_automorphisms(const RelationalStructure& s, const SearchBounds& bounds = {});

// x -> f(g_1(x), ..., g_k(x)).
FiniteOperation p_map(const FiniteOperation& f, const std::vector<FiniteOperation>& gs);

// Basic open set {f : f(a_1..a_k) = a_0} together with unary alphas with alpha_i(b) = a_i.
struct OpenSetData {
  Tuple args;
  Value value = 0;
  std::vector<FiniteOperation> alphas;
  Value b = 0;
};

struct PMapIdentityReport {
  bool holds = true;
  std::size_t members_checked = 0;
  std::optional<FiniteOperation> counterexample;
};

PMapIdentityReport verify_pmap_identity(const std::vector<FiniteOperation>& members, const OpenSetData& data);

// Symbol 0 is the unknown n-ary operation, symbol 1 + c the unary constant with value c.
Equation encode_open_set_as_equation(const FunctionClone& clone, const Tuple& a, Value b);
Binding open_set_binding(const FunctionClone& clone, const FiniteOperation& candidate);

struct OpenSetCheck {
  bool holds = true;
  std::size_t members_checked = 0;
  std::size_t solutions = 0;
};

OpenSetCheck verify_open_set_equation(const FunctionClone& clone, const Equation& e, const Tuple& a, Value b);

}  // namespace clonekit
