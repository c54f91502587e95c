#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "clonekit/operation.hpp"
#include "clonekit/term.hpp"

namespace clonekit {

struct GenerateOptions {
  int arity_cap = 3;
  bool allow_large_domain = false;  // domains above 4 need this set
  std::size_t max_members = std::size_t{1} << 20;
};

// Composite g(m_1, ..., m_r) at one arity that landed on an existing member.
struct GroundEquation {
  int arity = 0;
  int symbol = 0;
  std::vector<std::size_t> args;  // member indices at that arity
  std::size_t result = 0;
};

class FunctionClone {
 public:
  int domain_size() const { return d_; }
  int arity_cap() const { return cap_; }
  const std::vector<FiniteOperation>& generators() const { return generators_; }
  const std::vector<std::string>& generator_names() const { return names_; }
  void set_generator_names(std::vector<std::string> names) { names_ = std::move(names); }

  const std::vector<FiniteOperation>& members(int arity) const;
  const Term& witness(int arity, std::size_t index) const;
  std::optional<std::size_t> index_of(const FiniteOperation& f) const;
  bool contains(const FiniteOperation& f) const { return index_of(f).has_value(); }
  std::size_t size() const;

  const std::vector<GroundEquation>& ground_equations() const { return ground_; }
  Equation to_equation(const GroundEquation& g) const;
  std::vector<Equation> equations(std::size_t limit = std::numeric_limits<std::size_t>::max()) const;

  // How a member was first reached: -1 for a projection, else the generator id.
  int derivation_symbol(int arity, std::size_t index) const;
  const std::vector<std::size_t>& derivation_args(int arity, std::size_t index) const;

 private:
  friend FunctionClone generate_clone(const std::vector<FiniteOperation>&, const GenerateOptions&);
  struct Level {
    std::vector<FiniteOperation> ops;
    std::vector<Term> witnesses;
    std::vector<int> symbol;
    std::vector<std::vector<std::size_t>> args;
    std::unordered_map<FiniteOperation, std::size_t, OperationHash> index;
  };
  int d_ = 0;
  int cap_ = 0;
  std::vector<FiniteOperation> generators_;
  std::vector<std::string> names_;
  std::vector<Level> levels_;  // levels_[n-1] holds the n-ary members
  std::vector<GroundEquation> ground_;
};

class CloneSizeExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Closure of generators under composition and projections, by term depth, at every arity up to the cap.
FunctionClone generate_clone(const std::vector<FiniteOperation>& generators, const GenerateOptions& options = {});

class NotAMember : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ElementClass {
  bool invertible = false;
  std::optional<FiniteOperation> inverse;
  bool constant = false;
};

// Unary members only: is f invertible inside the clone, is it constant.
ElementClass classify_element(const FunctionClone& clone, const FiniteOperation& f);

struct EquationCheck {
  bool holds = true;
  std::optional<Tuple> witness;  // first point in canonical order where the sides differ
};

EquationCheck check_term_equation(const Equation& e, const Binding& binding, int domain_size);

struct CloneMap {
  FunctionClone source;
  FunctionClone target;
  std::unordered_map<FiniteOperation, FiniteOperation, OperationHash> assignment;
};

struct CompositionViolation {
  FiniteOperation outer;
  std::vector<FiniteOperation> args;
  FiniteOperation image_of_composite;
  FiniteOperation composite_of_images;
};

struct HomCheckOptions {
  std::size_t max_checks = 0;  // 0: exhaustive
  std::size_t max_reported = 16;
};

struct HomomorphismReport {
  bool verdict = true;
  bool exhaustive = true;
  std::size_t compositions_checked = 0;
  std::vector<std::string> problems;  // totality, arity, projection failures
  std::vector<CompositionViolation> violations;
};

HomomorphismReport verify_clone_homomorphism(const CloneMap& map, const HomCheckOptions& options = {});

struct ProjectionHomResult {
  std::optional<std::vector<int>> coordinates;  // 1-based coordinate per generator
  std::size_t equations_checked = 0;
  int arity_cap = 0;
  std::string scope;
};

// Generator -> coordinate assignment satisfying every recorded equation up to the arity cap.
ProjectionHomResult find_projection_homomorphism(const FunctionClone& clone);

// Coordinate a member collapses to under a coordinate assignment (1-based).
int projection_image(const FunctionClone& clone, int arity, std::size_t index, const std::vector<int>& coordinates);

}  // namespace clonekit
