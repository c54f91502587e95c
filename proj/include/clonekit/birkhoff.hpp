#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "clonekit/operation.hpp"
#include "clonekit/term.hpp"

namespace clonekit {

struct Algebra {
  int domain_size = 1;
  std::vector<FiniteOperation> ops;

  Algebra() = default;
  Algebra(int d, std::vector<FiniteOperation> operations);
  std::vector<int> signature() const;
};

// Block id per element, blocks numbered by first occurrence.
struct Congruence {
  std::vector<int> block;
  int block_count() const;
  bool related(int a, int b) const { return block[static_cast<std::size_t>(a)] == block[static_cast<std::size_t>(b)]; }
  friend bool operator==(const Congruence& a, const Congruence& b) { return a.block == b.block; }
  friend bool operator<(const Congruence& a, const Congruence& b) { return a.block < b.block; }
};

Congruence identity_congruence(int n);
Congruence normalize_partition(const std::vector<int>& labels);
Congruence join(const Congruence& a, const Congruence& b);

std::vector<int> generated_subuniverse(const Algebra& a, const std::vector<int>& gens);

Congruence congruence_generated(const Algebra& a, const std::vector<std::pair<int, int>>& pairs);

struct CompatibilityFailure {
  int slot = 0;
  Tuple args1, args2;
  Value out1 = 0, out2 = 0;
};

class IncompatiblePartition : public std::invalid_argument {
 public:
  explicit IncompatiblePartition(CompatibilityFailure f);
  const CompatibilityFailure& failure() const { return failure_; }

 private:
  CompatibilityFailure failure_;
};

std::optional<CompatibilityFailure> find_incompatibility(const Algebra& a, const Congruence& c);
Algebra quotient(const Algebra& a, const Congruence& c);

// Componentwise power; elements are ranks of tuples in lexicographic order.
Algebra power_algebra(const Algebra& a, int n);
// Restriction to a closed subset, elements re-indexed in the order given.
Algebra subalgebra(const Algebra& a, const std::vector<int>& universe);

struct HspCaps {
  int max_power = 2;
  int max_generators = 3;
};

struct HspWitness {
  int power = 1;
  std::vector<Tuple> generators;
  std::vector<Tuple> subuniverse;  // elements of A^n, sorted
  Congruence congruence;           // on subuniverse positions
  std::vector<Value> iso;          // block id -> element of B
};

std::optional<HspWitness> hsp_membership(const Algebra& b, const Algebra& a, const HspCaps& caps = {});

// Independent re-check: closure, compatibility, bijectivity, operation respect.
bool verify_hsp_witness(const Algebra& b, const Algebra& a, const HspWitness& w, std::string* why = nullptr);

std::optional<std::vector<Value>> find_isomorphism(const Algebra& from, const Algebra& to);

struct InclusionResult {
  bool holds = true;
  std::optional<Equation> counterexample;
  std::size_t term_classes = 0;
};

InclusionResult equational_inclusion(const Algebra& a, const Algebra& b, int depth_cap = 3, int variables = 3);

// Partition of index positions, as a restricted growth string.
using Kernel = std::vector<int>;
Kernel kernel_of(const Tuple& t);

struct FiniteRangeReport {
  std::vector<Kernel> kernels_present;
  bool kernel_dependent = true;
  std::optional<std::pair<Tuple, Tuple>> dependence_counterexample;  // in S, not in S
  bool upward_closed = true;
  std::optional<std::pair<Kernel, Kernel>> upward_counterexample;     // present, missing coarsening
  std::optional<bool> unary_closed;
  std::optional<std::pair<FiniteOperation, Tuple>> unary_counterexample;
  std::vector<std::size_t> filtration_sizes;  // index r-1: tuples with at most r values
  std::vector<std::vector<bool>> op_closure;  // per op, per r
};

FiniteRangeReport finite_range_restriction(const std::set<Tuple>& s, int codomain_size, int index_count,
                                           bool unary_closure_flag, const std::vector<FiniteOperation>& ops = {});

struct CoordinateAnalysis {
  std::vector<std::pair<int, int>> edge_pairs;   // E(a_i, a_j) on all of S
  std::vector<std::pair<int, int>> equal_pairs;  // a_i = a_j on all of S
  std::vector<std::pair<int, int>> free_pairs;   // the rest
  std::optional<Tuple> free_non_edge_tuple;
  std::vector<std::vector<int>> w_family;        // agreement sets of related pairs (0-based positions)
  bool depends_only_on_agreement = true;
  bool upward_closed = true;
  bool intersection_closed = true;
  bool empty_in_w = false;
  std::optional<int> witness;                    // 0-based coordinate
  std::string failure;
};

// S ⊆ V^n with V = {0..d-1}; theta is a block labelling of S (indexed like s).
CoordinateAnalysis coordinate_congruence_analysis(const std::vector<Tuple>& s, int domain_size, const Congruence& theta,
                                                   const std::vector<FiniteOperation>& action,
                                                   const std::set<std::pair<Value, Value>>* edges = nullptr);

}  // namespace clonekit
