#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "clonekit/clone.hpp"
#include "clonekit/fraisse.hpp"
#include "clonekit/topology.hpp"

namespace clonekit {

// A finite set of unary maps on {0..d-1}, closed under composition and containing the identity.
class TransformationMonoid {
 public:
  // Closure of the generators and the identity; throws when it grows past max_size.
  static TransformationMonoid generated(int d, const std::vector<FiniteOperation>& generators,
                                        std::size_t max_size = std::size_t{1} << 16);
  // Checks closure and the identity exhaustively.
  static TransformationMonoid from_elements(int d, std::vector<FiniteOperation> elements);

  int domain_size() const { return d_; }
  const std::vector<FiniteOperation>& elements() const { return elements_; }
  bool contains(const FiniteOperation& f) const;
  std::vector<FiniteOperation> constants() const;

 private:
  int d_ = 0;
  std::vector<FiniteOperation> elements_;  // sorted
};

struct MonoidMap {
  TransformationMonoid source;
  TransformationMonoid target;
  std::map<FiniteOperation, FiniteOperation> assignment;
};

struct MonoidHomCheck {
  bool verdict = true;
  std::string problem;  // first failure, empty when verdict holds
  std::optional<FiniteOperation> f, g;  // failing pair for the composition law
};

MonoidHomCheck check_monoid_hom(const MonoidMap& xi);

enum class LiftStatus { Lifted, ConstantViolation, NotAHomomorphism };

struct LiftResult {
  LiftStatus status = LiftStatus::Lifted;
  std::optional<FiniteOperation> violating_constant;
  MonoidHomCheck hom_check;
  std::optional<CloneMap> clone_map;   // essentially unary clones up to the arity cap
  HomomorphismReport clone_report;     // re-verification of the lifted map
};

// Extends xi to the generated clones by m(x_i) -> xi(m)(x_i); possible exactly when constants go to constants.
LiftResult lift_monoid_hom(const MonoidMap& xi, int arity_cap = 2);

// ---------------------------------------------------------------------------------------------------------------
// Lazy transformations of N with a membership oracle for a submonoid.

struct LazyElement {
  std::string name;
  std::function<Nat(Nat)> at;
  bool in_sub = false;  // membership in the submonoid, as reported by the monoid's oracle
};

struct LazyMonoidOps {
  std::function<LazyElement(const LazyElement&, const LazyElement&)> compose;  // (f, g) -> f o g
  std::function<bool(const LazyElement&)> in_sub;
};

// Composition is pointwise; the composite is in the submonoid exactly when both factors are.
LazyMonoidOps invertibles_ops();

// xi(e) = i e i^{-1} with c fixed on the submonoid, the constant c elsewhere; i is the shift skipping c.
class DiscontinuousHom {
 public:
  DiscontinuousHom(LazyMonoidOps ops, Nat c);
  Nat c() const { return c_; }
  Nat shift(Nat x) const { return x < c_ ? x : x + 1; }
  Nat unshift(Nat y) const;  // y != c
  LazyElement operator()(const LazyElement& e) const;
  const LazyMonoidOps& ops() const { return ops_; }

 private:
  LazyMonoidOps ops_;
  Nat c_;
};

struct DiscontinuityOptions {
  Nat prefix = 64;
  std::size_t pairs = 1000;
  std::size_t points_per_pair = 16;
  std::uint64_t seed = 1;
};

enum class DiscontinuityStatus { Witnessed, AbsorptionFailure, NotConverging, HomomorphismFailure, NoDivergence };

struct DiscontinuityReport {
  DiscontinuityStatus status = DiscontinuityStatus::Witnessed;
  std::string detail;
  std::size_t absorption_checked = 0;
  std::size_t pairs_checked = 0;
  std::optional<std::pair<std::string, std::string>> failing_pair;
  std::vector<Nat> approximant_agreement;  // leading points where approximant j agrees with f
  std::vector<Nat> divergence;             // 1-based first point where xi(approximant j) and xi(f) differ
  std::optional<Nat> divergence_index;     // common value when every approximant diverges at the same point
};

// Checks absorption and the homomorphism law on sampled pairs from the pool, then confirms that the approximants
// converge to f while their images stay away from xi(f).
DiscontinuityReport build_discontinuous_hom(const DiscontinuousHom& xi, const std::vector<LazyElement>& pool,
                                            const LazyElement& f, const std::vector<LazyElement>& approximants,
                                            DiscontinuityOptions options = {});

// Self-embeddings of the lazily built random graph; the submonoid is the automorphisms.
class GraphEmbeddingMonoid {
 public:
  explicit GraphEmbeddingMonoid(std::uint64_t seed = 1);

  LazyLimit& world() { return *world_; }
  LazyElement identity() const;
  // Back-and-forth extension of a finite partial isomorphism to an automorphism.
  LazyElement automorphism(const std::string& name, const std::vector<std::pair<int, int>>& seed_pairs);
  // Forth-only extension that never hits the point skip, hence not surjective.
  LazyElement embedding_avoiding(const std::string& name, int skip, const std::vector<std::pair<int, int>>& seed_pairs);
  // Automorphisms agreeing with f on 0..m-1 for m = 1..count.
  std::vector<LazyElement> approximants(const LazyElement& f, int count);

 private:
  std::shared_ptr<LazyLimit> world_;
};

}  // namespace clonekit
