#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "clonekit/clone.hpp"
#include "clonekit/fraisse.hpp"
#include "clonekit/topology.hpp"

namespace clonekit {

// ---------------------------------------------------------------------------------------------------------------
// Essentially injective functions and their canonical form.

// (x_1..x_n) -> core(x_{i_1}, ..., x_{i_k}) with an injective k-ary core; indices are 1-based and increasing.
struct EssentiallyInjectiveFunction {
  int arity = 1;
  std::vector<int> indices;
  Evaluator core;

  Nat operator()(const NatTuple& x) const;
  NatTuple project(const NatTuple& x) const;
  // Core tuple placed at the essential coordinates, zeros elsewhere.
  NatTuple embed(const NatTuple& y) const;
  Evaluator as_evaluator() const;
};

EssentiallyInjectiveFunction make_essentially_injective(int n, std::vector<int> indices, Evaluator core);

enum class HornVerdict { EssentiallyInjective, Rejected, Undetermined };

struct HornResult {
  HornVerdict verdict = HornVerdict::Undetermined;
  std::optional<EssentiallyInjectiveFunction> form;
  // Rejection: pairs of probed tuples that together contradict every nonempty index set.
  std::vector<std::pair<NatTuple, NatTuple>> witness;
  std::vector<std::vector<int>> candidates;  // undetermined: index sets still possible
  int probe_width = 0;
  std::size_t evaluations = 0;
};

// Probes g on {0..width-1}^n (clipped to a finite domain). Width below 2 leaves the dummies undetermined.
HornResult horn_canonical_form(const Evaluator& g, int probe_width, std::size_t max_probe = std::size_t{1} << 20);

// Does some pair contradict the index set J (g(x)=g(y) with x_J != y_J, or x_J = y_J with g(x) != g(y))?
bool witness_refutes(const Evaluator& g, const std::vector<std::pair<NatTuple, NatTuple>>& witness,
                     const std::vector<int>& indices);
bool witness_refutes_all(const Evaluator& g, const std::vector<std::pair<NatTuple, NatTuple>>& witness);

class PieceMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Gate of a piece: the canonical tuple enumeration of N^k is its core, a bijection onto N.
EssentiallyInjectiveFunction horn_gate(int n, std::vector<int> indices);

struct HornDecomposition {
  std::vector<Nat> alpha;  // alpha[v] for gate-image points v = 0..N-1
  bool verified = false;
  std::string failure;
  // Input agreement on the first N core tuples gives output agreement on the first s(N) points.
  static Nat stability(Nat n) { return n; }
};

// g = alpha o gate on the first support_size gate-image points; gate cores are inverted by search within budget.
HornDecomposition horn_gate_decompose(const EssentiallyInjectiveFunction& g, const EssentiallyInjectiveFunction& gate,
                                      Nat support_size, Nat inversion_budget = 1 << 16);

// ---------------------------------------------------------------------------------------------------------------
// Gate structures for polymorphisms of the random graph.

struct GateOptions {
  int arity = 2;
  bool injective = true;  // off: the endomorphism gate (arity 1, no inverse maps)
  std::uint64_t seed = 1;
  int initial_a = 6;   // A points built up front
  int eager_a = 3;     // phi is built on all tuples over the first eager_a A points
  int initial_free_b = 6;
  int probe_window = 6;
  int probe_cap = 2;
  int arity_cap = 3;
};

struct SideFailure {
  std::vector<int> subset;
  std::vector<bool> pattern;
};

// Two graphs A and B on disjoint point sets, an edge-preserving partial map phi: A^n -> B (injective unless
// configured otherwise) and its coordinate inverses psi_k. Built lazily: phi values appear on request.
class GraphGate {
 public:
  enum class Side { A, B };

  explicit GraphGate(GateOptions options);

  const GateOptions& options() const { return options_; }
  int arity() const { return options_.arity; }
  int size() const { return static_cast<int>(side_.size()); }
  Side side(int p) const { return side_[static_cast<std::size_t>(p)]; }
  const std::vector<int>& points(Side s) const { return s == Side::A ? a_points_ : b_points_; }
  bool edge(int x, int y) const;

  // New point on one side with prescribed adjacency; unlisted same-side points get random adjacency.
  int add_point(Side s, const std::map<int, bool>& prescribed = {}, bool random_rest = true);

  std::optional<int> phi_built(const std::vector<int>& u) const;
  // Builds phi(u) if needed. Edges to phi(v) with u, v adjacent in every coordinate are forced; overrides set
  // the others (a contradicting override throws); the rest are random.
  int phi(const std::vector<int>& u, const std::map<int, bool>& overrides = {});
  // Endomorphism gate: route u to an existing B point, refused when edge preservation would break.
  bool phi_assign(const std::vector<int>& u, int b);
  bool in_phi_range(int b) const { return psi_.count(b) > 0; }
  // 1-based coordinate inverse; empty off the range or when phi is not injective.
  std::optional<int> psi(int k, int b) const;
  const std::map<std::vector<int>, int>& phi_table() const { return phi_; }

  std::optional<std::string> check_axioms() const;
  std::optional<SideFailure> extension_probe(Side s, int window, int cap) const;
  // Adds realizers until the probe passes.
  std::size_t saturate(Side s, int window, int cap);

  FiniteStructure side_structure(Side s) const;
  std::string serialize() const;

 private:
  bool random_bit();

  GateOptions options_;
  std::vector<Side> side_;
  std::vector<int> a_points_, b_points_;
  std::vector<std::vector<char>> adj_;  // adj_[x][y] for y < x
  std::map<std::vector<int>, int> phi_;
  std::map<int, std::vector<std::vector<int>>> psi_;  // B point -> tuples mapped there
  std::mt19937_64 rng_;
};

struct GateBundle {
  int arity = 1;
  std::vector<int> indices;  // covering piece; all coordinates for graph gates
  std::optional<EssentiallyInjectiveFunction> horn;
  std::shared_ptr<const GraphGate> graph;
};

GateBundle build_horn_gate(int n, std::vector<int> indices);
GateBundle build_graph_gate(int n, std::uint64_t seed, GateOptions options = {});

// ---------------------------------------------------------------------------------------------------------------
// Lazily chosen polymorphisms of a graph world with a rich unary predicate U.

struct PolymorphismOptions {
  int arity = 2;
  bool injective = true;
  bool avoid_u = true;     // image outside U, as after composing with a map into the complement of U
  double collapse = 0.0;   // non-injective: chance of reusing an earlier value when edges allow it
  std::uint64_t seed = 1;
};

class RandomPolymorphism {
 public:
  RandomPolymorphism(RichPartition& world, PolymorphismOptions options);
  int operator()(const std::vector<int>& p);
  // Fix a value in advance, e.g. to copy another function's prefix.
  void pin(const std::vector<int>& p, int value) { values_[p] = value; }
  const PolymorphismOptions& options() const { return options_; }

 private:
  RichPartition* world_;
  PolymorphismOptions options_;
  std::map<std::vector<int>, int> values_;
  std::mt19937_64 rng_;
};

// First n enumerated n-tuples of world points in the countable enumeration order; the world grows to hold them.
std::vector<std::vector<int>> enumerated_support(RichPartition& world, int arity, std::size_t count);

struct PreconditionViolation {
  std::string what;
  std::vector<std::vector<int>> tuples;
};

struct GraphDecomposition {
  std::optional<PreconditionViolation> violation;
  std::vector<std::map<int, int>> beta;   // beta[k]: world point -> A point
  std::map<int, int> alpha;               // B point -> world point
  std::vector<int> gate_points;           // phi(beta(p)) per support tuple
  std::vector<std::string> steps;
  std::vector<int> deferred;              // phi points off the beta image, left out of alpha
  bool verified = false;
  std::string failure;
  std::shared_ptr<GraphGate> gate;        // the gate after the run
  std::shared_ptr<RichPartition> world;   // the world after the run
  static std::size_t stability(std::size_t n) { return n; }
};

struct DecomposeOptions {
  bool interleave = true;  // one off-range step (alpha, or h) after every step driven by the support
};

// g = alpha o phi o (beta_1, ..., beta_n) on the support; values[i] is g(support[i]).
GraphDecomposition gate_decompose_graph(const RichPartition& world, const std::vector<std::vector<int>>& support,
                                        const std::vector<int>& values, const GateBundle& bundle,
                                        DecomposeOptions options = {});

// Shared-prefix length of two runs: leading support tuples with equal beta, gate point and alpha value.
std::size_t decomposition_agreement(const GraphDecomposition& x, const GraphDecomposition& y,
                                    const std::vector<std::vector<int>>& support);

struct HfDecomposition {
  std::optional<PreconditionViolation> violation;
  std::vector<int> f;                    // per support tuple
  std::map<int, int> h;
  std::vector<std::string> steps;
  bool verified = false;
  std::string failure;
  std::shared_ptr<RichPartition> world;
  static std::size_t stability(std::size_t n) { return n; }
};

// g = h o f with f injective and edge-preserving, h edge-preserving; f(p) is the smallest admissible point.
HfDecomposition hf_decompose(const RichPartition& world, const std::vector<std::vector<int>>& support,
                             const std::vector<int>& values, DecomposeOptions options = {});

std::size_t hf_agreement(const HfDecomposition& x, const HfDecomposition& y);

// ---------------------------------------------------------------------------------------------------------------
// Left composition with an injective unary map.

class NotInjective : public std::invalid_argument {
 public:
  NotInjective(Value a, Value b)
      : std::invalid_argument("map identifies " + std::to_string(a) + " and " + std::to_string(b)), pair_(a, b) {}
  std::pair<Value, Value> witness() const { return pair_; }

 private:
  std::pair<Value, Value> pair_;
};

// {e o f : f in the clone} together with the projections.
class ComposedView {
 public:
  ComposedView(const FunctionClone& base, FiniteOperation e);

  const FiniteOperation& e() const { return e_; }
  const FunctionClone& base() const { return *base_; }
  FiniteOperation psi(const FiniteOperation& f) const;
  bool contains(const FiniteOperation& g) const;
  std::vector<FiniteOperation> members(int arity) const;

 private:
  const FunctionClone* base_;
  FiniteOperation e_;
  std::vector<Value> inverse_;
};

ComposedView e_compose_view(const FunctionClone& base, const FiniteOperation& e);

// Lazy variant: e o f, with e checked injective on the first window points.
Evaluator compose_left(const Evaluator& e, const Evaluator& f, Nat window = 256);

}  // namespace clonekit
