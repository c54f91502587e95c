#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace clonekit {

struct RelationSymbol {
  std::string name;
  int arity = 2;
  bool symmetric = false;
  bool irreflexive = false;
};

// A finite relational structure on points 0..size-1. Symmetric relations are stored closed under permutation.
class FiniteStructure {
 public:
  FiniteStructure() = default;
  FiniteStructure(std::vector<RelationSymbol> signature, int size);

  int size() const { return n_; }
  const std::vector<RelationSymbol>& signature() const { return sig_; }
  int relation_index(const std::string& name) const;  // -1 when absent
  bool holds(int rel, const std::vector<int>& t) const;
  void set(int rel, const std::vector<int>& t, bool value);
  int add_point();

  FiniteStructure relabel(const std::vector<int>& perm) const;  // point i becomes perm[i]
  FiniteStructure induced(const std::vector<int>& points) const;
  bool respects_flags(std::string* why = nullptr) const;
  // Bits over relations and tuples in canonical order.
  std::string code() const;

  friend bool operator==(const FiniteStructure& a, const FiniteStructure& b) { return a.code() == b.code() && a.n_ == b.n_; }

 private:
  std::vector<RelationSymbol> sig_;
  int n_ = 0;
  std::vector<std::set<std::vector<int>>> facts_;
};

// Tuples over 0..n-1 that a relation can hold on: irreflexive ones skip repeats, symmetric ones keep sorted representatives.
std::vector<std::vector<int>> candidate_tuples(const RelationSymbol& r, int n);

struct CandidateFact {
  int rel;
  std::vector<int> tuple;
};
// Facts that mention the new point k when extending a k-point structure by one point.
std::vector<CandidateFact> extension_candidates(const std::vector<RelationSymbol>& sig, int k);

struct CanonicalForm {
  std::string code;
  FiniteStructure rep;
  std::vector<int> perm;  // original point i sits at perm[i] in rep
};

CanonicalForm canonical_form(const FiniteStructure& s);

struct AgeSpec {
  std::vector<RelationSymbol> signature;
  std::vector<FiniteStructure> forbidden;  // induced-substructure semantics

  int relation_index(const std::string& name) const;
  void validate() const;
  bool admissible(const FiniteStructure& s) const;
  // Only embeddings of forbidden structures whose image contains every point of must.
  bool admissible_containing(const FiniteStructure& s, const std::vector<int>& must) const;
  AgeSpec with_unary(const std::string& name) const;
  bool binary_only() const;

  static AgeSpec graphs();
  static AgeSpec tournaments();
  static AgeSpec linear_orders();
  static AgeSpec k3_free_graphs();
};

// Is there an injective map of f into the target whose image contains every must point and otherwise uses pool points,
// preserving and reflecting the relations f's signature shares with the target by name?
bool embeds(const FiniteStructure& f, const std::vector<RelationSymbol>& target_sig,
            const std::function<bool(int, const std::vector<int>&)>& target_holds, const std::vector<int>& must,
            const std::vector<int>& pool);

class AgeCapExceeded : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::vector<FiniteStructure> enumerate_age(const AgeSpec& spec, int size, int cap = 6);

// Facts a new point x can carry: unary and loop facts on x alone, and per other point y the binary facts R(x,y)/R(y,x).
struct TypeLayout {
  struct SelfFact {
    int rel;
  };
  struct PairFact {
    int rel;
    bool x_first;
  };
  std::vector<SelfFact> self;
  std::vector<PairFact> pair;

  explicit TypeLayout(const std::vector<RelationSymbol>& sig = {});
  std::size_t size(std::size_t base_size) const { return self.size() + base_size * pair.size(); }
};

// Quantifier-free one-point type over an ordered base; -1 marks an unconstrained fact.
struct OnePointType {
  std::vector<int> base;
  std::vector<std::int8_t> facts;
};

// Structure on base + new point (the last index) for a fully specified type.
FiniteStructure type_structure(const FiniteStructure& base_structure, const TypeLayout& layout,
                               const std::vector<std::int8_t>& facts);

// Facts of span sides are indexed like extension_candidates(signature, base size).
struct AmalgamationSpan {
  FiniteStructure base;
  std::vector<std::int8_t> left, right;
};

struct AmalgamationResult {
  bool verdict = true;
  std::size_t spans_checked = 0;
  std::optional<AmalgamationSpan> counterexample;
};

AmalgamationResult check_amalgamation(const AgeSpec& spec, int size_cap, bool strong);

class InadmissibleType : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct LimitOptions {
  int requirement_cap = 3;  // largest base of a scheduled one-point requirement
  std::uint64_t seed = 1;
};

// Lazily built Fraïssé limit for signatures of arity at most 2.
class LazyLimit {
 public:
  LazyLimit(AgeSpec spec, LimitOptions options = {});

  const AgeSpec& spec() const { return spec_; }
  const TypeLayout& layout() const { return layout_; }
  const LimitOptions& options() const { return options_; }
  int size() const { return n_; }
  int relation_index(const std::string& name) const;

  bool holds(int rel, int a) const;
  bool holds(int rel, int a, int b) const;
  bool holds(int rel, const std::vector<int>& t) const;
  bool rel(const std::string& name, const std::vector<int>& t) const;
  // Fact number j of the layout between x (as the new point) and y, and self fact j of x.
  bool pair_fact(int x, int y, std::size_t j) const { return get_fact_pair(x, y, j); }
  bool self_fact(int x, std::size_t j) const;

  // Adds free points (random facts to everything built) until n exist.
  void ensure(int n);
  // Discharges every scheduled requirement whose base lies below m.
  void saturate(int m);
  std::size_t requirements_processed() const { return processed_; }

  OnePointType blank_type(const std::vector<int>& base) const;
  OnePointType type_of(int q, const std::vector<int>& base) const;
  bool realizes(int q, const OnePointType& t) const;
  std::optional<int> find_realizer(const OnePointType& t, const std::function<bool(int)>& accept = {}) const;
  // Smallest built realizer, else a new point; inadmissible types are refused.
  int realize(const OnePointType& t, const std::function<bool(int)>& accept = {});
  int create_point(const OnePointType& t);
  bool admissible_type(const OnePointType& t);
  // Fully specified admissible fact vectors over base, in mask order.
  const std::vector<std::vector<std::int8_t>>& admissible_full_types(const std::vector<int>& base);
  int add_free_point();

  FiniteStructure induced(const std::vector<int>& points) const;
  std::string serialize() const;

 private:
  struct Cursor {
    int point = -1;  // -1: the empty-base batch
    int subset_size = 0;
    std::vector<int> subset;
    bool started = false;
    std::size_t type_index = 0;
  };

  void append_point();
  void pop_point();
  void set_fact_self(int x, std::size_t self_index, bool v);
  void set_fact_pair(int x, int y, std::size_t pair_index, bool v);
  bool get_fact_pair(int x, int y, std::size_t pair_index) const;
  bool check_with(int x, const std::vector<int>& decided, int newest);
  bool decide_point(int x, const OnePointType& t);
  bool next_requirement(std::vector<int>& base, std::vector<std::int8_t>& facts, int limit_point);
  void process_requirement(const std::vector<int>& base, const std::vector<std::int8_t>& facts);

  AgeSpec spec_;
  LimitOptions options_;
  TypeLayout layout_;
  std::vector<int> rel_arity_;
  std::vector<bool> rel_symmetric_;
  int n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::vector<char>> unary_;                      // per relation
  std::vector<std::vector<std::vector<std::uint64_t>>> bin_;  // per relation, row bitsets
  std::mt19937_64 rng_;
  Cursor cursor_;
  std::size_t processed_ = 0;
  std::map<std::string, std::vector<std::vector<std::int8_t>>> type_cache_;
};

// Closed-form countable random graph: i < j adjacent iff bit i of j is set.
bool rado_adjacent(std::uint64_t i, std::uint64_t j);

// First (subset, pattern) among subsets of 0..window-1 of size <= cap lacking a witness among all built points.
struct ExtensionFailure {
  std::vector<int> subset;
  std::vector<std::int8_t> facts;
};
std::optional<ExtensionFailure> check_extension_property(LazyLimit& limit, int window, int cap);

enum class RichVerdict { Witnessed, NotYetWitnessed };

struct RichDemand {
  std::vector<int> subset;
  int moved = 0;
};

struct RichReport {
  RichVerdict verdict = RichVerdict::Witnessed;
  std::optional<RichDemand> failing;
  std::size_t demands_checked = 0;
};

class RichPartition {
 public:
  RichPartition(const AgeSpec& spec, LimitOptions options = {}, const std::string& unary_name = "U");
  const AgeSpec& base_spec() const { return base_spec_; }
  LazyLimit& limit() { return limit_; }
  const LazyLimit& limit() const { return limit_; }
  int u() const { return u_; }
  bool in_u(int p) const { return limit_.holds(u_, p); }
  RichReport is_rich_upto(bool side, int cap, int window) const;

 private:
  AgeSpec base_spec_;
  LazyLimit limit_;
  int u_;
};

struct JepCounterexample {
  FiniteStructure domain;  // domain points 0..k-1, extra point u = k
  std::vector<int> overlap;
  FiniteStructure images;  // first copy 0..k-1, second copy for non-overlap points after
  std::vector<int> second_copy;  // domain point -> point in images
  // Concrete points in a built limit when the signature allows it.
  std::shared_ptr<LazyLimit> limit;
  std::vector<int> limit_domain, limit_first, limit_second;
  int limit_u = -1;
};

struct JepResult {
  bool verdict = true;
  std::size_t configurations = 0;
  std::optional<JepCounterexample> counterexample;
};

JepResult joint_extension_upto(const AgeSpec& spec, int cap, std::uint64_t seed = 1);

}  // namespace clonekit
