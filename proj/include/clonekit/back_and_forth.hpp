#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "clonekit/fraisse.hpp"

namespace clonekit {

// Finite injective map between built points, kept in insertion order.
class PartialIso {
 public:
  PartialIso() = default;
  PartialIso(std::initializer_list<std::pair<int, int>> pairs);

  bool in_domain(int x) const { return fwd_.count(x) > 0; }
  bool in_image(int y) const { return bwd_.count(y) > 0; }
  int at(int x) const;
  int inverse(int y) const;
  std::optional<int> find(int x) const;
  void add(int x, int y);
  std::size_t size() const { return dom_.size(); }
  const std::vector<int>& domain() const { return dom_; }
  const std::vector<int>& image() const { return img_; }

 private:
  std::vector<int> dom_, img_;
  std::unordered_map<int, int> fwd_, bwd_;
};

// Raised in built-only mode when a step needs a point the limit does not have yet.
class NeedsGrowth : public std::runtime_error {
 public:
  explicit NeedsGrowth(int demanded) : std::runtime_error("limit must grow to " + std::to_string(demanded) + " points"), demanded_size(demanded) {}
  int demanded_size;
};

class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A self-embedding f of the base structure onto the U side of a rich partition, built by back and forth on demand.
class EmbeddingOracle {
 public:
  enum class Mode { Grow, BuiltOnly };

  explicit EmbeddingOracle(RichPartition world);

  RichPartition& world() { return world_; }
  LazyLimit& limit() { return world_.limit(); }
  const LazyLimit& limit() const { return world_.limit(); }
  bool in_image(int y) const { return world_.in_u(y); }

  int f(int x);
  int f_inverse(int y);
  const PartialIso& graph() const { return f_; }

  // Does p extend by x -> y to a partial isomorphism of the base structure (U ignored)?
  bool compatible(const PartialIso& p, int x, int y) const;
  bool is_partial_iso(const PartialIso& p) const;
  // Type over base copying model's base-signature type over model_base; U membership 1, 0 or -1 (free).
  OnePointType type_like(int model, const std::vector<int>& model_base, const std::vector<int>& base, int u_value) const;
  int realize(const OnePointType& t, const std::function<bool(int)>& accept = {});
  // Smallest built point outside the predicate, growing the limit if allowed.
  int smallest_outside(const std::function<bool(int)>& taken);

  Mode mode = Mode::Grow;

 private:
  RichPartition world_;
  PartialIso f_;
  std::size_t u_slot_ = 0;
};

struct StepRecord {
  std::string kind;
  std::vector<int> points;
};

// Partial isomorphisms a, b with a f b = f on Dom(b), extended one point at a time.
class ExtensionState {
 public:
  ExtensionState(EmbeddingOracle& oracle, PartialIso a = {}, PartialIso b = {});

  bool extend_b_domain(int u);
  bool extend_b_image(int v);
  bool extend_a_domain(int s);
  bool extend_a_image(int t);

  // Name of the first violated invariant, if any.
  std::optional<std::string> violated_invariant();
  const PartialIso& a() const { return a_; }
  const PartialIso& b() const { return b_; }
  const std::vector<StepRecord>& log() const { return log_; }
  EmbeddingOracle& oracle() { return *oracle_; }

 private:
  void commit(const StepRecord& r);

  EmbeddingOracle* oracle_;
  PartialIso a_, b_;
  std::vector<StepRecord> log_;
};

struct ExtensionRun {
  PartialIso alpha, beta;
  std::size_t steps = 0;
};

// Puts every support point into Dom(a), Im(a), Dom(b) and Im(b), then runs extra round-robin steps on the smallest
// uncovered points.
ExtensionRun run_extension(ExtensionState& state, const std::vector<int>& support, std::size_t extra_steps = 0);

struct RecoveryBudget {
  std::size_t pairs = 40;
  int window = 32;
  std::size_t steps = 0;  // extra round-robin steps per constructed pair or triple
};

struct SeparatingRun {
  int target = -1;               // the candidate the seed was built to move
  PartialIso alpha, alpha2, beta;  // alpha2 is empty for pairs
};

struct Recovery {
  std::optional<int> value;
  std::vector<int> survivors;  // candidates in the window no run has eliminated
  std::vector<SeparatingRun> certificate;
};

Recovery recover_value(EmbeddingOracle& oracle, int u, const RecoveryBudget& budget);

enum class TuKind { BDomain, ADomain, GrowB, GrowA, EnrichImageB, EnrichImageA, EnrichB, EnrichA };
constexpr std::size_t kTuKinds = 8;
std::string tu_kind_name(TuKind k);

// Richness demand: some point of the target set outside X realizes the type over X.
struct RichnessDemand {
  std::vector<int> x;
  std::vector<std::int8_t> facts;  // layout order over x, U left free
  std::size_t enqueued_at = 0;
  std::optional<std::size_t> discharged_at;
  bool by_extension = false;
};

enum class DemandQueue { ImageB, SetB, ImageA1, SetA1, ImageA2, SetA2 };
constexpr std::size_t kDemandQueues = 6;

class TuState {
 public:
  TuState(EmbeddingOracle& oracle, PartialIso a1 = {}, PartialIso a2 = {}, PartialIso b = {}, int richness_cap = 3);

  void step(TuKind k);
  bool extend_b_domain(int u);
  bool extend_a_domain(int s);
  void grow_b();
  void grow_a();
  // Each enrichment discharges satisfied demands at the queue head, then serves the first unsatisfied one.
  void enrich(DemandQueue q);
  // Serves every demand enqueued before the given step number.
  void settle(std::size_t before_step);

  std::optional<std::string> violated_invariant();
  const PartialIso& a1() const { return a1_; }
  const PartialIso& a2() const { return a2_; }
  const PartialIso& b() const { return b_; }
  const std::vector<int>& set_a1() const { return A1_.items; }
  const std::vector<int>& set_a2() const { return A2_.items; }
  const std::vector<int>& set_b() const { return B_.items; }
  const std::vector<StepRecord>& log() const { return log_; }
  std::size_t step_count() const { return log_.size(); }
  const std::vector<RichnessDemand>& demands(DemandQueue q) const { return queues_[static_cast<std::size_t>(q)].items; }
  std::size_t pending(DemandQueue q) const;
  const std::array<std::size_t, kTuKinds>& kind_counts() const { return kind_counts_; }
  EmbeddingOracle& oracle() { return *oracle_; }

 private:
  struct PointSet {
    std::vector<int> items;
    std::unordered_set<int> members;
    bool has(int p) const { return members.count(p) > 0; }
    void add(int p) {
      if (members.insert(p).second) items.push_back(p);
    }
  };
  struct Queue {
    std::vector<RichnessDemand> items;
    std::size_t head = 0;
  };

  bool demand_satisfied(DemandQueue q, const RichnessDemand& d) const;
  void serve(DemandQueue q, const RichnessDemand& d);
  void record(const std::string& kind, std::vector<int> points);
  void enqueue_for(int family, int point);  // family 0: Im(b)+B, 1: Im(a1)+A1, 2: Im(a2)+A2
  bool in_family(int family, int p) const;
  const std::vector<std::vector<std::int8_t>>& tau_types(const std::vector<int>& x);
  int jep_image(int source);
  int choose_with_fresh_image(const OnePointType& t, const std::function<bool(int)>& accept);
  void add_b(int u, int v);
  void add_a1(int s, int t);
  void add_a2(int s, int t);

  EmbeddingOracle* oracle_;
  PartialIso a1_, a2_, b_;
  PointSet A1_, A2_, B_;
  int cap_;
  std::vector<StepRecord> log_;
  std::array<Queue, kDemandQueues> queues_;
  std::array<std::size_t, kTuKinds> kind_counts_{};
  std::map<std::string, std::vector<std::vector<std::int8_t>>> tau_cache_;
};

struct TuRun {
  PartialIso alpha1, alpha2, beta;
  std::size_t steps = 0;
  std::array<std::size_t, kDemandQueues> discharged{}, pending{};
};

// Targeted phase on support, then round-robin over the eight kinds, then settlement of demands enqueued so far.
TuRun run_tu(TuState& state, const std::vector<int>& support, std::size_t round_robin_steps, bool settle = true);

class JepRefused : public std::invalid_argument {
 public:
  JepRefused(const std::string& what, JepCounterexample ce) : std::invalid_argument(what), counterexample(std::move(ce)) {}
  JepCounterexample counterexample;
};

Recovery recover_value_via_triples(EmbeddingOracle& oracle, int u, const RecoveryBudget& budget);

}  // namespace clonekit
