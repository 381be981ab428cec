#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ftg/sort_lattice.hpp"

namespace ftg {

/// Handle to a node of a TermStore. Handles stay valid across unification;
/// use TermStore::deref() to reach the canonical representative.
struct NodeRef {
  std::uint32_t index = 0;

  friend constexpr bool operator==(NodeRef, NodeRef) = default;
  friend constexpr auto operator<=>(NodeRef, NodeRef) = default;
};

using FeatureList = std::vector<std::pair<std::string, NodeRef>>;  // sorted by feature name
using AllowedFeatures = std::shared_ptr<const std::vector<std::string>>;
using RuleId = std::uint32_t;
using SuspensionId = std::uint32_t;
using TraceSink = std::function<void(std::string_view)>;

class ConstraintEngine;

class BottomSortError : public std::invalid_argument {
 public:
  BottomSortError() : std::invalid_argument("cannot create a node of the failure sort") {}
};

class NonLifoRollback : public std::logic_error {
 public:
  NonLifoRollback() : std::logic_error("checkpoints must be closed in LIFO order") {}
};

/// Residuated append(first, second) = result, waiting for `first` to become
/// a determined list.
struct Suspension {
  enum class Status : std::uint8_t { sleeping, done, dead };

  NodeRef result;
  NodeRef first;
  NodeRef second;
  std::vector<NodeRef> watched;
  Status status = Status::sleeping;
};

/// Instrumentation counters. They are not part of the undoable state.
struct StoreStats {
  std::uint64_t firings = 0;
  std::uint64_t suspensions_created = 0;
  std::uint64_t wakes = 0;
  std::uint64_t unify_failures = 0;
};

class Checkpoint {
 public:
  std::uint64_t serial() const noexcept { return serial_; }

 private:
  friend class TermStore;
  explicit Checkpoint(std::uint64_t serial) : serial_(serial) {}
  std::uint64_t serial_;
};

/// Graph of order-sorted feature terms with union-find coreference,
/// order-sorted unification and trail-based checkpoints.
///
/// Every mutating operation runs as one top-level operation: constraint
/// propagation triggered by it is drained to a fixpoint before it returns.
/// A failed operation leaves the store inconsistent; every later mutation
/// fails until rollback() restores a checkpoint.
///
/// Graphs may be cyclic. There is no occurs check.
class TermStore {
 public:
  explicit TermStore(const SortLattice& lattice);
  ~TermStore();
  TermStore(const TermStore&) = delete;
  TermStore& operator=(const TermStore&) = delete;

  const SortLattice& lattice() const noexcept { return *lattice_; }
  ConstraintEngine& engine() noexcept { return *engine_; }
  const ConstraintEngine& engine() const noexcept { return *engine_; }

  /// Throws BottomSortError for the failure sort. Constraint failures
  /// triggered by the new node are reported through consistent().
  NodeRef new_node(SortId sort);
  [[nodiscard]] bool put_feature(NodeRef n, std::string_view feature, NodeRef value);
  [[nodiscard]] bool unify(NodeRef a, NodeRef b);
  [[nodiscard]] bool restrict_sort(NodeRef n, SortId sort);

  /// Walks `path` from `n`. With `create`, missing arcs get fresh nodes sorted
  /// by their appropriateness bound (or top); nullopt then means failure.
  /// Without `create`, nullopt means a missing arc.
  std::optional<NodeRef> resolve_path(NodeRef n, std::span<const std::string> path, bool create);

  Checkpoint checkpoint();
  void rollback(const Checkpoint& c);
  void commit(const Checkpoint& c);
  std::size_t open_checkpoints() const noexcept { return checkpoints_.size(); }

  /// Structure-preserving copy into `target` (which may be this store).
  /// Fired sets start empty so the target's rules fire on every copied node.
  std::optional<NodeRef> copy_into(NodeRef n, TermStore& target) const;

  /// Copy within this store that keeps fired sets, closed-feature monitors and
  /// sleeping suspensions, so the copy is as constrained as the original.
  /// No events are emitted.
  NodeRef clone(NodeRef n);

  /// Runs `body` as a single top-level operation.
  template <class F>
  bool batch(F&& body);

  bool consistent() const noexcept { return consistent_; }

  NodeRef deref(NodeRef n) const;
  SortId sort(NodeRef n) const { return nodes_[deref(n).index].sort; }
  const FeatureList& features(NodeRef n) const { return nodes_[deref(n).index].features; }
  std::optional<NodeRef> feature(NodeRef n, std::string_view name) const;
  std::span<const RuleId> fired(NodeRef n) const { return nodes_[deref(n).index].fired; }
  std::span<const SuspensionId> suspensions_on(NodeRef n) const { return nodes_[deref(n).index].suspensions; }
  std::span<const AllowedFeatures> monitors(NodeRef n) const { return nodes_[deref(n).index].monitors; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  const Suspension& suspension(SuspensionId id) const { return suspensions_.at(id); }
  std::size_t suspension_count() const noexcept { return suspensions_.size(); }

  /// Canonical nodes reachable from `root`, in depth-first preorder with
  /// features visited in name order.
  std::vector<NodeRef> reachable(NodeRef root) const;

  const StoreStats& stats() const noexcept { return stats_; }

  /// Full dump of the undoable state, for tests.
  std::string debug_state() const;

 private:
  friend class ConstraintEngine;

  struct Node {
    std::uint32_t parent;
    SortId sort;
    FeatureList features;
    std::vector<RuleId> fired;
    std::vector<SuspensionId> suspensions;
    std::vector<AllowedFeatures> monitors;
  };

  struct TrailEntry {
    enum class Kind : std::uint8_t { parent, sort, feature, fired, suspension_link, monitor, status, watch };
    Kind kind;
    std::uint32_t target;
    std::uint32_t old = 0;
    std::string feature;
  };

  struct CheckpointRecord {
    std::uint64_t serial;
    std::size_t trail_size;
    std::size_t node_count;
    std::size_t suspension_count;
    bool consistent;
  };

  bool begin_operation();
  bool finish_operation(bool ok);
  void abort_operation();

  NodeRef new_node_raw(SortId sort);
  bool unify_impl(NodeRef a, NodeRef b);
  bool add_feature(NodeRef canonical, std::string_view feature, NodeRef value);
  bool check_monitors(NodeRef canonical);

  bool trails_node(std::uint32_t index) const;
  bool trails_suspension(std::uint32_t index) const;
  void add_fired(NodeRef canonical, RuleId rule);
  void link_suspension(NodeRef canonical, SuspensionId id);
  void add_monitor(NodeRef canonical, AllowedFeatures allowed);
  void set_status(SuspensionId id, Suspension::Status status);
  void add_watch(SuspensionId id, NodeRef n);
  SuspensionId new_suspension(Suspension s);

  const SortLattice* lattice_;
  std::unique_ptr<ConstraintEngine> engine_;
  std::vector<Node> nodes_;
  std::vector<Suspension> suspensions_;
  std::vector<TrailEntry> trail_;
  std::vector<CheckpointRecord> checkpoints_;
  std::uint64_t next_serial_ = 1;
  int depth_ = 0;
  bool consistent_ = true;
  StoreStats stats_;
};

template <class F>
bool TermStore::batch(F&& body) {
  const bool outer = depth_ == 0;
  if (outer && !begin_operation()) return false;
  ++depth_;
  bool ok = false;
  try {
    ok = body();
    if (outer) ok = finish_operation(ok);
  } catch (...) {
    --depth_;
    if (outer) abort_operation();
    throw;
  }
  --depth_;
  return ok;
}

/// Graph isomorphism respecting sort names, feature names and reentrancy.
/// The two nodes may live in different stores.
bool isomorphic(const TermStore& sa, NodeRef a, const TermStore& sb, NodeRef b);
inline bool isomorphic(const TermStore& s, NodeRef a, NodeRef b) { return isomorphic(s, a, s, b); }

}  // namespace ftg
