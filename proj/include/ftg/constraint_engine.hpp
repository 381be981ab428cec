#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "ftg/diagnostics.hpp"
#include "ftg/term_store.hpp"
#include "ftg/term_template.hpp"

namespace ftg {

/// `P.synsem.loc.cat.head`: a tag (rule variable) followed by features.
struct PathExpr {
  std::string root;
  std::vector<std::string> features;
  SourceLoc loc;

  bool is_bare_tag() const { return features.empty(); }
};

/// `lhs = rhs` where rhs is another path, a tag or a term.
struct PathEq {
  PathExpr lhs;
  std::variant<PathExpr, TermTemplate> rhs;
};

/// `path :< sort`
struct SortRestrict {
  PathExpr path;
  std::string sort_name;
  SortId sort = SortLattice::top;
};

/// `result = append(first, second)`
struct AppendCall {
  PathExpr result;
  PathExpr first;
  PathExpr second;
};

/// `lmember(features(path), [f1, ...])`, also written `closed sort [f1, ...]`.
struct ClosedFeatures {
  PathExpr path;
  AllowedFeatures allowed;
};

using Goal = std::variant<PathEq, SortRestrict, AppendCall, ClosedFeatures>;

std::string to_string(const PathExpr& p);
std::string to_string(const Goal& g);

/// A sort-guarded active constraint: every node whose sort is at or below
/// `guard` must satisfy `body`, with `var` bound to that node.
struct SortRule {
  std::string name;
  std::string guard_name;
  SortId guard = SortLattice::top;
  std::string var;
  std::vector<Goal> body;
  SourceLoc loc;
};

using RuleSet = std::vector<std::shared_ptr<const SortRule>>;

/// Checks the single left-to-right binding pass: every tag read by a goal
/// must be the rule variable or bound by an earlier (or the same) equality.
/// Returns the first offending tag.
std::optional<std::pair<std::string, SourceLoc>> find_unbound_tag(const SortRule& rule);

class UnboundTagError : public std::invalid_argument {
 public:
  UnboundTagError(std::string tag, SourceLoc loc)
      : std::invalid_argument("tag '" + tag + "' is read before it is bound"), tag_(std::move(tag)), loc_(loc) {}

  const std::string& tag() const noexcept { return tag_; }
  SourceLoc loc() const noexcept { return loc_; }

 private:
  std::string tag_;
  SourceLoc loc_;
};

class FiringBudgetExceeded : public std::runtime_error {
 public:
  explicit FiringBudgetExceeded(std::size_t budget)
      : std::runtime_error("constraint firing budget of " + std::to_string(budget) +
                           " exceeded in a single operation") {}
};

enum class NodeEvent { created, sort_refined, feature_added };

/// Active constraint machinery of a TermStore: rule index, propagation queue,
/// residuated append and the trace stream.
///
/// Rules fire at most once per node (fired sets are unioned on merge). The
/// queue is FIFO and is drained before the triggering top-level operation
/// returns.
class ConstraintEngine {
 public:
  static constexpr std::size_t default_firing_budget = 10000;

  explicit ConstraintEngine(TermStore& store);

  /// Throws UnboundTagError when the body fails binding validation.
  RuleId install_rule(std::shared_ptr<const SortRule> rule);
  void install_rules(const RuleSet& rules);
  const RuleSet& rules() const noexcept { return rules_; }

  void on_node_event(NodeRef n, NodeEvent event);

  /// Marks `rule` fired on `n` and runs its body.
  [[nodiscard]] bool fire_rule(NodeRef n, RuleId rule);

  /// Runs `rule`'s body on `n` as a passive check, outside the fired-set
  /// bookkeeping. Used by generate-and-test evaluation.
  [[nodiscard]] bool apply_rule(NodeRef n, const SortRule& rule);

  /// result = append(first, second); residuates while `first` is not a
  /// determined list.
  [[nodiscard]] bool append(NodeRef result, NodeRef first, NodeRef second);

  std::size_t pending_suspensions() const;
  std::size_t pending_suspensions(NodeRef root) const;

  void set_trace(TraceSink sink) { trace_ = std::move(sink); }
  void set_firing_budget(std::size_t budget) { budget_ = budget; }
  std::size_t firing_budget() const noexcept { return budget_; }

 private:
  friend class TermStore;

  struct Task {
    enum class Kind : std::uint8_t { fire, wake };
    Kind kind;
    std::uint32_t target;  // node index or suspension id
    RuleId rule;
  };

  enum class SpineState { complete, open, broken };

  void begin_operation();
  bool drain();
  void clear();

  const std::vector<RuleId>& matching_rules(SortId sort);
  bool run_body(NodeRef n, const SortRule& rule);
  bool run_goal(const Goal& goal, TagFrame& frame);
  std::optional<NodeRef> eval_path(const PathExpr& p, TagFrame& frame, bool bind_if_free);
  bool append_impl(NodeRef result, NodeRef first, NodeRef second);
  SpineState walk_spine(NodeRef list, std::vector<NodeRef>& cells, NodeRef& open_at) const;
  bool complete_append(NodeRef result, const std::vector<NodeRef>& cells, NodeRef second);
  bool wake(SuspensionId id);
  void emit(const std::string& line) const;

  TermStore& store_;
  RuleSet rules_;
  std::unordered_map<std::uint32_t, std::vector<RuleId>> matching_;
  std::deque<Task> queue_;
  std::unordered_set<SuspensionId> queued_wakes_;
  std::size_t budget_ = default_firing_budget;
  std::size_t fired_this_operation_ = 0;
  TraceSink trace_;
};

/// Generate-and-test evaluation: applies every rule to every reachable node
/// of matching sort after the structure has been built, repeating until no
/// new (node, rule) pair appears. Returns false on the first failing goal.
bool apply_rules_posthoc(TermStore& store, NodeRef root, const RuleSet& rules);

}  // namespace ftg
