#include "ftg/constraint_engine.hpp"

#include <algorithm>
#include <set>

namespace ftg {

namespace {

bool contains(std::span<const RuleId> ids, RuleId id) { return std::find(ids.begin(), ids.end(), id) != ids.end(); }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void collect_tags(const TermTemplate& t, std::set<std::string, std::less<>>& out) {
  if (!t.tag.empty()) out.insert(t.tag);
  for (const auto& [name, child] : t.features) collect_tags(child, out);
}

}  // namespace

std::string to_string(const PathExpr& p) {
  std::string out = p.root;
  for (const auto& f : p.features) out += "." + f;
  return out;
}

std::string to_string(const Goal& g) {
  return std::visit(overloaded{
                        [](const PathEq& eq) {
                          std::string rhs = std::holds_alternative<PathExpr>(eq.rhs)
                                                ? to_string(std::get<PathExpr>(eq.rhs))
                                                : to_string(std::get<TermTemplate>(eq.rhs));
                          return to_string(eq.lhs) + " = " + rhs;
                        },
                        [](const SortRestrict& r) { return to_string(r.path) + " :< " + r.sort_name; },
                        [](const AppendCall& a) {
                          return to_string(a.result) + " = append(" + to_string(a.first) + ", " +
                                 to_string(a.second) + ")";
                        },
                        [](const ClosedFeatures& c) {
                          std::string out = "lmember(features(" + to_string(c.path) + "), [";
                          for (std::size_t i = 0; i < c.allowed->size(); ++i) out += (i ? ", " : "") + (*c.allowed)[i];
                          return out + "])";
                        },
                    },
                    g);
}

std::optional<std::pair<std::string, SourceLoc>> find_unbound_tag(const SortRule& rule) {
  std::set<std::string, std::less<>> bound{rule.var};
  auto read = [&](const PathExpr& p) -> std::optional<std::pair<std::string, SourceLoc>> {
    if (bound.contains(p.root)) return std::nullopt;
    return std::pair{p.root, p.loc};
  };
  for (const Goal& goal : rule.body) {
    std::optional<std::pair<std::string, SourceLoc>> bad;
    std::visit(overloaded{
                   [&](const PathEq& eq) {
                     if (!eq.lhs.is_bare_tag()) bad = read(eq.lhs);
                     if (const auto* rhs = std::get_if<PathExpr>(&eq.rhs)) {
                       if (!rhs->is_bare_tag() && !bad) bad = read(*rhs);
                       if (!bad) bound.insert(rhs->root);
                     } else {
                       collect_tags(std::get<TermTemplate>(eq.rhs), bound);
                     }
                     if (!bad) bound.insert(eq.lhs.root);
                   },
                   [&](const SortRestrict& r) { bad = read(r.path); },
                   [&](const AppendCall& a) {
                     if (!a.result.is_bare_tag()) bad = read(a.result);
                     if (!bad) bad = read(a.first);
                     if (!bad) bad = read(a.second);
                     if (!bad) bound.insert(a.result.root);
                   },
                   [&](const ClosedFeatures& c) { bad = read(c.path); },
               },
               goal);
    if (bad) return bad;
  }
  return std::nullopt;
}

ConstraintEngine::ConstraintEngine(TermStore& store) : store_(store) {}

RuleId ConstraintEngine::install_rule(std::shared_ptr<const SortRule> rule) {
  if (auto bad = find_unbound_tag(*rule)) throw UnboundTagError(bad->first, bad->second);
  rules_.push_back(std::move(rule));
  matching_.clear();
  return static_cast<RuleId>(rules_.size() - 1);
}

void ConstraintEngine::install_rules(const RuleSet& rules) {
  for (const auto& r : rules) install_rule(r);
}

const std::vector<RuleId>& ConstraintEngine::matching_rules(SortId sort) {
  auto [it, inserted] = matching_.try_emplace(sort.value);
  if (inserted) {
    for (RuleId r = 0; r < rules_.size(); ++r)
      if (store_.lattice().leq(sort, rules_[r]->guard)) it->second.push_back(r);
  }
  return it->second;
}

void ConstraintEngine::on_node_event(NodeRef n, NodeEvent event) {
  NodeRef c = store_.deref(n);
  if (event != NodeEvent::feature_added && !rules_.empty()) {
    const auto& matching = matching_rules(store_.nodes_[c.index].sort);
    for (RuleId r : matching)
      if (!contains(store_.nodes_[c.index].fired, r)) queue_.push_back({Task::Kind::fire, c.index, r});
  }
  if (event != NodeEvent::created) {
    for (SuspensionId s : store_.nodes_[c.index].suspensions) {
      if (store_.suspensions_[s].status != Suspension::Status::sleeping) continue;
      if (queued_wakes_.insert(s).second) queue_.push_back({Task::Kind::wake, s, 0});
    }
  }
}

void ConstraintEngine::begin_operation() { fired_this_operation_ = 0; }

void ConstraintEngine::clear() {
  queue_.clear();
  queued_wakes_.clear();
}

bool ConstraintEngine::drain() {
  while (!queue_.empty()) {
    Task task = queue_.front();
    queue_.pop_front();
    if (task.kind == Task::Kind::fire) {
      NodeRef c = store_.deref(NodeRef{task.target});
      if (contains(store_.fired(c), task.rule)) continue;
      if (!fire_rule(c, task.rule)) return false;
    } else {
      queued_wakes_.erase(task.target);
      if (!wake(task.target)) return false;
    }
  }
  return true;
}

void ConstraintEngine::emit(const std::string& line) const {
  if (trace_) trace_(line);
}

bool ConstraintEngine::fire_rule(NodeRef n, RuleId rule) {
  return store_.batch([&] {
    NodeRef c = store_.deref(n);
    if (++fired_this_operation_ > budget_) throw FiringBudgetExceeded(budget_);
    store_.add_fired(c, rule);
    ++store_.stats_.firings;
    const SortRule& r = *rules_.at(rule);
    emit("FIRE rule=" + r.name + " node=#" + std::to_string(c.index));
    return run_body(c, r);
  });
}

bool ConstraintEngine::apply_rule(NodeRef n, const SortRule& rule) {
  return store_.batch([&] {
    NodeRef c = store_.deref(n);
    if (++fired_this_operation_ > budget_) throw FiringBudgetExceeded(budget_);
    ++store_.stats_.firings;
    emit("FIRE rule=" + rule.name + " node=#" + std::to_string(c.index));
    return run_body(c, rule);
  });
}

bool ConstraintEngine::run_body(NodeRef n, const SortRule& rule) {
  TagFrame frame{{rule.var, n}};
  for (const Goal& goal : rule.body) {
    if (!run_goal(goal, frame)) {
      emit("FAIL goal=" + to_string(goal));
      return false;
    }
  }
  return true;
}

std::optional<NodeRef> ConstraintEngine::eval_path(const PathExpr& p, TagFrame& frame, bool bind_if_free) {
  auto it = frame.find(p.root);
  if (it == frame.end()) {
    if (!bind_if_free || !p.is_bare_tag()) throw UnboundTagError(p.root, p.loc);
    NodeRef fresh = store_.new_node(SortLattice::top);
    frame.emplace(p.root, fresh);
    return fresh;
  }
  return store_.resolve_path(it->second, p.features, true);
}

bool ConstraintEngine::run_goal(const Goal& goal, TagFrame& frame) {
  return std::visit(
      overloaded{
          [&](const PathEq& eq) -> bool {
            const bool lhs_free = eq.lhs.is_bare_tag() && !frame.contains(eq.lhs.root);
            std::optional<NodeRef> lhs;
            if (!lhs_free) {
              lhs = eval_path(eq.lhs, frame, false);
              if (!lhs) return false;
            }
            std::optional<NodeRef> rhs;
            if (const auto* path = std::get_if<PathExpr>(&eq.rhs)) {
              if (lhs && path->is_bare_tag() && !frame.contains(path->root)) {
                frame.emplace(path->root, *lhs);
                return true;
              }
              rhs = eval_path(*path, frame, true);
            } else {
              rhs = instantiate(store_, std::get<TermTemplate>(eq.rhs), frame);
            }
            if (!rhs) return false;
            if (lhs_free) {
              frame.emplace(eq.lhs.root, *rhs);
              return true;
            }
            return store_.unify(*lhs, *rhs);
          },
          [&](const SortRestrict& r) -> bool {
            auto node = eval_path(r.path, frame, false);
            return node && store_.restrict_sort(*node, r.sort);
          },
          [&](const AppendCall& a) -> bool {
            auto result = eval_path(a.result, frame, true);
            if (!result) return false;
            auto first = eval_path(a.first, frame, false);
            if (!first) return false;
            auto second = eval_path(a.second, frame, false);
            if (!second) return false;
            return append_impl(*result, *first, *second);
          },
          [&](const ClosedFeatures& c) -> bool {
            auto node = eval_path(c.path, frame, false);
            if (!node) return false;
            NodeRef canonical = store_.deref(*node);
            store_.add_monitor(canonical, c.allowed);
            return store_.check_monitors(canonical);
          },
      },
      goal);
}

// --- residuated append --------------------------------------------------------

ConstraintEngine::SpineState ConstraintEngine::walk_spine(NodeRef list, std::vector<NodeRef>& cells,
                                                          NodeRef& open_at) const {
  const SortLattice& lat = store_.lattice();
  std::unordered_set<std::uint32_t> seen;
  NodeRef cur = store_.deref(list);
  while (true) {
    if (!seen.insert(cur.index).second) return SpineState::broken;  // cyclic spine
    SortId s = store_.sort(cur);
    if (lat.leq(s, SortLattice::elist)) return SpineState::complete;
    if (lat.leq(s, SortLattice::nelist)) {
      cells.push_back(cur);
      auto rest = store_.feature(cur, "rest");
      if (!rest) {
        open_at = cur;
        return SpineState::open;
      }
      cur = store_.deref(*rest);
      continue;
    }
    if (lat.glb(s, SortLattice::list) == SortLattice::bottom) return SpineState::broken;
    open_at = cur;
    return SpineState::open;
  }
}

bool ConstraintEngine::complete_append(NodeRef result, const std::vector<NodeRef>& cells, NodeRef second) {
  if (cells.empty()) return store_.unify(result, second);
  static const std::string first_feature[] = {"first"};
  NodeRef head = store_.new_node(SortLattice::nelist);
  NodeRef cur = head;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto element = store_.resolve_path(cells[i], first_feature, true);
    if (!element || !store_.put_feature(cur, "first", *element)) return false;
    NodeRef next = i + 1 < cells.size() ? store_.new_node(SortLattice::nelist) : second;
    if (!store_.put_feature(cur, "rest", next)) return false;
    cur = next;
  }
  return store_.unify(result, head);
}

bool ConstraintEngine::append(NodeRef result, NodeRef first, NodeRef second) {
  return store_.batch([&] { return append_impl(result, first, second); });
}

bool ConstraintEngine::append_impl(NodeRef result, NodeRef first, NodeRef second) {
  std::vector<NodeRef> cells;
  NodeRef open_at{};
  switch (walk_spine(first, cells, open_at)) {
    case SpineState::broken:
      return false;
    case SpineState::complete:
      return complete_append(result, cells, second);
    case SpineState::open:
      break;
  }
  SuspensionId id = store_.new_suspension(Suspension{result, first, second, {}, Suspension::Status::sleeping});
  cells.push_back(open_at);
  for (NodeRef c : cells) {
    c = store_.deref(c);
    auto& watched = store_.suspensions_[id].watched;
    if (std::find(watched.begin(), watched.end(), c) != watched.end()) continue;
    watched.push_back(c);
    store_.link_suspension(c, id);
  }
  emit("SUSPEND append id=s" + std::to_string(id));
  return true;
}

bool ConstraintEngine::wake(SuspensionId id) {
  if (store_.suspensions_[id].status != Suspension::Status::sleeping) return true;
  ++store_.stats_.wakes;
  emit("WAKE id=s" + std::to_string(id));
  const NodeRef result = store_.suspensions_[id].result;
  const NodeRef first = store_.suspensions_[id].first;
  const NodeRef second = store_.suspensions_[id].second;
  std::vector<NodeRef> cells;
  NodeRef open_at{};
  switch (walk_spine(first, cells, open_at)) {
    case SpineState::broken:
      store_.set_status(id, Suspension::Status::dead);
      return false;
    case SpineState::complete:
      store_.set_status(id, Suspension::Status::done);
      return complete_append(result, cells, second);
    case SpineState::open:
      break;
  }
  // Extend the watch set over the newly known prefix.
  cells.push_back(open_at);
  for (NodeRef c : cells) {
    c = store_.deref(c);
    const auto& watched = store_.suspensions_[id].watched;
    bool known = std::any_of(watched.begin(), watched.end(), [&](NodeRef w) { return store_.deref(w) == c; });
    if (known) continue;
    store_.add_watch(id, c);
    store_.link_suspension(c, id);
  }
  return true;
}

std::size_t ConstraintEngine::pending_suspensions() const {
  return static_cast<std::size_t>(std::count_if(store_.suspensions_.begin(), store_.suspensions_.end(), [](const Suspension& s) {
    return s.status == Suspension::Status::sleeping;
  }));
}

std::size_t ConstraintEngine::pending_suspensions(NodeRef root) const {
  std::set<SuspensionId> pending;
  for (NodeRef n : store_.reachable(root))
    for (SuspensionId s : store_.suspensions_on(n))
      if (store_.suspension(s).status == Suspension::Status::sleeping) pending.insert(s);
  return pending.size();
}

// --- generate-and-test ----------------------------------------------------------

bool apply_rules_posthoc(TermStore& store, NodeRef root, const RuleSet& rules) {
  const SortLattice& lat = store.lattice();
  const std::size_t cap = store.engine().firing_budget();
  std::set<std::pair<std::uint32_t, std::size_t>> applied;
  bool progress = true;
  while (progress) {
    progress = false;
    for (NodeRef m : store.reachable(root)) {
      for (std::size_t r = 0; r < rules.size(); ++r) {
        NodeRef c = store.deref(m);
        if (!lat.leq(store.sort(c), rules[r]->guard)) continue;
        if (!applied.emplace(c.index, r).second) continue;
        if (applied.size() > cap) throw FiringBudgetExceeded(cap);
        progress = true;
        if (!store.engine().apply_rule(c, *rules[r])) return false;
      }
    }
  }
  return true;
}

}  // namespace ftg
