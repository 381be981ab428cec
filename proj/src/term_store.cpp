#include "ftg/term_store.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "ftg/constraint_engine.hpp"

namespace ftg {

namespace {

auto feature_lower_bound(FeatureList& list, std::string_view name) {
  return std::lower_bound(list.begin(), list.end(), name,
                          [](const auto& entry, std::string_view key) { return entry.first < key; });
}

auto feature_lower_bound(const FeatureList& list, std::string_view name) {
  return std::lower_bound(list.begin(), list.end(), name,
                          [](const auto& entry, std::string_view key) { return entry.first < key; });
}

}  // namespace

TermStore::TermStore(const SortLattice& lattice)
    : lattice_(&lattice), engine_(std::make_unique<ConstraintEngine>(*this)) {
  if (!lattice.finalized()) throw LatticeError(LatticeError::Kind::not_finalized, "term store needs a finalized lattice");
}

TermStore::~TermStore() = default;

NodeRef TermStore::deref(NodeRef n) const {
  std::uint32_t i = n.index;
  while (nodes_[i].parent != i) i = nodes_[i].parent;
  return NodeRef{i};
}

std::optional<NodeRef> TermStore::feature(NodeRef n, std::string_view name) const {
  const auto& list = features(n);
  auto it = feature_lower_bound(list, name);
  if (it == list.end() || it->first != name) return std::nullopt;
  return it->second;
}

// --- operations --------------------------------------------------------------

bool TermStore::begin_operation() {
  if (!consistent_) return false;
  engine_->begin_operation();
  return true;
}

bool TermStore::finish_operation(bool ok) {
  if (ok) ok = engine_->drain();
  if (!ok) {
    consistent_ = false;
    engine_->clear();
  }
  return ok;
}

void TermStore::abort_operation() {
  consistent_ = false;
  engine_->clear();
}

NodeRef TermStore::new_node_raw(SortId sort) {
  if (sort == SortLattice::bottom) throw BottomSortError();
  auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{index, sort, {}, {}, {}, {}});
  return NodeRef{index};
}

NodeRef TermStore::new_node(SortId sort) {
  NodeRef n = new_node_raw(sort);
  (void)batch([&] {
    engine_->on_node_event(n, NodeEvent::created);
    return true;
  });
  return n;
}

bool TermStore::put_feature(NodeRef n, std::string_view feature, NodeRef value) {
  return batch([&] {
    NodeRef c = deref(n);
    if (auto existing = this->feature(c, feature)) return unify_impl(*existing, value);
    return add_feature(c, feature, value);
  });
}

bool TermStore::unify(NodeRef a, NodeRef b) {
  return batch([&] { return unify_impl(a, b); });
}

bool TermStore::restrict_sort(NodeRef n, SortId sort) {
  return batch([&] {
    NodeRef c = deref(n);
    SortId old = nodes_[c.index].sort;
    SortId meet = lattice_->glb(old, sort);
    if (meet == SortLattice::bottom) {
      ++stats_.unify_failures;
      return false;
    }
    if (meet != old) {
      if (trails_node(c.index)) trail_.push_back({TrailEntry::Kind::sort, c.index, old.value, {}});
      nodes_[c.index].sort = meet;
      engine_->on_node_event(c, NodeEvent::sort_refined);
    }
    return true;
  });
}

std::optional<NodeRef> TermStore::resolve_path(NodeRef n, std::span<const std::string> path, bool create) {
  NodeRef cur = deref(n);
  if (path.empty()) return cur;
  if (!create) {
    for (const auto& f : path) {
      auto next = feature(cur, f);
      if (!next) return std::nullopt;
      cur = deref(*next);
    }
    return cur;
  }
  bool ok = batch([&] {
    for (const auto& f : path) {
      if (auto next = feature(cur, f)) {
        cur = deref(*next);
        continue;
      }
      SortId bound = lattice_->appropriate_bound(nodes_[cur.index].sort, f).value_or(SortLattice::top);
      NodeRef v = new_node(bound);
      if (!add_feature(cur, f, v)) return false;
      cur = deref(v);
    }
    return true;
  });
  if (!ok) return std::nullopt;
  return deref(cur);
}

bool TermStore::add_feature(NodeRef c, std::string_view feature, NodeRef value) {
  auto& list = nodes_[c.index].features;
  auto it = feature_lower_bound(list, feature);
  list.insert(it, {std::string(feature), value});
  if (trails_node(c.index)) trail_.push_back({TrailEntry::Kind::feature, c.index, 0, std::string(feature)});
  if (!check_monitors(c)) return false;
  engine_->on_node_event(c, NodeEvent::feature_added);
  return true;
}

bool TermStore::check_monitors(NodeRef c) {
  const Node& node = nodes_[c.index];
  for (const auto& allowed : node.monitors) {
    for (const auto& [name, value] : node.features) {
      if (std::find(allowed->begin(), allowed->end(), name) == allowed->end()) {
        ++stats_.unify_failures;
        engine_->emit("FAIL goal=closed feature '" + name + "' on #" + std::to_string(c.index));
        return false;
      }
    }
  }
  return true;
}

bool TermStore::unify_impl(NodeRef a, NodeRef b) {
  std::vector<std::pair<NodeRef, NodeRef>> work{{a, b}};
  while (!work.empty()) {
    auto [x, y] = work.back();
    work.pop_back();
    x = deref(x);
    y = deref(y);
    if (x == y) continue;

    SortId sx = nodes_[x.index].sort;
    SortId sy = nodes_[y.index].sort;
    SortId meet = lattice_->glb(sx, sy);
    if (meet == SortLattice::bottom) {
      ++stats_.unify_failures;
      return false;
    }

    // The node with more arcs survives, so fewer arcs move.
    NodeRef winner = x, loser = y;
    if (nodes_[y.index].features.size() > nodes_[x.index].features.size()) std::swap(winner, loser);

    if (trails_node(loser.index)) trail_.push_back({TrailEntry::Kind::parent, loser.index, loser.index, {}});
    nodes_[loser.index].parent = winner.index;

    SortId winner_sort = nodes_[winner.index].sort;
    if (meet != winner_sort) {
      if (trails_node(winner.index)) trail_.push_back({TrailEntry::Kind::sort, winner.index, winner_sort.value, {}});
      nodes_[winner.index].sort = meet;
    }

    bool features_added = false;
    // Copy: add_feature may reallocate nodes_ indirectly through new events.
    FeatureList moved = nodes_[loser.index].features;
    for (auto& [name, value] : moved) {
      auto& list = nodes_[winner.index].features;
      auto it = feature_lower_bound(list, name);
      if (it != list.end() && it->first == name) {
        work.emplace_back(it->second, value);
      } else {
        list.insert(it, {name, value});
        if (trails_node(winner.index)) trail_.push_back({TrailEntry::Kind::feature, winner.index, 0, name});
        features_added = true;
      }
    }
    for (RuleId r : std::vector<RuleId>(nodes_[loser.index].fired)) add_fired(winner, r);
    for (SuspensionId s : std::vector<SuspensionId>(nodes_[loser.index].suspensions)) link_suspension(winner, s);
    for (const auto& m : std::vector<AllowedFeatures>(nodes_[loser.index].monitors)) add_monitor(winner, m);

    if (!check_monitors(winner)) return false;
    if (features_added) engine_->on_node_event(winner, NodeEvent::feature_added);
    engine_->on_node_event(winner, NodeEvent::sort_refined);
  }
  return true;
}

// --- trail --------------------------------------------------------------------

bool TermStore::trails_node(std::uint32_t index) const {
  return !checkpoints_.empty() && index < checkpoints_.back().node_count;
}

bool TermStore::trails_suspension(std::uint32_t index) const {
  return !checkpoints_.empty() && index < checkpoints_.back().suspension_count;
}

void TermStore::add_fired(NodeRef c, RuleId rule) {
  auto& fired = nodes_[c.index].fired;
  if (std::find(fired.begin(), fired.end(), rule) != fired.end()) return;
  fired.push_back(rule);
  if (trails_node(c.index)) trail_.push_back({TrailEntry::Kind::fired, c.index, 0, {}});
}

void TermStore::link_suspension(NodeRef c, SuspensionId id) {
  auto& list = nodes_[c.index].suspensions;
  if (std::find(list.begin(), list.end(), id) != list.end()) return;
  list.push_back(id);
  if (trails_node(c.index)) trail_.push_back({TrailEntry::Kind::suspension_link, c.index, 0, {}});
}

void TermStore::add_monitor(NodeRef c, AllowedFeatures allowed) {
  auto& list = nodes_[c.index].monitors;
  if (std::find(list.begin(), list.end(), allowed) != list.end()) return;
  list.push_back(std::move(allowed));
  if (trails_node(c.index)) trail_.push_back({TrailEntry::Kind::monitor, c.index, 0, {}});
}

void TermStore::set_status(SuspensionId id, Suspension::Status status) {
  auto& s = suspensions_[id];
  if (s.status == status) return;
  if (trails_suspension(id)) trail_.push_back({TrailEntry::Kind::status, id, static_cast<std::uint32_t>(s.status), {}});
  s.status = status;
}

void TermStore::add_watch(SuspensionId id, NodeRef n) {
  suspensions_[id].watched.push_back(n);
  if (trails_suspension(id)) trail_.push_back({TrailEntry::Kind::watch, id, 0, {}});
}

SuspensionId TermStore::new_suspension(Suspension s) {
  suspensions_.push_back(std::move(s));
  ++stats_.suspensions_created;
  return static_cast<SuspensionId>(suspensions_.size() - 1);
}

Checkpoint TermStore::checkpoint() {
  std::uint64_t serial = next_serial_++;
  checkpoints_.push_back({serial, trail_.size(), nodes_.size(), suspensions_.size(), consistent_});
  return Checkpoint(serial);
}

void TermStore::rollback(const Checkpoint& c) {
  if (checkpoints_.empty() || checkpoints_.back().serial != c.serial()) throw NonLifoRollback();
  const CheckpointRecord rec = checkpoints_.back();
  while (trail_.size() > rec.trail_size) {
    TrailEntry& e = trail_.back();
    switch (e.kind) {
      case TrailEntry::Kind::parent:
        nodes_[e.target].parent = e.old;
        break;
      case TrailEntry::Kind::sort:
        nodes_[e.target].sort = SortId{e.old};
        break;
      case TrailEntry::Kind::feature: {
        auto& list = nodes_[e.target].features;
        list.erase(feature_lower_bound(list, e.feature));
        break;
      }
      case TrailEntry::Kind::fired:
        nodes_[e.target].fired.pop_back();
        break;
      case TrailEntry::Kind::suspension_link:
        nodes_[e.target].suspensions.pop_back();
        break;
      case TrailEntry::Kind::monitor:
        nodes_[e.target].monitors.pop_back();
        break;
      case TrailEntry::Kind::status:
        suspensions_[e.target].status = static_cast<Suspension::Status>(e.old);
        break;
      case TrailEntry::Kind::watch:
        suspensions_[e.target].watched.pop_back();
        break;
    }
    trail_.pop_back();
  }
  nodes_.resize(rec.node_count);
  suspensions_.resize(rec.suspension_count);
  consistent_ = rec.consistent;
  engine_->clear();
  checkpoints_.pop_back();
}

void TermStore::commit(const Checkpoint& c) {
  if (checkpoints_.empty() || checkpoints_.back().serial != c.serial()) throw NonLifoRollback();
  checkpoints_.pop_back();
  if (checkpoints_.empty()) trail_.clear();
}

// --- copying ------------------------------------------------------------------

std::optional<NodeRef> TermStore::copy_into(NodeRef n, TermStore& target) const {
  std::vector<NodeRef> order = reachable(n);
  std::unordered_map<std::uint32_t, std::uint32_t> map;
  const std::size_t base = target.nodes_.size();
  for (std::size_t i = 0; i < order.size(); ++i) map.emplace(order[i].index, static_cast<std::uint32_t>(base + i));

  // Snapshot first: target may be this store, and pushing would invalidate references.
  std::vector<std::pair<SortId, FeatureList>> copies;
  copies.reserve(order.size());
  for (NodeRef src : order) {
    FeatureList fl = nodes_[src.index].features;
    for (auto& [name, value] : fl) value = NodeRef{map.at(deref(value).index)};
    copies.emplace_back(nodes_[src.index].sort, std::move(fl));
  }
  for (auto& [sort, fl] : copies) {
    NodeRef fresh = target.new_node_raw(sort);
    target.nodes_[fresh.index].features = std::move(fl);
  }
  NodeRef root{static_cast<std::uint32_t>(base)};
  bool ok = target.batch([&] {
    for (std::size_t i = 0; i < copies.size(); ++i)
      target.engine_->on_node_event(NodeRef{static_cast<std::uint32_t>(base + i)}, NodeEvent::created);
    return true;
  });
  if (!ok) return std::nullopt;
  return target.deref(root);
}

NodeRef TermStore::clone(NodeRef n) {
  // Collect the canonical nodes reachable through arcs and through the
  // frames of sleeping suspensions attached to them.
  std::vector<std::uint32_t> order;
  std::unordered_map<std::uint32_t, std::uint32_t> map;
  std::vector<SuspensionId> susps;
  std::unordered_map<SuspensionId, SuspensionId> susp_map;
  std::vector<std::uint32_t> stack{deref(n).index};
  while (!stack.empty()) {
    std::uint32_t i = stack.back();
    stack.pop_back();
    if (map.contains(i)) continue;
    map.emplace(i, static_cast<std::uint32_t>(nodes_.size() + order.size()));
    order.push_back(i);
    const Node& node = nodes_[i];
    for (auto it = node.features.rbegin(); it != node.features.rend(); ++it) stack.push_back(deref(it->second).index);
    for (SuspensionId s : node.suspensions) {
      const Suspension& sp = suspensions_[s];
      if (sp.status != Suspension::Status::sleeping || susp_map.contains(s)) continue;
      susp_map.emplace(s, 0);
      susps.push_back(s);
      for (NodeRef r : {sp.result, sp.first, sp.second}) stack.push_back(deref(r).index);
      for (NodeRef w : sp.watched) stack.push_back(deref(w).index);
    }
  }

  for (std::size_t k = 0; k < susps.size(); ++k)
    susp_map[susps[k]] = static_cast<SuspensionId>(suspensions_.size() + k);
  auto remap = [&](NodeRef r) { return NodeRef{map.at(deref(r).index)}; };

  std::vector<Node> fresh;
  fresh.reserve(order.size());
  for (std::uint32_t i : order) {
    const Node& src = nodes_[i];
    Node copy{map.at(i), src.sort, src.features, src.fired, {}, src.monitors};
    for (auto& [name, value] : copy.features) value = remap(value);
    for (SuspensionId s : src.suspensions)
      if (auto it = susp_map.find(s); it != susp_map.end()) copy.suspensions.push_back(it->second);
    fresh.push_back(std::move(copy));
  }
  std::vector<Suspension> fresh_susps;
  for (SuspensionId s : susps) {
    const Suspension& sp = suspensions_[s];
    Suspension copy{remap(sp.result), remap(sp.first), remap(sp.second), {}, Suspension::Status::sleeping};
    for (NodeRef w : sp.watched) copy.watched.push_back(remap(w));
    fresh_susps.push_back(std::move(copy));
  }
  for (auto& node : fresh) nodes_.push_back(std::move(node));
  for (auto& s : fresh_susps) suspensions_.push_back(std::move(s));
  return NodeRef{map.at(deref(n).index)};
}

// --- inspection -----------------------------------------------------------------

std::vector<NodeRef> TermStore::reachable(NodeRef root) const {
  std::vector<NodeRef> out;
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<std::uint32_t> stack{deref(root).index};
  while (!stack.empty()) {
    std::uint32_t i = stack.back();
    stack.pop_back();
    if (seen[i]) continue;
    seen[i] = true;
    out.push_back(NodeRef{i});
    const auto& fl = nodes_[i].features;
    for (auto it = fl.rbegin(); it != fl.rend(); ++it) {
      std::uint32_t j = deref(it->second).index;
      if (!seen[j]) stack.push_back(j);
    }
  }
  return out;
}

std::string TermStore::debug_state() const {
  std::ostringstream out;
  out << "consistent=" << consistent_ << '\n';
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    out << '#' << i << " p=" << n.parent << " s=" << lattice_->name(n.sort) << " {";
    for (const auto& [name, value] : n.features) out << name << ':' << value.index << ' ';
    out << "} fired=[";
    for (RuleId r : n.fired) out << r << ' ';
    out << "] susp=[";
    for (SuspensionId s : n.suspensions) out << s << ' ';
    out << "] mon=" << n.monitors.size() << '\n';
  }
  for (std::size_t i = 0; i < suspensions_.size(); ++i) {
    const Suspension& s = suspensions_[i];
    out << 's' << i << ' ' << static_cast<int>(s.status) << ' ' << s.result.index << ' ' << s.first.index << ' '
        << s.second.index << " w=[";
    for (NodeRef w : s.watched) out << w.index << ' ';
    out << "]\n";
  }
  return out.str();
}

bool isomorphic(const TermStore& sa, NodeRef a, const TermStore& sb, NodeRef b) {
  std::unordered_map<std::uint32_t, std::uint32_t> forward, backward;
  std::vector<std::pair<NodeRef, NodeRef>> stack{{sa.deref(a), sb.deref(b)}};
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    x = sa.deref(x);
    y = sb.deref(y);
    auto f = forward.find(x.index);
    auto r = backward.find(y.index);
    if (f != forward.end() || r != backward.end()) {
      if (f == forward.end() || r == backward.end() || f->second != y.index || r->second != x.index) return false;
      continue;
    }
    forward.emplace(x.index, y.index);
    backward.emplace(y.index, x.index);
    if (sa.lattice().name(sa.sort(x)) != sb.lattice().name(sb.sort(y))) return false;
    const auto& fx = sa.features(x);
    const auto& fy = sb.features(y);
    if (fx.size() != fy.size()) return false;
    for (std::size_t i = 0; i < fx.size(); ++i) {
      if (fx[i].first != fy[i].first) return false;
      stack.emplace_back(fx[i].second, fy[i].second);
    }
  }
  return true;
}

}  // namespace ftg
