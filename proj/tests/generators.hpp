#pragma once

// Random inputs shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "ftg/constraint_engine.hpp"
#include "ftg/grammar.hpp"
#include "ftg/sort_lattice.hpp"
#include "ftg/term_store.hpp"
#include "oracles/lattice_oracle.hpp"
#include "oracles/ref_unifier.hpp"
#include "test_util.hpp"

namespace gen {

inline std::string sort_name(std::size_t i) { return "s" + std::to_string(i); }

// Mostly tree-shaped DAGs with occasional second parents; edges go from a
// higher index to a lower one so the graph is acyclic.
inline oracle::Dag random_dag(std::mt19937& rng, std::size_t max_sorts = 40) {
  oracle::Dag d;
  d.n = std::uniform_int_distribution<std::size_t>(2, max_sorts)(rng);
  std::bernoulli_distribution extra(0.15);
  for (std::size_t c = 1; c < d.n; ++c) {
    std::uniform_int_distribution<std::size_t> pick(0, c - 1);
    if (std::bernoulli_distribution(0.85)(rng)) d.edges.emplace_back(c, pick(rng));
    if (extra(rng)) d.edges.emplace_back(c, pick(rng));
  }
  return d;
}

inline ftg::SortLattice build_lattice(const oracle::Dag& d) {
  ftg::SortLattice l;
  for (std::size_t i = 0; i < d.n; ++i) l.intern(sort_name(i));
  for (auto [c, p] : d.edges) l.declare_subsort(sort_name(c), sort_name(p));
  return l;
}

// Outcome of one random lattice: whether finalize and the oracle agree on
// rejection, and for accepted lattices whether every glb and leq agrees.
struct LatticeCheck {
  bool valid = false;
  bool agree = true;
};

inline LatticeCheck check_lattice(const oracle::Dag& d) {
  oracle::BruteLattice ref(d);
  ftg::SortLattice l = build_lattice(d);
  LatticeCheck out;
  out.valid = l.finalize().empty();
  if (out.valid == ref.ambiguous()) {
    out.agree = false;
    return out;
  }
  if (!out.valid) return out;
  std::vector<ftg::SortId> ids;
  for (std::size_t i = 0; i < d.n; ++i) ids.push_back(*l.find(sort_name(i)));
  for (std::size_t a = 0; a < d.n; ++a) {
    for (std::size_t b = 0; b < d.n; ++b) {
      const ftg::SortId m = l.glb(ids[a], ids[b]);
      const auto want = ref.glb(a, b);
      const bool same = want ? m == ids[*want] : m == ftg::SortLattice::bottom;
      if (!same || l.leq(ids[a], ids[b]) != ref.leq(a, b)) out.agree = false;
    }
  }
  return out;
}

// top > a, b;  c <| a, c <| b;  d <| a;  e <| b.
inline const std::vector<std::string>& small_sorts() {
  static const std::vector<std::string> s = {"top", "a", "b", "c", "d", "e"};
  return s;
}

inline ftg::SortLattice small_lattice() {
  ftg::SortLattice l;
  l.declare_subsort("c", "a");
  l.declare_subsort("c", "b");
  l.declare_subsort("d", "a");
  l.declare_subsort("e", "b");
  l.declare_subsort("noun", "substantive");
  l.declare_subsort("verb", "substantive");
  l.declare_subsort("phrase", "sign");
  l.declare_appropriate("sign", "synsem", "synsem");
  l.declare_appropriate("synsem", "loc", "loc");
  (void)l.finalize();
  return l;
}

inline oracle::Meet small_meet() {
  oracle::Dag d{6, {{3, 1}, {3, 2}, {4, 1}, {5, 2}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}}};
  auto ref = std::make_shared<oracle::BruteLattice>(d);
  return [ref](const std::string& x, const std::string& y) -> std::optional<std::string> {
    const auto& s = small_sorts();
    auto ix = static_cast<std::size_t>(std::find(s.begin(), s.end(), x) - s.begin());
    auto iy = static_cast<std::size_t>(std::find(s.begin(), s.end(), y) - s.begin());
    auto m = ref->glb(ix, iy);
    if (!m) return std::nullopt;
    return s[*m];
  };
}

inline oracle::Graph random_graph(std::mt19937& rng, std::size_t max_nodes) {
  oracle::Graph g;
  const std::size_t n = std::uniform_int_distribution<std::size_t>(2, max_nodes)(rng);
  std::discrete_distribution<std::size_t> sort_pick({5, 3, 3, 1, 1, 1});
  for (std::size_t i = 0; i < n; ++i) g.add(small_sorts()[sort_pick(rng)]);
  std::uniform_int_distribution<std::size_t> node_pick(0, n - 1);
  std::bernoulli_distribution has(0.3);
  for (std::size_t i = 0; i < n; ++i)
    for (const char* f : {"f", "g", "h"})
      if (has(rng)) g.features[i][f] = node_pick(rng);
  return g;
}

inline std::vector<ftg::NodeRef> load_graph(ftg::TermStore& s, const oracle::Graph& g) {
  std::vector<ftg::NodeRef> refs;
  for (const auto& sort : g.sort) refs.push_back(s.new_node(*s.lattice().find(sort)));
  for (std::size_t i = 0; i < g.sort.size(); ++i)
    for (const auto& [f, v] : g.features[i]) (void)s.put_feature(refs[i], f, refs[v]);
  return refs;
}

// One unification of two random nodes, compared with the reference unifier.
// Also checks idempotence and commutativity on successes.
struct UnifyCheck {
  bool unified = false;
  bool agrees = true;
  bool idempotent = true;
  bool commutative = true;
};

inline UnifyCheck check_unify(const ftg::SortLattice& l, const oracle::Meet& meet, std::mt19937& rng) {
  oracle::Graph g = random_graph(rng, 8);
  std::uniform_int_distribution<std::size_t> pick(0, g.sort.size() - 1);
  const std::size_t a = pick(rng), b = pick(rng);
  auto ref = oracle::reference_unify(g, a, b, meet);

  UnifyCheck out;
  ftg::TermStore s(l);
  auto refs = load_graph(s, g);
  out.unified = s.unify(refs[a], refs[b]);
  if (out.unified != ref.has_value()) {
    out.agrees = false;
    return out;
  }
  if (!out.unified) return out;
  const oracle::Graph once = testutil::snapshot(s, refs[a]);
  out.agrees = oracle::isomorphic(once, 0, ref->graph, ref->class_of[a]);

  const std::size_t nodes = s.node_count();
  out.idempotent = s.unify(refs[a], refs[b]) && s.node_count() == nodes &&
                   oracle::isomorphic(testutil::snapshot(s, refs[a]), 0, once, 0);

  ftg::TermStore t(l);
  auto trefs = load_graph(t, g);
  out.commutative = t.unify(trefs[b], trefs[a]) && oracle::isomorphic(testutil::snapshot(t, trefs[a]), 0, once, 0);
  return out;
}

// r = append(a, b) where a has `len` cells and b is [] or [item]. Each cell
// of a, its terminating elist, and b are bound by separate events applied in
// `order`; the append goal is posted before event number `post_at`
// (post_at == order.size() posts it last, which is eager evaluation).
constexpr std::string_view kAppendGrammar = "item <| top.\n";

struct AppendRun {
  oracle::Graph result;
  std::size_t pending = 0;
  bool ok = true;
};

inline AppendRun run_append(const ftg::SortLattice& l, std::size_t len, bool second_nonempty,
                            const std::vector<std::size_t>& order, std::size_t post_at) {
  ftg::TermStore s(l);
  AppendRun out;
  auto req = [&](bool b) { out.ok = out.ok && b; };
  auto node = [&](const char* name) { return s.new_node(*l.find(name)); };
  ftg::NodeRef root = node("top");
  std::vector<ftg::NodeRef> cells;
  for (std::size_t i = 0; i <= len; ++i) cells.push_back(node("top"));
  std::vector<ftg::NodeRef> items;
  for (std::size_t i = 0; i < len; ++i) items.push_back(node("item"));
  ftg::NodeRef second = node("top");
  ftg::NodeRef result = node("top");
  req(s.put_feature(root, "a", cells[0]));
  req(s.put_feature(root, "b", second));
  req(s.put_feature(root, "r", result));
  for (std::size_t step = 0; step <= order.size(); ++step) {
    if (step == post_at) req(s.engine().append(result, cells[0], second));
    if (step == order.size()) break;
    const std::size_t e = order[step];
    if (e < len) {
      ftg::NodeRef cell = node("nelist");
      req(s.put_feature(cell, "first", items[e]));
      req(s.put_feature(cell, "rest", cells[e + 1]));
      req(s.unify(cells[e], cell));
    } else if (e == len) {
      req(s.restrict_sort(cells[len], ftg::SortLattice::elist));
    } else if (!second_nonempty) {
      req(s.restrict_sort(second, ftg::SortLattice::elist));
    } else {
      ftg::NodeRef cell = node("nelist");
      req(s.put_feature(cell, "first", node("item")));
      req(s.put_feature(cell, "rest", node("elist")));
      req(s.unify(second, cell));
    }
  }
  out.pending = s.engine().pending_suspensions();
  out.result = testutil::snapshot(s, root);
  return out;
}

// Random store operations under nested checkpoints. Every rollback must
// reproduce the debug_state() recorded when its checkpoint was taken.
// Returns the number of rollbacks checked, or -1 on the first mismatch.
inline long random_rollbacks(const ftg::SortLattice& l, std::mt19937& rng, int steps = 30) {
  ftg::TermStore s(l);
  auto rule = std::make_shared<ftg::SortRule>();
  rule->name = "c/1";
  rule->guard = *l.find("c");
  rule->var = "X";
  ftg::TermTemplate d;
  d.sort_name = "d";
  d.sort = *l.find("d");
  rule->body.push_back(ftg::PathEq{ftg::PathExpr{"X", {"f"}, {}}, d});
  s.engine().install_rule(rule);

  const auto& sorts = small_sorts();
  long checked = 0;
  std::vector<std::pair<ftg::Checkpoint, std::string>> open;
  open.emplace_back(s.checkpoint(), s.debug_state());
  auto roll = [&]() -> bool {
    auto [cp, snap] = open.back();
    s.rollback(cp);
    ++checked;
    return s.debug_state() == snap;
  };
  std::uniform_int_distribution<int> op(0, 9);
  std::uniform_int_distribution<std::size_t> sort_pick(0, sorts.size() - 1);
  for (int step = 0; step < steps; ++step) {
    const std::size_t live = s.node_count();
    auto any = [&] {
      return ftg::NodeRef{static_cast<std::uint32_t>(std::uniform_int_distribution<std::size_t>(0, live - 1)(rng))};
    };
    const int o = op(rng);
    if (!s.consistent() || o == 0) {
      if (open.size() > 1 || !s.consistent()) {
        if (!roll()) return -1;
        if (open.size() > 1)
          open.pop_back();
        else
          open.back() = {s.checkpoint(), s.debug_state()};
      }
    } else if (o == 1 && open.size() > 1) {
      auto cp = open.back().first;
      open.pop_back();
      s.commit(cp);
    } else if (o == 2) {
      open.emplace_back(s.checkpoint(), s.debug_state());
    } else if (live == 0 || o == 3) {
      s.new_node(*l.find(sorts[sort_pick(rng)]));
    } else if (o <= 5) {
      (void)s.put_feature(any(), std::string(1, static_cast<char>('f' + rng() % 3)), any());
    } else if (o == 6) {
      (void)s.restrict_sort(any(), *l.find(sorts[sort_pick(rng)]));
    } else if (o == 7) {
      (void)s.restrict_sort(any(), rng() % 2 ? ftg::SortLattice::elist : ftg::SortLattice::nelist);
    } else if (o == 8) {
      (void)s.engine().append(any(), any(), any());
    } else {
      (void)s.unify(any(), any());
    }
  }
  while (!open.empty()) {
    if (!roll()) return -1;
    open.pop_back();
  }
  return checked;
}

}  // namespace gen
