#pragma once

// Exhaustive tree enumeration: every tree shape over the tokens, every
// schema and lexical-entry assignment, each built in its own store without
// active rules and then filtered by the passive checkers. Shares no chart
// code with the parser.

#include <memory>
#include <string>
#include <vector>

#include "ftg/constraint_engine.hpp"
#include "ftg/grammar.hpp"
#include "ftg/hpsg.hpp"
#include "ftg/term_store.hpp"
#include "test_util.hpp"

namespace oracle {

struct Tree {
  int schema = -1;  // -1: lexical
  std::size_t position = 0;
  std::size_t lexeme = 0;
  std::vector<Tree> children;
};

struct OracleParse {
  std::unique_ptr<ftg::TermStore> store;
  ftg::NodeRef root;
};

inline void enumerate(const ftg::Grammar& g, const std::vector<std::string>& toks, std::size_t s, std::size_t e,
                      int unary_depth, std::vector<Tree>& out);

// All ways to fill `arity` adjacent daughters covering [s, e).
inline void daughters(const ftg::Grammar& g, const std::vector<std::string>& toks, std::size_t s, std::size_t e,
                      std::size_t arity, std::vector<Tree>& prefix, std::size_t schema, std::vector<Tree>& out) {
  if (arity == 1) {
    std::vector<Tree> last;
    enumerate(g, toks, s, e, 2, last);
    for (auto& t : last) {
      Tree mother{static_cast<int>(schema), 0, 0, prefix};
      mother.children.push_back(t);
      out.push_back(std::move(mother));
    }
    return;
  }
  for (std::size_t cut = s + 1; cut + (arity - 1) <= e; ++cut) {
    std::vector<Tree> left;
    enumerate(g, toks, s, cut, 2, left);
    for (auto& t : left) {
      prefix.push_back(t);
      daughters(g, toks, cut, e, arity - 1, prefix, schema, out);
      prefix.pop_back();
    }
  }
}

inline void enumerate(const ftg::Grammar& g, const std::vector<std::string>& toks, std::size_t s, std::size_t e,
                      int unary_depth, std::vector<Tree>& out) {
  if (e - s == 1) {
    if (const auto* entries = g.lookup(toks[s]))
      for (std::size_t k = 0; k < entries->size(); ++k) out.push_back(Tree{-1, s, k, {}});
  }
  for (std::size_t i = 0; i < g.schemata.size(); ++i) {
    const std::size_t arity = g.schemata[i].arity();
    if (arity == 1) {
      if (unary_depth == 0) continue;
      std::vector<Tree> below;
      enumerate(g, toks, s, e, unary_depth - 1, below);
      for (auto& t : below) out.push_back(Tree{static_cast<int>(i), 0, 0, {t}});
    } else if (e - s >= arity) {
      std::vector<Tree> prefix;
      daughters(g, toks, s, e, arity, prefix, i, out);
    }
  }
}

inline std::optional<ftg::NodeRef> build(ftg::TermStore& store, const ftg::Grammar& g,
                                         const std::vector<std::string>& toks, const Tree& t) {
  if (t.schema < 0) return ftg::instantiate(store, (*g.lookup(toks[t.position]))[t.lexeme]);
  const ftg::Schema& schema = g.schemata[static_cast<std::size_t>(t.schema)];
  auto mother = ftg::instantiate(store, schema.mother);
  if (!mother) return std::nullopt;
  for (std::size_t i = 0; i < t.children.size(); ++i) {
    auto child = build(store, g, toks, t.children[i]);
    if (!child) return std::nullopt;
    auto slot = store.resolve_path(*mother, schema.daughters[i], true);
    if (!slot || !store.unify(*slot, *child)) return std::nullopt;
  }
  return mother;
}

inline std::vector<OracleParse> enumerate_parses(const ftg::Grammar& g, const std::vector<std::string>& toks) {
  std::vector<Tree> trees;
  enumerate(g, toks, 0, toks.size(), 2, trees);
  std::vector<OracleParse> out;
  for (const Tree& t : trees) {
    auto store = std::make_unique<ftg::TermStore>(g.lattice);
    auto root = build(*store, g, toks, t);
    if (!root) continue;
    if (!ftg::apply_rules_posthoc(*store, *root, g.rules)) continue;
    if (store->engine().pending_suspensions(*root) != 0) continue;
    if (!ftg::check_totally_well_typed(*store, *root).empty()) continue;
    if (!ftg::matches_start(*store, *root, g)) continue;
    out.push_back({std::move(store), *root});
  }
  return out;
}

// Order-insensitive isomorphism between parser output and oracle output,
// compared through plain graph snapshots.
inline bool same_parses(const ftg::TermStore& store, const std::vector<ftg::NodeRef>& parses,
                        const std::vector<OracleParse>& want) {
  if (parses.size() != want.size()) return false;
  std::vector<bool> used(want.size(), false);
  for (ftg::NodeRef p : parses) {
    const Graph got = testutil::snapshot(store, p);
    bool found = false;
    for (std::size_t i = 0; i < want.size() && !found; ++i) {
      if (used[i]) continue;
      if (isomorphic(got, 0, testutil::snapshot(*want[i].store, want[i].root), 0)) used[i] = found = true;
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace oracle
