#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ftg/grammar.hpp"
#include "ftg/term_store.hpp"

namespace ftg {

/// Source of the bundled sample grammar (also shipped as grammars/hpsg_paper.ftg).
std::string_view sample_grammar_source();

/// The bundled grammar, loaded once.
const Grammar& sample_grammar();

struct WellTypednessViolation {
  enum class Kind { missing_feature, unexpected_feature, sort_bound };

  Kind kind;
  std::string path;  // feature path from the checked root, "" for the root
  std::string feature;
  std::string message;
};

/// Checks every reachable node: appropriate features present, values within
/// their bounds, and no extra features on closed sorts.
std::vector<WellTypednessViolation> check_totally_well_typed(const TermStore& store, NodeRef root);

/// Generate-and-test principle check: applies every rule to every matching
/// reachable node inside a checkpoint and requires that no append stays
/// suspended. The store is always rolled back.
bool check_principles_posthoc(TermStore& store, NodeRef root, const RuleSet& rules);

/// True when `root` is subsumed by the grammar's start description. Without
/// a start declaration every structure matches.
bool matches_start(const TermStore& store, NodeRef root, const Grammar& grammar);

}  // namespace ftg
