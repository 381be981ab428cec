#include "ftg/hpsg.hpp"

#include <unordered_set>

#include "ftg/constraint_engine.hpp"

namespace ftg {

extern const char* const sample_grammar_text;

std::string_view sample_grammar_source() { return sample_grammar_text; }

const Grammar& sample_grammar() {
  static const Grammar g = load_grammar(sample_grammar_source(), "hpsg_paper.ftg");
  return g;
}

std::vector<WellTypednessViolation> check_totally_well_typed(const TermStore& store, NodeRef root) {
  using Kind = WellTypednessViolation::Kind;
  const SortLattice& lat = store.lattice();
  std::vector<WellTypednessViolation> out;
  std::unordered_set<std::uint32_t> seen;
  std::vector<std::pair<NodeRef, std::string>> stack{{store.deref(root), ""}};
  auto at = [](const std::string& path, const std::string& f) { return path.empty() ? f : path + "." + f; };
  while (!stack.empty()) {
    auto [n, path] = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(n.index).second) continue;
    const SortId s = store.sort(n);
    const std::string& sort_name = lat.name(s);
    const FeatureBounds& bounds = lat.appropriate(s);
    for (const auto& [f, bound] : bounds) {
      auto v = store.feature(n, f);
      if (!v) {
        out.push_back({Kind::missing_feature, path, f, sort_name + " lacks appropriate feature " + f});
      } else if (!lat.leq(store.sort(*v), bound)) {
        out.push_back({Kind::sort_bound, at(path, f), f,
                       lat.name(store.sort(*v)) + " is not below the bound " + lat.name(bound) + " of " + f});
      }
    }
    const auto& features = store.features(n);
    if (lat.closed(s)) {
      for (const auto& [f, v] : features)
        if (!bounds.contains(f))
          out.push_back({Kind::unexpected_feature, path, f, f + " is not appropriate for closed sort " + sort_name});
    }
    for (auto it = features.rbegin(); it != features.rend(); ++it)
      stack.emplace_back(store.deref(it->second), at(path, it->first));
  }
  return out;
}

bool check_principles_posthoc(TermStore& store, NodeRef root, const RuleSet& rules) {
  Checkpoint cp = store.checkpoint();
  bool ok = false;
  try {
    ok = apply_rules_posthoc(store, root, rules) && store.engine().pending_suspensions(root) == 0;
  } catch (...) {
    store.rollback(cp);
    throw;
  }
  store.rollback(cp);
  return ok;
}

bool matches_start(const TermStore& store, NodeRef root, const Grammar& grammar) {
  return !grammar.start || subsumes(*grammar.start, store, root);
}

}  // namespace ftg
