#include "ftg/chart.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "ftg/hpsg.hpp"

namespace ftg {

std::string_view to_string(ParseMode mode) { return mode == ParseMode::direct ? "direct" : "gat"; }

std::optional<ParseMode> parse_mode(std::string_view text) {
  if (text == "direct") return ParseMode::direct;
  if (text == "gat") return ParseMode::gat;
  return std::nullopt;
}

nlohmann::ordered_json ParseMetrics::to_json() const {
  return {{"edges_created", edges_created},
          {"combinations_attempted", combinations_attempted},
          {"unification_failures", unification_failures},
          {"constraints_fired", constraints_fired},
          {"suspensions_created", suspensions_created},
          {"posthoc_rejections", posthoc_rejections},
          {"min_failure_span", min_failure_span},
          {"min_rejection_span", min_rejection_span}};
}

namespace {

void note_span(std::size_t& slot, std::size_t width) {
  if (slot == 0 || width < slot) slot = width;
}

class ChartParser {
 public:
  ChartParser(const std::vector<std::string>& tokens, const Grammar& grammar, const ParseOptions& options)
      : grammar_(grammar), options_(options) {
    result_.mode = options.mode;
    result_.tokens = tokens;
    result_.store = std::make_unique<TermStore>(grammar.lattice);
    store_ = result_.store.get();
    if (options.mode == ParseMode::direct) store_->engine().install_rules(grammar.rules);
    store_->engine().set_firing_budget(options.firing_budget);
    if (options.trace) store_->engine().set_trace(options.trace);
  }

  ParseResult run() {
    const std::size_t n = result_.tokens.size();
    std::vector<const std::vector<TermTemplate>*> entries(n);
    for (std::size_t i = 0; i < n; ++i) {
      entries[i] = grammar_.lookup(result_.tokens[i]);
      if (!entries[i]) throw UnknownWord(result_.tokens[i], i);
    }
    for (std::size_t width = 1; width <= n; ++width) {
      for (std::size_t start = 0; start + width <= n; ++start) {
        const std::size_t end = start + width;
        if (width == 1) lexical(start, *entries[start]);
        for (std::size_t s = 0; s < grammar_.schemata.size(); ++s)
          if (grammar_.schemata[s].arity() >= 2) nary(s, start, end);
        unary_closure(start, end);
      }
    }
    collect(n);
    const StoreStats& stats = store_->stats();
    result_.metrics.constraints_fired = stats.firings;
    result_.metrics.suspensions_created = stats.suspensions_created;
    return std::move(result_);
  }

 private:
  std::vector<std::uint32_t>& cell(std::size_t start, std::size_t end) { return by_span_[{start, end}]; }

  void add_edge(Edge e) {
    if (result_.edges.size() >= options_.max_edges) throw EdgeBudgetExceeded(options_.max_edges);
    if (store_->node_count() > options_.max_nodes) throw NodeBudgetExceeded(options_.max_nodes);
    e.id = static_cast<std::uint32_t>(result_.edges.size());
    cell(e.start, e.end).push_back(e.id);
    result_.edges.push_back(std::move(e));
    ++result_.metrics.edges_created;
  }

  void failed(std::size_t width) {
    ++result_.metrics.unification_failures;
    note_span(result_.metrics.min_failure_span, width);
  }

  void lexical(std::size_t position, const std::vector<TermTemplate>& templates) {
    for (std::size_t k = 0; k < templates.size(); ++k) {
      Checkpoint cp = store_->checkpoint();
      std::optional<NodeRef> root;
      try {
        root = instantiate(*store_, templates[k]);
      } catch (...) {
        store_->rollback(cp);
        throw;
      }
      if (!root) {
        store_->rollback(cp);
        failed(1);
        continue;
      }
      store_->commit(cp);
      add_edge(Edge{0, position, position + 1, *root, -1, k, {}});
    }
  }

  // Builds the mother and unifies a private copy of each daughter into it.
  std::optional<NodeRef> combine(const Schema& schema, const std::vector<std::uint32_t>& daughters) {
    ++result_.metrics.combinations_attempted;
    Checkpoint cp = store_->checkpoint();
    std::optional<NodeRef> mother;
    bool ok = false;
    try {
      mother = instantiate(*store_, schema.mother);
      ok = mother.has_value();
      for (std::size_t i = 0; ok && i < daughters.size(); ++i) {
        NodeRef copy = store_->clone(result_.edges[daughters[i]].root);
        auto slot = store_->resolve_path(*mother, schema.daughters[i], true);
        ok = slot && store_->unify(*slot, copy);
      }
    } catch (...) {
      store_->rollback(cp);
      throw;
    }
    if (!ok) {
      store_->rollback(cp);
      return std::nullopt;
    }
    store_->commit(cp);
    return mother;
  }

  void attempt(std::size_t schema_index, std::size_t start, std::size_t end, std::vector<std::uint32_t> daughters) {
    if (!seen_.emplace(start, end, schema_index, daughters).second) return;
    auto mother = combine(grammar_.schemata[schema_index], daughters);
    if (!mother) {
      failed(end - start);
      return;
    }
    add_edge(Edge{0, start, end, *mother, static_cast<int>(schema_index), 0, std::move(daughters)});
  }

  void nary(std::size_t schema_index, std::size_t start, std::size_t end) {
    const std::size_t arity = grammar_.schemata[schema_index].arity();
    if (end - start < arity) return;
    std::vector<std::size_t> bounds{start};
    tilings(schema_index, arity, end, bounds);
  }

  // Every way to cut [bounds.back(), end) into `left` nonempty adjacent spans.
  void tilings(std::size_t schema_index, std::size_t left, std::size_t end, std::vector<std::size_t>& bounds) {
    const std::size_t from = bounds.back();
    if (left == 1) {
      bounds.push_back(end);
      std::vector<std::vector<std::uint32_t>> cells;
      for (std::size_t i = 0; i + 1 < bounds.size(); ++i) cells.push_back(cell(bounds[i], bounds[i + 1]));
      bounds.pop_back();
      std::vector<std::uint32_t> picked;
      product(schema_index, bounds.front(), end, cells, picked);
      return;
    }
    for (std::size_t cut = from + 1; cut + (left - 1) <= end; ++cut) {
      bounds.push_back(cut);
      tilings(schema_index, left - 1, end, bounds);
      bounds.pop_back();
    }
  }

  void product(std::size_t schema_index, std::size_t start, std::size_t end,
               const std::vector<std::vector<std::uint32_t>>& cells, std::vector<std::uint32_t>& picked) {
    if (picked.size() == cells.size()) {
      attempt(schema_index, start, end, picked);
      return;
    }
    for (std::uint32_t id : cells[picked.size()]) {
      picked.push_back(id);
      product(schema_index, start, end, cells, picked);
      picked.pop_back();
    }
  }

  void unary_closure(std::size_t start, std::size_t end) {
    // The cell grows while we walk it, so index rather than iterate.
    for (std::size_t i = 0; i < cell(start, end).size(); ++i) {
      const std::uint32_t id = cell(start, end)[i];
      for (std::size_t s = 0; s < grammar_.schemata.size(); ++s)
        if (grammar_.schemata[s].arity() == 1) attempt(s, start, end, {id});
    }
  }

  bool accept_gat(NodeRef root, std::size_t width) {
    Checkpoint cp = store_->checkpoint();
    bool ok = false;
    try {
      ok = apply_rules_posthoc(*store_, root, grammar_.rules) && store_->engine().pending_suspensions(root) == 0 &&
           check_totally_well_typed(*store_, root).empty();
    } catch (...) {
      store_->rollback(cp);
      throw;
    }
    if (ok) {
      store_->commit(cp);
      return true;
    }
    store_->rollback(cp);
    ++result_.metrics.posthoc_rejections;
    note_span(result_.metrics.min_rejection_span, width);
    return false;
  }

  void collect(std::size_t n) {
    for (std::uint32_t id : std::vector<std::uint32_t>(cell(0, n))) {
      const NodeRef root = result_.edges[id].root;
      bool ok;
      if (options_.mode == ParseMode::gat)
        ok = accept_gat(root, n);
      else
        ok = store_->engine().pending_suspensions(root) == 0 && check_totally_well_typed(*store_, root).empty();
      if (!ok || !matches_start(*store_, root, grammar_)) continue;
      ++result_.complete_parses;
      if (result_.parses.size() < options_.max_parses) {
        result_.parses.push_back(store_->deref(root));
        result_.parse_edges.push_back(id);
      }
    }
  }

  const Grammar& grammar_;
  const ParseOptions& options_;
  ParseResult result_;
  TermStore* store_ = nullptr;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::uint32_t>> by_span_;
  std::set<std::tuple<std::size_t, std::size_t, std::size_t, std::vector<std::uint32_t>>> seen_;
};

}  // namespace

ParseResult parse(const std::vector<std::string>& tokens, const Grammar& grammar, const ParseOptions& options) {
  if (tokens.empty()) throw std::invalid_argument("cannot parse an empty sentence");
  return ChartParser(tokens, grammar, options).run();
}

bool same_parse_set(const ParseResult& a, const ParseResult& b) {
  if (a.parses.size() != b.parses.size()) return false;
  std::vector<bool> used(b.parses.size(), false);
  for (NodeRef pa : a.parses) {
    bool matched = false;
    for (std::size_t j = 0; j < b.parses.size() && !matched; ++j) {
      if (used[j] || !isomorphic(*a.store, pa, *b.store, b.parses[j])) continue;
      used[j] = matched = true;
    }
    if (!matched) return false;
  }
  return true;
}

ModeComparison compare_modes(const std::vector<std::string>& tokens, const Grammar& grammar,
                             const ParseOptions& options) {
  ParseOptions direct = options;
  direct.mode = ParseMode::direct;
  ParseOptions gat = options;
  gat.mode = ParseMode::gat;
  ModeComparison out{parse(tokens, grammar, direct), parse(tokens, grammar, gat), false};
  out.equal_parse_sets = same_parse_set(out.direct, out.gat);
  return out;
}

}  // namespace ftg
