#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ftg/constraint_engine.hpp"
#include "ftg/grammar.hpp"
#include "ftg/term_store.hpp"

namespace ftg {

/// direct: principles are active constraints while edges are built.
/// gat: edges are built without them; full-span candidates are filtered
/// afterwards (generate and test).
enum class ParseMode { direct, gat };

std::string_view to_string(ParseMode mode);
std::optional<ParseMode> parse_mode(std::string_view text);

struct ParseMetrics {
  std::uint64_t edges_created = 0;
  std::uint64_t combinations_attempted = 0;
  std::uint64_t unification_failures = 0;
  std::uint64_t constraints_fired = 0;
  std::uint64_t suspensions_created = 0;
  std::uint64_t posthoc_rejections = 0;
  /// Narrowest span width at which a combination failed, 0 when none did.
  std::size_t min_failure_span = 0;
  /// Narrowest span width of a rejected full-span candidate, 0 when none was.
  std::size_t min_rejection_span = 0;

  nlohmann::ordered_json to_json() const;
};

struct Edge {
  std::uint32_t id = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  NodeRef root;
  int schema = -1;  // index into Grammar::schemata, -1 for lexical edges
  std::size_t lexeme = 0;
  std::vector<std::uint32_t> daughters;

  bool lexical() const noexcept { return schema < 0; }
};

struct ParseOptions {
  ParseMode mode = ParseMode::direct;
  std::size_t max_parses = 16;
  std::size_t max_edges = 100000;
  /// Cap on the parse store's node count; unbounded unary chains hit this
  /// long before max_edges because every edge copies its daughter.
  std::size_t max_nodes = 2000000;
  std::size_t firing_budget = ConstraintEngine::default_firing_budget;
  TraceSink trace;
};

struct ParseResult {
  ParseMode mode = ParseMode::direct;
  std::vector<std::string> tokens;
  std::unique_ptr<TermStore> store;
  std::vector<Edge> edges;
  /// Edge ids of the returned parses, in chart order.
  std::vector<std::uint32_t> parse_edges;
  std::vector<NodeRef> parses;
  /// Complete parses found before max_parses truncation.
  std::size_t complete_parses = 0;
  ParseMetrics metrics;
};

class UnknownWord : public std::runtime_error {
 public:
  UnknownWord(std::string token, std::size_t position)
      : std::runtime_error("unknown word '" + token + "' at position " + std::to_string(position)),
        token_(std::move(token)),
        position_(position) {}

  const std::string& token() const noexcept { return token_; }
  std::size_t position() const noexcept { return position_; }

 private:
  std::string token_;
  std::size_t position_;
};

class EdgeBudgetExceeded : public std::runtime_error {
 public:
  explicit EdgeBudgetExceeded(std::size_t budget)
      : std::runtime_error("chart edge budget of " + std::to_string(budget) + " exceeded") {}
};

class NodeBudgetExceeded : public std::runtime_error {
 public:
  explicit NodeBudgetExceeded(std::size_t budget)
      : std::runtime_error("chart store budget of " + std::to_string(budget) + " nodes exceeded") {}
};

/// Bottom-up chart parse of already tokenized (normalized) words. Throws
/// UnknownWord, FiringBudgetExceeded, EdgeBudgetExceeded, NodeBudgetExceeded
/// and std::invalid_argument for an empty sentence.
ParseResult parse(const std::vector<std::string>& tokens, const Grammar& grammar, const ParseOptions& options = {});

/// True when both parse lists are pairwise isomorphic, ignoring order.
bool same_parse_set(const ParseResult& a, const ParseResult& b);

struct ModeComparison {
  ParseResult direct;
  ParseResult gat;
  bool equal_parse_sets = false;
};

/// Runs both modes, each in its own store. `options.mode` is ignored.
ModeComparison compare_modes(const std::vector<std::string>& tokens, const Grammar& grammar,
                             const ParseOptions& options = {});

}  // namespace ftg
