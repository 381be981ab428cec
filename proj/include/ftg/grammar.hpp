#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ftg/constraint_engine.hpp"
#include "ftg/diagnostics.hpp"
#include "ftg/sort_lattice.hpp"
#include "ftg/term_template.hpp"

namespace ftg {

/// An ID schema: a mother description plus the paths at which its daughters
/// sit, in left-to-right surface order.
struct Schema {
  std::string name;
  TermTemplate mother;
  std::vector<std::vector<std::string>> daughters;
  SourceLoc loc;

  std::size_t arity() const noexcept { return daughters.size(); }
};

struct Grammar {
  SortLattice lattice;
  RuleSet rules;
  /// Keyed by normalize_word(surface).
  std::map<std::string, std::vector<TermTemplate>, std::less<>> lexicon;
  std::vector<Schema> schemata;
  /// Candidates at full span must be subsumed by this description.
  std::optional<TermTemplate> start;
  std::vector<Diagnostic> warnings;

  std::size_t lexeme_count() const;
  const std::vector<TermTemplate>* lookup(std::string_view normalized_word) const;
};

/// Parses and validates grammar source. Throws GrammarError carrying every
/// syntax, lattice and validation error found.
Grammar load_grammar(std::string_view text, std::string_view file_name = "<grammar>");

/// Reads and loads a grammar file. I/O failures are reported as GrammarError
/// with a single location-less diagnostic.
Grammar load_grammar_file(const std::filesystem::path& path);

/// Parses a single term (with list sugar and tags) against a finalized
/// lattice. Throws GrammarError.
TermTemplate parse_term(std::string_view text, const SortLattice& lattice, std::string_view file_name = "<term>");

}  // namespace ftg
