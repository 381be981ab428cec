#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ftg/diagnostics.hpp"
#include "ftg/sort_lattice.hpp"

namespace ftg {

class TermStore;
struct NodeRef;

/// Abstract syntax of a typed term such as `category(head => X:noun)`.
///
/// List literals are expanded by the reader into `nelist`/`elist` chains, so
/// a template is always a plain tree whose reentrancies are expressed by tags.
struct TermTemplate {
  std::string tag;               // empty when untagged
  std::string sort_name = "top";
  SortId sort = SortLattice::top;
  std::vector<std::pair<std::string, TermTemplate>> features;
  SourceLoc loc;

  bool is_bare_tag() const { return !tag.empty() && sort == SortLattice::top && features.empty(); }
};

using TagFrame = std::map<std::string, NodeRef, std::less<>>;

/// Builds the term in `store`, binding tags through `frame`. A tag already
/// bound in the frame is unified with the new occurrence. Returns nullopt if
/// unification or constraint propagation fails (the store is then dirty).
std::optional<NodeRef> instantiate(TermStore& store, const TermTemplate& t, TagFrame& frame);
std::optional<NodeRef> instantiate(TermStore& store, const TermTemplate& t);

/// Resolves every `sort_name` against the lattice. Returns the names that
/// could not be found, with their locations.
std::vector<std::pair<std::string, SourceLoc>> resolve_sorts(TermTemplate& t, const SortLattice& lattice);

/// Tags that occur exactly once in the template.
std::vector<std::pair<std::string, SourceLoc>> single_use_tags(const TermTemplate& t);

/// True when the node satisfies the description: sorts at or below the
/// template's, every templated feature present, and equal tags on identical
/// nodes.
bool subsumes(const TermTemplate& t, const TermStore& store, NodeRef n);

/// Source form of the template (list chains are printed without sugar).
std::string to_string(const TermTemplate& t);

}  // namespace ftg
