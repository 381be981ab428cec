#pragma once

#include <string>

#include "json.hpp"

#include "ftg/term_store.hpp"

namespace ftg {

/// AVM text: `sort(f => value, ...)` with features in name order. Shared
/// nodes get `#k:` at their first occurrence and `#k` afterwards, numbered in
/// first-traversal order. Proper lists print as `[a, b]` or `[a | tail]`.
/// Both layouts are accepted by parse_term().
std::string render_avm(const TermStore& store, NodeRef root, bool pretty = false);

/// `{"root": "n0", "nodes": {"n0": {"sort": ..., "features": {"f": "n1"}}}}`
/// with ids in first-traversal order.
nlohmann::ordered_json to_json(const TermStore& store, NodeRef root);
std::string export_json(const TermStore& store, NodeRef root);

}  // namespace ftg
