#include "ftg/term_template.hpp"

#include "ftg/term_store.hpp"

namespace ftg {

namespace {

std::optional<NodeRef> build(TermStore& store, const TermTemplate& t, TagFrame& frame) {
  std::optional<NodeRef> earlier;
  if (!t.tag.empty()) {
    if (auto it = frame.find(t.tag); it != frame.end()) {
      if (t.is_bare_tag()) return it->second;
      earlier = it->second;
    }
  }
  NodeRef n = store.new_node(t.sort);
  if (!t.tag.empty() && !earlier) frame.emplace(t.tag, n);  // bound before the children: cyclic templates
  for (const auto& [name, child] : t.features) {
    auto value = build(store, child, frame);
    if (!value || !store.put_feature(n, name, *value)) return std::nullopt;
  }
  if (earlier && !store.unify(*earlier, n)) return std::nullopt;
  return n;
}

void resolve_into(TermTemplate& t, const SortLattice& lattice, std::vector<std::pair<std::string, SourceLoc>>& out) {
  if (auto id = lattice.find(t.sort_name))
    t.sort = *id;
  else
    out.emplace_back(t.sort_name, t.loc);
  for (auto& [name, child] : t.features) resolve_into(child, lattice, out);
}

void count_tags(const TermTemplate& t, std::map<std::string, std::pair<int, SourceLoc>, std::less<>>& counts) {
  if (!t.tag.empty()) {
    auto& entry = counts.try_emplace(t.tag, 0, t.loc).first->second;
    ++entry.first;
  }
  for (const auto& [name, child] : t.features) count_tags(child, counts);
}

bool match(const TermTemplate& t, const TermStore& store, NodeRef n, std::map<std::string, NodeRef, std::less<>>& tags) {
  n = store.deref(n);
  if (!t.tag.empty()) {
    auto [it, fresh] = tags.try_emplace(t.tag, n);
    if (!fresh && it->second != n) return false;
    if (!fresh && t.is_bare_tag()) return true;
  }
  if (!store.lattice().leq(store.sort(n), t.sort)) return false;
  for (const auto& [name, child] : t.features) {
    auto value = store.feature(n, name);
    if (!value || !match(child, store, *value, tags)) return false;
  }
  return true;
}

}  // namespace

bool subsumes(const TermTemplate& t, const TermStore& store, NodeRef n) {
  std::map<std::string, NodeRef, std::less<>> tags;
  return match(t, store, n, tags);
}

std::optional<NodeRef> instantiate(TermStore& store, const TermTemplate& t, TagFrame& frame) {
  std::optional<NodeRef> out;
  bool ok = store.batch([&] {
    out = build(store, t, frame);
    return out.has_value();
  });
  if (!ok) return std::nullopt;
  return out;
}

std::optional<NodeRef> instantiate(TermStore& store, const TermTemplate& t) {
  TagFrame frame;
  return instantiate(store, t, frame);
}

std::vector<std::pair<std::string, SourceLoc>> resolve_sorts(TermTemplate& t, const SortLattice& lattice) {
  std::vector<std::pair<std::string, SourceLoc>> unknown;
  resolve_into(t, lattice, unknown);
  return unknown;
}

std::vector<std::pair<std::string, SourceLoc>> single_use_tags(const TermTemplate& t) {
  std::map<std::string, std::pair<int, SourceLoc>, std::less<>> counts;
  count_tags(t, counts);
  std::vector<std::pair<std::string, SourceLoc>> out;
  for (const auto& [tag, entry] : counts)
    if (entry.first == 1) out.emplace_back(tag, entry.second);
  return out;
}

std::string to_string(const TermTemplate& t) {
  std::string out;
  if (!t.tag.empty()) {
    out = t.tag;
    if (t.is_bare_tag()) return out;
    out += ":";
  }
  out += t.sort_name;
  if (!t.features.empty()) {
    out += "(";
    for (std::size_t i = 0; i < t.features.size(); ++i) {
      if (i) out += ", ";
      out += t.features[i].first + " => " + to_string(t.features[i].second);
    }
    out += ")";
  }
  return out;
}

}  // namespace ftg
