#include "ftg/render.hpp"

#include <unordered_map>

namespace ftg {

namespace {

class AvmWriter {
 public:
  AvmWriter(const TermStore& store, NodeRef root, bool pretty) : store_(store), pretty_(pretty) {
    // A node needs a tag when it is reached more than once.
    for (NodeRef n : store.reachable(root))
      for (const auto& [f, v] : store.features(n)) ++in_degree_[store.deref(v).index];
    ++in_degree_[store.deref(root).index];
  }

  std::string run(NodeRef root) {
    write(store_.deref(root), 0);
    return std::move(out_);
  }

 private:
  bool shared(NodeRef n) const { return in_degree_.at(n.index) > 1; }

  bool is_cell(NodeRef n) const {
    const auto& fs = store_.features(n);
    return store_.sort(n) == SortLattice::nelist && fs.size() == 2 && fs[0].first == "first" && fs[1].first == "rest";
  }

  bool is_nil(NodeRef n) const { return store_.sort(n) == SortLattice::elist && store_.features(n).empty() && !shared(n); }

  void newline(int depth) {
    out_ += '\n';
    out_.append(static_cast<std::size_t>(depth) * 2, ' ');
  }

  void write(NodeRef n, int depth) {
    n = store_.deref(n);
    if (shared(n)) {
      auto [it, first_time] = tags_.try_emplace(n.index, static_cast<int>(tags_.size()) + 1);
      out_ += '#' + std::to_string(it->second);
      if (!first_time) return;
      out_ += ':';
    }
    if (is_cell(n)) return write_list(n, depth);
    out_ += store_.lattice().name(store_.sort(n));
    const auto& fs = store_.features(n);
    if (fs.empty()) return;
    out_ += '(';
    for (std::size_t i = 0; i < fs.size(); ++i) {
      if (i) out_ += ',';
      if (pretty_)
        newline(depth + 1);
      else if (i)
        out_ += ' ';
      out_ += fs[i].first + " => ";
      write(fs[i].second, depth + 1);
    }
    if (pretty_) newline(depth);
    out_ += ')';
  }

  void write_list(NodeRef cell, int depth) {
    out_ += '[';
    NodeRef cur = cell;
    bool first = true;
    while (true) {
      if (!first) out_ += ',';
      if (pretty_)
        newline(depth + 1);
      else if (!first)
        out_ += ' ';
      write(*store_.feature(cur, "first"), depth + 1);
      first = false;
      NodeRef rest = store_.deref(*store_.feature(cur, "rest"));
      if (is_cell(rest) && !shared(rest)) {
        cur = rest;
        continue;
      }
      if (!is_nil(rest)) {
        out_ += " | ";
        write(rest, depth + 1);
      }
      break;
    }
    if (pretty_) newline(depth);
    out_ += ']';
  }

  const TermStore& store_;
  bool pretty_;
  std::unordered_map<std::uint32_t, int> in_degree_;
  std::unordered_map<std::uint32_t, int> tags_;
  std::string out_;
};

}  // namespace

std::string render_avm(const TermStore& store, NodeRef root, bool pretty) {
  return AvmWriter(store, root, pretty).run(root);
}

nlohmann::ordered_json to_json(const TermStore& store, NodeRef root) {
  std::vector<NodeRef> order = store.reachable(root);
  std::unordered_map<std::uint32_t, std::string> ids;
  for (std::size_t i = 0; i < order.size(); ++i) ids.emplace(order[i].index, "n" + std::to_string(i));
  nlohmann::ordered_json nodes = nlohmann::ordered_json::object();
  for (NodeRef n : order) {
    nlohmann::ordered_json features = nlohmann::ordered_json::object();
    for (const auto& [f, v] : store.features(n)) features[f] = ids.at(store.deref(v).index);
    nodes[ids.at(n.index)] = {{"sort", store.lattice().name(store.sort(n))}, {"features", std::move(features)}};
  }
  return {{"root", ids.at(store.deref(root).index)}, {"nodes", std::move(nodes)}};
}

std::string export_json(const TermStore& store, NodeRef root) { return to_json(store, root).dump(); }

}  // namespace ftg
