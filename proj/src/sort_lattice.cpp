#include "ftg/sort_lattice.hpp"

#include <algorithm>
#include <bit>

namespace ftg {

namespace {

constexpr std::size_t words_for(std::size_t n) { return (n + 63) / 64; }

bool test_bit(const std::vector<std::uint64_t>& b, std::size_t i) {
  return (b[i / 64] >> (i % 64)) & 1u;
}

void set_bit(std::vector<std::uint64_t>& b, std::size_t i) { b[i / 64] |= std::uint64_t{1} << (i % 64); }

std::uint64_t pair_key(SortId a, SortId b) {
  if (b < a) std::swap(a, b);
  return (std::uint64_t{a.value} << 32) | b.value;
}

}  // namespace

SortLattice::SortLattice() {
  auto add = [this](std::string name) {
    SortId id{static_cast<std::uint32_t>(sorts_.size())};
    by_name_.emplace(name, id);
    sorts_.push_back(SortEntry{std::move(name), {}, {}, false, {}});
  };
  add("top");
  add("⊥");
  add("list");
  add("elist");
  add("nelist");
  sorts_[elist.value].parents.push_back(list);
  sorts_[nelist.value].parents.push_back(list);
  sorts_[nelist.value].declared.emplace("first", top);
  sorts_[nelist.value].declared.emplace("rest", list);
}

SortLattice::SortLattice(const SortLattice& other)
    : sorts_(other.sorts_),
      by_name_(other.by_name_),
      finalized_(other.finalized_),
      up_(other.up_),
      down_(other.down_),
      effective_(other.effective_),
      effective_closed_(other.effective_closed_),
      glb_table_(other.glb_table_) {
  std::lock_guard lock(other.memo_mutex_);
  glb_memo_ = other.glb_memo_;
}

SortLattice& SortLattice::operator=(const SortLattice& other) {
  if (this != &other) {
    SortLattice copy(other);
    *this = std::move(copy);
  }
  return *this;
}

SortLattice::SortLattice(SortLattice&& other) noexcept
    : sorts_(std::move(other.sorts_)),
      by_name_(std::move(other.by_name_)),
      finalized_(other.finalized_),
      up_(std::move(other.up_)),
      down_(std::move(other.down_)),
      effective_(std::move(other.effective_)),
      effective_closed_(std::move(other.effective_closed_)),
      glb_table_(std::move(other.glb_table_)),
      glb_memo_(std::move(other.glb_memo_)) {}

SortLattice& SortLattice::operator=(SortLattice&& other) noexcept {
  sorts_ = std::move(other.sorts_);
  by_name_ = std::move(other.by_name_);
  finalized_ = other.finalized_;
  up_ = std::move(other.up_);
  down_ = std::move(other.down_);
  effective_ = std::move(other.effective_);
  effective_closed_ = std::move(other.effective_closed_);
  glb_table_ = std::move(other.glb_table_);
  glb_memo_ = std::move(other.glb_memo_);
  return *this;
}

SortLattice::~SortLattice() = default;

void SortLattice::require_open() const {
  if (finalized_) throw LatticeError(LatticeError::Kind::frozen, "sort lattice is already finalized");
}

void SortLattice::require_final() const {
  if (!finalized_) throw LatticeError(LatticeError::Kind::not_finalized, "sort lattice is not finalized");
}

SortId SortLattice::intern(std::string_view name) {
  if (auto found = find(name)) return *found;
  require_open();
  SortId id{static_cast<std::uint32_t>(sorts_.size())};
  by_name_.emplace(std::string(name), id);
  sorts_.push_back(SortEntry{std::string(name), {}, {}, false, {}});
  return id;
}

SortId SortLattice::intern_user(std::string_view name) {
  SortId id = intern(name);
  if (id == bottom)
    throw LatticeError(LatticeError::Kind::reserved_sort, "the failure sort cannot be declared");
  return id;
}

std::optional<SortId> SortLattice::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

void SortLattice::declare_subsort(std::string_view child, std::string_view parent) {
  require_open();
  SortId c = intern_user(child);
  SortId p = intern_user(parent);
  if (c == top)
    throw LatticeError(LatticeError::Kind::reserved_sort, "top cannot be declared as a subsort");
  auto& parents = sorts_[c.value].parents;
  if (std::find(parents.begin(), parents.end(), p) == parents.end()) parents.push_back(p);
}

void SortLattice::declare_partition(std::string_view parent, const std::vector<std::string>& children) {
  require_open();
  if (children.empty())
    throw LatticeError(LatticeError::Kind::empty_partition,
                       "partition of '" + std::string(parent) + "' has no children");
  SortId p = intern_user(parent);
  for (const auto& child : children) {
    declare_subsort(child, parent);
    sorts_[p.value].partition.push_back(*find(child));
  }
}

void SortLattice::declare_appropriate(std::string_view sort, std::string_view feature, std::string_view bound) {
  require_open();
  SortId s = intern_user(sort);
  SortId b = intern_user(bound);
  sorts_[s.value].declared.insert_or_assign(std::string(feature), b);
}

void SortLattice::declare_closed(std::string_view sort) {
  require_open();
  sorts_[intern_user(sort).value].closed = true;
}

std::vector<LatticeDiagnostic> SortLattice::finalize() {
  require_open();
  std::vector<LatticeDiagnostic> diags;
  const std::size_t n = sorts_.size();

  // Cycle detection (iterative DFS over parent edges).
  std::vector<int> color(n, 0);
  std::vector<std::uint32_t> order;  // parents before children
  order.reserve(n);
  for (std::uint32_t start = 0; start < n; ++start) {
    if (color[start] != 0) continue;
    std::vector<std::pair<std::uint32_t, std::size_t>> stack{{start, 0}};
    color[start] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& ps = sorts_[node].parents;
      if (next < ps.size()) {
        std::uint32_t p = ps[next++].value;
        if (color[p] == 0) {
          color[p] = 1;
          stack.emplace_back(p, 0);
        } else if (color[p] == 1) {
          LatticeDiagnostic d{LatticeDiagnostic::Kind::cycle, {}, {}, {}};
          auto it = std::find_if(stack.begin(), stack.end(), [p](auto& e) { return e.first == p; });
          for (; it != stack.end(); ++it) d.sorts.push_back(sorts_[it->first].name);
          d.sorts.push_back(sorts_[p].name);
          d.message = "subsort cycle: ";
          for (std::size_t i = 0; i < d.sorts.size(); ++i) d.message += (i ? " <| " : "") + d.sorts[i];
          diags.push_back(std::move(d));
        }
      } else {
        color[node] = 2;
        order.push_back(node);
        stack.pop_back();
      }
    }
  }
  if (!diags.empty()) return diags;

  // Reflexive-transitive closure. `order` lists parents before children.
  const std::size_t words = words_for(n);
  up_.assign(n, Bits(words, 0));
  down_.assign(n, Bits(words, 0));
  for (std::uint32_t s : order) {
    set_bit(up_[s], s);
    set_bit(up_[s], top.value);
    for (SortId p : sorts_[s].parents)
      for (std::size_t w = 0; w < words; ++w) up_[s][w] |= up_[p.value][w];
  }
  for (auto& word : up_[bottom.value]) word = ~std::uint64_t{0};
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t t = 0; t < n; ++t)
      if (test_bit(up_[s], t)) set_bit(down_[t], s);

  // Meet-semilattice check: every pair needs a unique maximal common lower bound.
  const bool dense = n <= dense_glb_limit;
  if (dense) glb_table_.assign(n * n, bottom);
  Bits common(words);
  for (std::uint32_t a = 0; a < n; ++a) {
    for (std::uint32_t b = a; b < n; ++b) {
      SortId meet = bottom;
      if (a == b || test_bit(up_[a], b)) {
        meet = SortId{a};
      } else if (test_bit(up_[b], a)) {
        meet = SortId{b};
      } else {
        for (std::size_t w = 0; w < words; ++w) common[w] = down_[a][w] & down_[b][w];
        common[bottom.value / 64] &= ~(std::uint64_t{1} << (bottom.value % 64));
        std::vector<SortId> maximal;
        for (std::size_t cw = 0; cw < words; ++cw) {
          for (std::uint64_t bits = common[cw]; bits != 0; bits &= bits - 1) {
            const auto x = static_cast<std::uint32_t>(cw * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
            std::size_t above = 0;
            for (std::size_t w = 0; w < words; ++w) above += std::popcount(up_[x][w] & common[w]);
            if (above == 1) maximal.push_back(SortId{x});
          }
        }
        if (maximal.size() == 1) {
          meet = maximal.front();
        } else if (maximal.size() > 1) {
          LatticeDiagnostic d{LatticeDiagnostic::Kind::ambiguous_glb, {}, {}, {}};
          d.sorts = {sorts_[a].name, sorts_[b].name};
          d.message = "sorts '" + sorts_[a].name + "' and '" + sorts_[b].name +
                      "' have no unique greatest lower bound; candidates:";
          for (SortId m : maximal) {
            d.sorts.push_back(sorts_[m.value].name);
            d.message += " " + sorts_[m.value].name;
          }
          diags.push_back(std::move(d));
        }
      }
      if (dense) {
        glb_table_[a * n + b] = meet;
        glb_table_[b * n + a] = meet;
      }
    }
  }
  if (!diags.empty()) {
    glb_table_.clear();
    return diags;
  }

  // Appropriateness inheritance, parents first.
  effective_.assign(n, {});
  effective_closed_.assign(n, false);
  auto meet = [&](SortId a, SortId b) { return dense ? glb_table_[a.value * n + b.value] : compute_glb(a, b); };
  for (std::uint32_t s : order) {
    FeatureBounds merged;
    bool closed = sorts_[s].closed;
    for (SortId p : sorts_[s].parents) {
      closed = closed || effective_closed_[p.value];
      for (const auto& [feature, bound] : effective_[p.value]) {
        auto [it, inserted] = merged.emplace(feature, bound);
        if (!inserted) it->second = meet(it->second, bound);
      }
    }
    for (const auto& [feature, bound] : sorts_[s].declared) {
      auto it = merged.find(feature);
      if (it != merged.end() && !test_bit(up_[bound.value], it->second.value)) {
        diags.push_back({LatticeDiagnostic::Kind::appropriateness_conflict,
                         "feature '" + feature + "' on '" + sorts_[s].name + "' is bounded by '" +
                             sorts_[bound.value].name + "', which is not a subsort of the inherited bound '" +
                             sorts_[it->second.value].name + "'",
                         {sorts_[s].name},
                         feature});
      }
      merged.insert_or_assign(feature, bound);
    }
    for (const auto& [feature, bound] : merged) {
      if (bound == bottom && !sorts_[s].declared.contains(feature)) {
        diags.push_back({LatticeDiagnostic::Kind::appropriateness_conflict,
                         "feature '" + feature + "' inherited by '" + sorts_[s].name +
                             "' has incompatible bounds",
                         {sorts_[s].name},
                         feature});
      }
    }
    effective_[s] = std::move(merged);
    effective_closed_[s] = closed;
  }
  if (!diags.empty()) {
    glb_table_.clear();
    return diags;
  }

  finalized_ = true;
  return diags;
}

bool SortLattice::leq(SortId a, SortId b) const {
  require_final();
  return test_bit(up_.at(a.value), b.value);
}

SortId SortLattice::compute_glb(SortId a, SortId b) const {
  const std::size_t words = up_.front().size();
  Bits common(words);
  for (std::size_t w = 0; w < words; ++w) common[w] = down_[a.value][w] & down_[b.value][w];
  common[bottom.value / 64] &= ~(std::uint64_t{1} << (bottom.value % 64));
  for (std::uint32_t x = 0; x < sorts_.size(); ++x) {
    if (!test_bit(common, x)) continue;
    std::size_t above = 0;
    for (std::size_t w = 0; w < words; ++w) above += std::popcount(up_[x][w] & common[w]);
    if (above == 1) return SortId{x};
  }
  return bottom;
}

SortId SortLattice::glb(SortId a, SortId b) const {
  require_final();
  if (a == b) return a;
  const std::size_t n = sorts_.size();
  if (!glb_table_.empty()) return glb_table_[a.value * n + b.value];
  if (leq(a, b)) return a;
  if (leq(b, a)) return b;
  std::uint64_t key = pair_key(a, b);
  {
    std::lock_guard lock(memo_mutex_);
    if (auto it = glb_memo_.find(key); it != glb_memo_.end()) return it->second;
  }
  SortId meet = compute_glb(a, b);
  std::lock_guard lock(memo_mutex_);
  glb_memo_.emplace(key, meet);
  return meet;
}

const FeatureBounds& SortLattice::appropriate(SortId s) const {
  require_final();
  return effective_.at(s.value);
}

std::optional<SortId> SortLattice::appropriate_bound(SortId s, std::string_view feature) const {
  const auto& bounds = appropriate(s);
  auto it = bounds.find(feature);
  if (it == bounds.end()) return std::nullopt;
  return it->second;
}

bool SortLattice::closed(SortId s) const {
  require_final();
  return effective_closed_.at(s.value);
}

const std::vector<SortId>& SortLattice::partition(SortId parent) const { return sorts_.at(parent.value).partition; }

}  // namespace ftg
