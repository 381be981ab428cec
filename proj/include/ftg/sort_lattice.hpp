#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ftg {

/// Dense index into a SortLattice's sort table.
struct SortId {
  std::uint32_t value = 0;

  friend constexpr bool operator==(SortId, SortId) = default;
  friend constexpr auto operator<=>(SortId, SortId) = default;
};

using FeatureBounds = std::map<std::string, SortId, std::less<>>;

/// Problems found by SortLattice::finalize(). An empty list means the
/// lattice is a valid meet semilattice and has been frozen.
struct LatticeDiagnostic {
  enum class Kind { cycle, ambiguous_glb, appropriateness_conflict, reserved_sort };

  Kind kind;
  std::string message;
  /// cycle: the sorts along the cycle; ambiguous_glb: s1, s2 then the
  /// maximal common lower bounds; appropriateness_conflict: the sort.
  std::vector<std::string> sorts;
  std::string feature;
};

class LatticeError : public std::invalid_argument {
 public:
  enum class Kind { empty_partition, reserved_sort, frozen, not_finalized };

  LatticeError(Kind kind, const std::string& what)
      : std::invalid_argument(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// The declared subsort order over sort symbols, with GLB, appropriateness
/// and closure queries.
///
/// Besides user sorts the table always holds `top` (supersort of every
/// sort), the failure sort `⊥`, and the list sorts `list`, `elist` and
/// `nelist(first => top, rest => list)` used by list literals and append.
///
/// Declarations are accepted until finalize() succeeds; afterwards the
/// lattice is immutable and safe to share across threads.
class SortLattice {
 public:
  static constexpr SortId top{0};
  static constexpr SortId bottom{1};
  static constexpr SortId list{2};
  static constexpr SortId elist{3};
  static constexpr SortId nelist{4};

  static constexpr std::size_t dense_glb_limit = 512;

  SortLattice();

  SortLattice(const SortLattice& other);
  SortLattice& operator=(const SortLattice& other);
  SortLattice(SortLattice&&) noexcept;
  SortLattice& operator=(SortLattice&&) noexcept;
  ~SortLattice();

  /// Registers `name` on first mention and returns its id.
  SortId intern(std::string_view name);
  std::optional<SortId> find(std::string_view name) const;

  void declare_subsort(std::string_view child, std::string_view parent);
  void declare_partition(std::string_view parent, const std::vector<std::string>& children);
  void declare_appropriate(std::string_view sort, std::string_view feature, std::string_view bound);
  void declare_closed(std::string_view sort);

  std::vector<LatticeDiagnostic> finalize();
  bool finalized() const noexcept { return finalized_; }

  bool leq(SortId a, SortId b) const;
  SortId glb(SortId a, SortId b) const;

  /// Inherited appropriateness: the union over all supersorts, each feature
  /// carrying its most specific bound.
  const FeatureBounds& appropriate(SortId s) const;
  std::optional<SortId> appropriate_bound(SortId s, std::string_view feature) const;

  /// True when `s` or one of its supersorts was declared closed.
  bool closed(SortId s) const;

  /// Children recorded by `parent := {...}` declarations, in order.
  const std::vector<SortId>& partition(SortId parent) const;

  std::size_t size() const noexcept { return sorts_.size(); }
  const std::string& name(SortId s) const { return sorts_.at(s.value).name; }
  const std::vector<SortId>& parents(SortId s) const { return sorts_.at(s.value).parents; }

 private:
  struct SortEntry {
    std::string name;
    std::vector<SortId> parents;
    FeatureBounds declared;
    bool closed = false;
    std::vector<SortId> partition;
  };

  using Bits = std::vector<std::uint64_t>;

  void require_open() const;
  void require_final() const;
  SortId intern_user(std::string_view name);
  SortId compute_glb(SortId a, SortId b) const;

  std::vector<SortEntry> sorts_;
  std::unordered_map<std::string, SortId> by_name_;
  bool finalized_ = false;

  // Filled by finalize().
  std::vector<Bits> up_;    // up_[s]: every t with s <= t
  std::vector<Bits> down_;  // down_[s]: every t with t <= s
  std::vector<FeatureBounds> effective_;
  std::vector<bool> effective_closed_;
  std::vector<SortId> glb_table_;  // dense, only when size() <= dense_glb_limit

  mutable std::mutex memo_mutex_;
  mutable std::unordered_map<std::uint64_t, SortId> glb_memo_;
};

}  // namespace ftg
