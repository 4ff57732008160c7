#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace backforth {

/// Subset of a finite base {0..n-1}, stored as packed 64-bit words.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t base) : base_(base), words_((base + 63) / 64, 0) {}

  std::size_t base() const { return base_; }
  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool v = true) {
    const std::uint64_t bit = std::uint64_t{1} << (i & 63);
    if (v)
      words_[i >> 6] |= bit;
    else
      words_[i >> 6] &= ~bit;
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  std::span<const std::uint64_t> words() const { return words_; }
  std::span<std::uint64_t> words() { return words_; }

  /// Mask of valid bits in the last word.
  std::uint64_t tail_mask() const {
    const std::size_t r = base_ & 63;
    return r == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << r) - 1;
  }

  std::vector<std::size_t> members() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < base_; ++i)
      if (test(i)) out.push_back(i);
    return out;
  }

  static PointSet from_members(std::size_t base, std::span<const std::size_t> members) {
    PointSet s(base);
    for (auto m : members) s.set(m);
    return s;
  }

  friend bool operator==(const PointSet&, const PointSet&) = default;
  friend auto operator<=>(const PointSet&, const PointSet&) = default;

 private:
  std::size_t base_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Size of the Boolean combination that intersects sets[i] when bit i of
/// `positive` is set and its complement otherwise. All sets share one base.
inline std::size_t combination_size(std::span<const PointSet* const> sets, std::uint64_t positive) {
  if (sets.empty()) return 0;
  const std::size_t nw = sets[0]->words().size();
  std::size_t total = 0;
  for (std::size_t w = 0; w < nw; ++w) {
    std::uint64_t acc = w + 1 == nw ? sets[0]->tail_mask() : ~std::uint64_t{0};
    for (std::size_t i = 0; i < sets.size() && acc; ++i) {
      const std::uint64_t word = sets[i]->words()[w];
      acc &= ((positive >> i) & 1u) ? word : ~word;
    }
    total += static_cast<std::size_t>(std::popcount(acc));
  }
  return total;
}

}  // namespace backforth
