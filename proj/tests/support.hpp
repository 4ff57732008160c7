#pragma once

// Shared fixtures and brute-force oracles for the test suites.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "backforth/core.hpp"
#include "backforth/families.hpp"

namespace backforth::testing {

/// Q = {0,1}, P = {2}, R_0 = {(0,2)}.
inline Structure s_rigid() { return make_structure(Vocabulary{1}, 3, {2}, {0, 1}, {{{0, 2}}}, "S_rigid"); }

/// Two Q points, no P, one empty relation.
inline Structure s_swap(std::size_t q = 2) {
  IdSet Q(q);
  std::iota(Q.begin(), Q.end(), 0);
  return make_structure(Vocabulary{1}, q, {}, Q, {{}}, "swap");
}

inline Structure random_structure(std::mt19937_64& rng, std::size_t size, std::size_t relCount, double density) {
  std::bernoulli_distribution isP(0.5), edge(density);
  IdSet P, Q;
  for (ElementId x = 0; x < size; ++x) (isP(rng) ? P : Q).push_back(x);
  std::vector<PairSet> rels(relCount);
  for (auto& rel : rels)
    for (auto q : Q)
      for (auto p : P)
        if (edge(rng)) rel.emplace_back(q, p);
  return make_structure(Vocabulary{relCount}, size, P, Q, rels, "random");
}

/// Textbook game: Spoiler may pick any element on either side, played or
/// not, and Duplicator any element on the other side. No memo, no pruning.
class NaiveEf {
 public:
  NaiveEf(const Structure& s, const Structure& t) : s_(s), t_(t) {}

  bool duplicator_wins(std::vector<IdPair> pos, std::size_t rounds) const {
    if (!consistent(pos)) return false;
    if (rounds == 0) return true;
    for (ElementId x = 0; x < s_.size(); ++x) {
      bool answered = false;
      for (ElementId y = 0; y < t_.size() && !answered; ++y) {
        pos.emplace_back(x, y);
        answered = duplicator_wins(pos, rounds - 1);
        pos.pop_back();
      }
      if (!answered) return false;
    }
    for (ElementId y = 0; y < t_.size(); ++y) {
      bool answered = false;
      for (ElementId x = 0; x < s_.size() && !answered; ++x) {
        pos.emplace_back(x, y);
        answered = duplicator_wins(pos, rounds - 1);
        pos.pop_back();
      }
      if (!answered) return false;
    }
    return true;
  }

 private:
  /// Position as a set of pairs: must be a well-defined injective map that
  /// preserves P and every relation in both directions.
  bool consistent(const std::vector<IdPair>& pos) const {
    for (const auto& [a, b] : pos) {
      if (s_.in_P(a) != t_.in_P(b)) return false;
      for (const auto& [c, d] : pos) {
        if ((a == c) != (b == d)) return false;
        for (std::size_t n = 0; n < s_.rel_count(); ++n)
          if (s_.holds(n, a, c) != t_.holds(n, b, d)) return false;
      }
    }
    return true;
  }

  const Structure& s_;
  const Structure& t_;
};

/// Counts automorphisms by trying every permutation.
inline std::uint64_t brute_force_automorphisms(const Structure& s) {
  std::vector<ElementId> perm(s.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::uint64_t count = 0;
  do {
    bool ok = true;
    for (ElementId x = 0; x < s.size() && ok; ++x) ok = s.in_P(x) == s.in_P(perm[x]);
    for (std::size_t n = 0; n < s.rel_count() && ok; ++n) {
      for (const auto& [a, b] : s.rel(n))
        if (!s.holds(n, perm[a], perm[b])) {
          ok = false;
          break;
        }
    }
    count += ok ? 1 : 0;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return count;
}

/// Random family of `count` subsets of {0..base-1}.
inline SetFamily random_family(std::mt19937_64& rng, std::size_t base, std::size_t count, double density) {
  std::bernoulli_distribution in(density);
  SetFamily f;
  f.base = base;
  for (std::size_t k = 0; k < count; ++k) {
    PointSet set(base);
    for (std::size_t i = 0; i < base; ++i) set.set(i, in(rng));
    f.add("S" + std::to_string(k), std::move(set));
  }
  return f;
}

/// Number of disjoint (F0, F1) with 1 <= |F0 u F1| <= d over a family of size m.
inline std::uint64_t combination_count(std::size_t m, std::size_t d) {
  std::uint64_t total = 0;
  for (std::size_t k = 1; k <= std::min(m, d); ++k) {
    std::uint64_t binom = 1;
    for (std::size_t i = 0; i < k; ++i) binom = binom * (m - i) / (i + 1);
    total += binom << k;
  }
  return total;
}

/// Reference parameters scaled down for tests that need a passing sequence:
/// N = 2^(W+1) keeps the omega rows separating.
inline TruncationParams small_params() {
  TruncationParams p;
  p.N = 16;
  p.W = 3;
  p.Lambda = 48;
  p.c = 2;
  p.d = 1;
  p.s = 1;
  p.m_cap = 2;
  p.n_cap = 1;
  p.t = 1;
  p.seed = 7;
  p.retries = 50;
  return p;
}

}  // namespace backforth::testing
