#pragma once

// Finite relational structures over the vocabulary {P, Q, R_0 .. R_{k-1}}.
//
// Elements are dense ids 0..n-1. P and Q are complementary unary predicates and
// every binary relation is a subset of Q x P. Structures are immutable values;
// every way of obtaining one goes through make_structure's validation.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "backforth/errors.hpp"

namespace backforth {

using ElementId = std::uint32_t;
using IdSet = std::vector<ElementId>;
using IdPair = std::pair<ElementId, ElementId>;
using PairSet = std::vector<IdPair>;

struct Vocabulary {
  std::size_t relCount = 1;

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;
};

class Structure {
 public:
  Structure() = default;

  const std::string& name() const { return name_; }
  const Vocabulary& vocab() const { return vocab_; }
  std::size_t rel_count() const { return vocab_.relCount; }
  std::size_t size() const { return inP_.size(); }

  const IdSet& P() const { return P_; }
  const IdSet& Q() const { return Q_; }
  bool in_P(ElementId x) const { return inP_[x] != 0; }
  bool in_Q(ElementId x) const { return inP_[x] == 0; }

  /// Sorted pair set of relation n.
  const PairSet& rel(std::size_t n) const { return rels_[n]; }
  const std::vector<PairSet>& rels() const { return rels_; }

  bool holds(std::size_t n, ElementId x, ElementId y) const;
  /// Sorted y with (x, y) in R_n.
  std::span<const ElementId> out(std::size_t n, ElementId x) const;
  /// Sorted x with (x, y) in R_n.
  std::span<const ElementId> in(std::size_t n, ElementId y) const;

  /// Equal in everything except the name.
  bool same_shape(const Structure& other) const;

  friend bool operator==(const Structure& a, const Structure& b) {
    return a.name_ == b.name_ && a.same_shape(b);
  }

  Structure renamed(std::string name) const;

 private:
  friend Structure make_structure(Vocabulary, std::size_t, IdSet, IdSet, std::vector<PairSet>,
                                  std::string);

  std::string name_;
  Vocabulary vocab_;
  IdSet P_;
  IdSet Q_;
  std::vector<std::uint8_t> inP_;
  std::vector<PairSet> rels_;
  // Per relation CSR adjacency, forward and backward.
  std::vector<std::vector<std::size_t>> outStart_, inStart_;
  std::vector<std::vector<ElementId>> outAdj_, inAdj_;
};

/// Validates and builds a structure. Input sets may be unsorted; duplicates
/// are collapsed. Throws ValidationError on overlapping or non-covering P/Q,
/// out-of-range ids, relation pairs outside Q x P, or a wrong number of
/// relations.
Structure make_structure(Vocabulary vocab, std::size_t domainSize, IdSet P, IdSet Q,
                         std::vector<PairSet> rels, std::string name = {});

/// Keeps relations R_0..R_m.
Structure reduct(const Structure& s, std::size_t m);

struct Restriction {
  Structure structure;
  /// original[newId] = old id; ascending.
  std::vector<ElementId> original;
  /// Inverse of `original`; nullopt for dropped elements.
  std::vector<std::optional<ElementId>> renumber;
};

/// Induced substructure on `keep`, renumbered densely by ascending old id.
Restriction restrict(const Structure& s, std::span<const ElementId> keep);

/// Deterministic JSON text (one line, trailing newline).
std::string encode(const Structure& s);
/// Throws DecodeError with the offending location on malformed input.
Structure decode(std::string_view text);

/// Injective partial function between the elements of two structures.
class PartialMap {
 public:
  PartialMap() = default;
  /// Throws ValidationError if not functional or not injective.
  explicit PartialMap(std::vector<IdPair> pairs);

  const std::vector<IdPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

  std::optional<ElementId> image(ElementId src) const;
  std::optional<ElementId> preimage(ElementId dst) const;
  bool has_source(ElementId src) const { return image(src).has_value(); }
  bool has_target(ElementId dst) const { return preimage(dst).has_value(); }

  /// Copy with one more pair; throws ValidationError on a conflict.
  PartialMap with(ElementId src, ElementId dst) const;
  PartialMap inverse() const;

  friend bool operator==(const PartialMap&, const PartialMap&) = default;

 private:
  std::vector<IdPair> pairs_;  // sorted by source
};

}  // namespace backforth
