#pragma once

// The structures N2, N1, M1, M2 and M_Z built from a good sequence.
//
// Id layout: b_0..b_{N-1} first, then the c's ascending by index, then c_Omega
// when present. Restrictions keep this order.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "backforth/core.hpp"
#include "backforth/families.hpp"

namespace backforth {

struct IndexSet {
  std::vector<std::size_t> ordinaries;  // ascending
  bool includeOmega = false;

  /// Sorts and dedupes; throws ValidationError on indices >= lambda.
  void normalize(std::size_t lambda);
  friend bool operator==(const IndexSet&, const IndexSet&) = default;
};

struct Role {
  enum class Kind { B, C, Omega };
  Kind kind = Kind::B;
  std::size_t index = 0;  // i for b_i, alpha for c_alpha; unused for Omega

  std::string label() const;  // "b:<i>", "c:<alpha>", "c:omega"
  static Role parse(const std::string& label);
  friend bool operator==(const Role&, const Role&) = default;
};

struct BuiltStructure {
  Structure structure;
  std::vector<Role> layout;  // by element id

  std::optional<ElementId> find(const Role& role) const;
  std::optional<ElementId> omega() const { return find(Role{Role::Kind::Omega, 0}); }
  std::vector<ElementId> b_ids() const;
  std::vector<ElementId> c_ids() const;  // ordinary c's only

  /// Throws ValidationError if the layout disagrees with P/Q.
  void validate() const;
  friend bool operator==(const BuiltStructure&, const BuiltStructure&) = default;
};

/// Induced sub-structure keeping the given ids; layout follows.
BuiltStructure restrict_built(const BuiltStructure& b, std::span<const ElementId> keep, std::string name);
BuiltStructure reduct_built(const BuiltStructure& b, std::size_t m);

BuiltStructure build_N2(const GoodSequence& g);
BuiltStructure build_N1(const GoodSequence& g);
BuiltStructure build_M1(const GoodSequence& g, IndexSet x);
BuiltStructure build_M2(const GoodSequence& g, IndexSet x);
BuiltStructure build_MZ(const GoodSequence& g, IndexSet z);

/// Thins every residue class to a cPrime/c share while keeping each schedule
/// pattern represented. The sub-sequence must pass every check the full
/// sequence passes (prefix traces at multiplicity cPrime). Reseeds up to
/// `retries` times; throws ValidationError if no sample survives.
IndexSet sample_X(const GoodSequence& g, std::size_t cPrime, std::uint64_t seed, std::size_t retries = 20,
                  const VerifyOptions& opts = {});

/// Every residue class k < W holds at least cReq members of z.ordinaries.
bool is_robust(const IndexSet& z, const GoodSequence& g, std::size_t cReq);

}  // namespace backforth
