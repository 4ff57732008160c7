#pragma once

// Automorphism and isomorphism search by individualization and colour
// refinement. Refinement only prunes; every reported map is verified at the
// leaf, and every isomorphism is reached by exactly one leaf.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "backforth/core.hpp"
#include "backforth/families.hpp"
#include "backforth/paperstructs.hpp"

namespace backforth {

using Bijection = std::vector<ElementId>;  // image of each element

struct AutSearchStats {
  std::uint64_t nodes = 0;
  std::uint64_t prunes = 0;  // branches cut by colour-class mismatch
  std::uint64_t leaves = 0;
};

struct AutReport {
  std::uint64_t automorphismCount = 0;  // exact when !limitExceeded
  bool limitExceeded = false;
  std::optional<Bijection> nontrivialWitness;
  std::vector<Bijection> found;  // every automorphism found, identity included
  AutSearchStats searchStats;
};

/// Counts automorphisms up to `limit` (search stops once the count reaches it).
AutReport automorphisms(const Structure& s, std::uint64_t limit);

bool is_rigid(const Structure& s);

/// Some isomorphism s -> t, if any.
std::optional<Bijection> isomorphic(const Structure& s, const Structure& t);

/// Checks that `map` is a bijection preserving P, Q and every relation.
bool is_isomorphism(const Structure& s, const Structure& t, const Bijection& map);

/// The three structural facts behind rigidity of structures containing c_Omega:
/// c_Omega is the only c active in every relation; the omega rows separate
/// every pair of b's; the R_0 rows of the ordinary c's are pairwise distinct.
/// Throws ValidationError when c_Omega is absent.
VerifyReport rigidity_lemmas(const BuiltStructure& m, const GoodSequence& g);

struct CensusCell {
  bool isomorphic = false;
  std::optional<Bijection> witness;
};

struct CensusResult {
  std::vector<IndexSet> zs;
  std::vector<std::vector<CensusCell>> matrix;

  bool diagonal_isomorphic() const;
  bool off_diagonal_nonisomorphic() const;
  bool symmetric() const;
};

/// Pairwise isomorphism over the M_Z structures. Every Z must be robust at
/// cReq and contain Omega (ValidationError otherwise).
CensusResult census(const GoodSequence& g, const std::vector<IndexSet>& zs, std::size_t cReq,
                    bool parallel = false);

}  // namespace backforth
