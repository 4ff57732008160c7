#pragma once

// Back-and-forth (Ehrenfeucht–Fraïssé) games between finite structures.
//
// Conventions: the left structure is S, the right one T. A position is a
// partial isomorphism from S to T. Each round Spoiler picks an element not yet
// played on either side and Duplicator answers with an unplayed element on the
// other side; the extended map must remain a partial isomorphism. Picking an
// already-played element never helps Spoiler, so it is not a legal move here.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "backforth/core.hpp"
#include "backforth/families.hpp"
#include "backforth/paperstructs.hpp"

namespace backforth {

enum class Side { Left, Right };
enum class Winner { Duplicator, Spoiler };

struct GameConfig {
  std::size_t rounds = 0;
  PartialMap pins;
};

/// Duplicator strategy tree. `entries` answer every legal challenge at this
/// position; children hold the strategy one round deeper.
struct DuplicatorNode {
  struct Entry {
    Side side = Side::Left;
    ElementId challenge = 0;
    ElementId response = 0;
    std::vector<DuplicatorNode> next;  // one node, or empty in the last round
  };
  std::vector<Entry> entries;
};

/// Spoiler strategy tree: one challenge, then a subtree for every response
/// that keeps the position a partial isomorphism.
struct SpoilerNode {
  bool leaf = true;  // true: the position is already not a partial isomorphism
  Side side = Side::Left;
  ElementId challenge = 0;
  struct Reply {
    ElementId response = 0;
    std::vector<SpoilerNode> next;  // exactly one element
  };
  std::vector<Reply> replies;
};

struct Certificate {
  Winner winner = Winner::Duplicator;
  std::optional<DuplicatorNode> duplicator;
  std::optional<SpoilerNode> spoiler;
};

struct SearchStats {
  std::uint64_t nodes = 0;
  std::uint64_t memoHits = 0;
  std::uint64_t collapsedChallenges = 0;
};

struct GameResult {
  Winner winner = Winner::Duplicator;
  Certificate certificate;
  SearchStats stats;
};

struct EfOptions {
  std::uint64_t budget = 500'000'000;
  bool certificate = true;
};

/// Default node budget: BACKFORTH_BUDGET when set, else EfOptions{}.budget.
std::uint64_t default_budget();

/// Relation- and predicate-preserving injective partial map, both ways.
/// Throws ValidationError on out-of-range ids.
bool partial_iso_check(const Structure& s, const Structure& t, const PartialMap& f);

/// Exact decision of the rounds-round game from cfg.pins. Throws
/// BudgetExceeded when more than opts.budget search nodes are needed.
GameResult ef_decide(const Structure& s, const Structure& t, const GameConfig& cfg, const EfOptions& opts = {});

/// Replays a certificate; true iff it is a winning strategy for its winner.
bool ef_certificate_check(const Structure& s, const Structure& t, const GameConfig& cfg, const Certificate& cert);

// The map family F used to certify Duplicator wins structurally.

struct ProofVariant {
  enum class Kind { N1N2, M1N1 };
  Kind kind = Kind::M1N1;
  std::size_t m = 0;  // reduct level
  /// N1N2 only: ordinary index of the pinned c (mapped to c_Omega and exempt
  /// from the residue congruence). Defaults to m.
  std::optional<std::size_t> pinSource;

  std::size_t pin_source() const { return pinSource.value_or(m); }
  std::string label() const;
};

struct ProofContext {
  ProofVariant variant;
  BuiltStructure left;   // N1 or M1, reduced to tau_m
  BuiltStructure right;  // N2 or N1, reduced to tau_m
  std::size_t W = 0;
  PartialMap pins;

  std::size_t residue(std::size_t alpha) const { return alpha % W; }
};

/// Builds the two reducts for a variant. `x` is only read for M1N1.
ProofContext make_proof_context(const GoodSequence& g, const ProofVariant& variant, const IndexSet& x);

struct Challenge {
  Side side = Side::Left;
  ElementId element = 0;
};

class NoExtension : public Error {
 public:
  explicit NoExtension(std::string what) : Error(std::move(what)) {}
};

/// Relation-preserving, residue-congruent, and (for N1N2) pinned.
bool proof_family_contains(const ProofContext& ctx, const PartialMap& f);

/// Extends f by an answer to the challenge, staying inside F. Throws
/// NoExtension if no answer realizes the required trace, ValidationError if
/// f is not in F or the challenge is already covered.
PartialMap proof_extend(const ProofContext& ctx, const PartialMap& f, const Challenge& challenge);

/// Checks that proof_extend succeeds from every position reachable from the
/// pins in fewer than `rounds` moves, for every challenge. Exhaustive up to
/// `budget` extension attempts, otherwise random play-outs.
VerifyReport verify_back_and_forth(const ProofContext& ctx, std::size_t rounds, std::uint64_t budget = 10'000'000,
                                   std::uint64_t seed = 1);

}  // namespace backforth
