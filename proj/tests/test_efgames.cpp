#include <gtest/gtest.h>

#include <random>

#include "backforth/autiso.hpp"
#include "backforth/efgames.hpp"
#include "support.hpp"

using namespace backforth;
using backforth::testing::NaiveEf;
using backforth::testing::random_structure;
using backforth::testing::s_rigid;
using backforth::testing::s_swap;
using backforth::testing::small_params;

namespace {

const GoodSequence& small_sequence() {
  static const GoodSequence g = build_good_sequence(small_params());
  return g;
}

const GoodSequence& p0_sequence() {
  static const GoodSequence g = construct_good_sequence(default_params(), 0);
  return g;
}

bool dup(const GameResult& r) { return r.winner == Winner::Duplicator; }

}  // namespace

TEST(PartialIso, Basics) {
  const Structure s = s_rigid();
  EXPECT_TRUE(partial_iso_check(s, s, PartialMap{}));
  EXPECT_TRUE(partial_iso_check(s, s, PartialMap({{0, 0}, {1, 1}, {2, 2}})));
  // b_0 is R_0-related to the c, b_1 is not.
  EXPECT_FALSE(partial_iso_check(s, s, PartialMap({{0, 1}, {2, 2}})));
  EXPECT_FALSE(partial_iso_check(s, s, PartialMap({{0, 2}})));
  EXPECT_THROW(partial_iso_check(s, s, PartialMap({{0, 3}})), ValidationError);
}

TEST(EfDecide, MirrorStrategy) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const Structure s = random_structure(rng, 8, 2, 0.4);
    for (std::size_t r = 0; r <= 4; ++r) {
      const auto res = ef_decide(s, s, GameConfig{r, {}});
      EXPECT_TRUE(dup(res));
      EXPECT_TRUE(ef_certificate_check(s, s, GameConfig{r, {}}, res.certificate));
    }
  }
}

TEST(EfDecide, CountingPigeonhole) {
  const Structure two = s_swap(2), three = s_swap(3);
  EXPECT_TRUE(dup(ef_decide(two, three, GameConfig{2, {}})));
  const auto res = ef_decide(two, three, GameConfig{3, {}});
  EXPECT_FALSE(dup(res));
  EXPECT_TRUE(ef_certificate_check(two, three, GameConfig{3, {}}, res.certificate));
}

TEST(EfDecide, BadPinsLoseImmediately) {
  const Structure s = s_rigid();
  const GameConfig cfg{2, PartialMap({{0, 1}, {2, 2}})};
  const auto res = ef_decide(s, s, cfg);
  EXPECT_FALSE(dup(res));
  EXPECT_TRUE(ef_certificate_check(s, s, cfg, res.certificate));
}

TEST(EfDecide, BudgetIsExplicit) {
  std::mt19937_64 rng(42);
  const Structure s = random_structure(rng, 12, 2, 0.5);
  EXPECT_THROW(ef_decide(s, s, GameConfig{3, {}}, EfOptions{10, true}), BudgetExceeded);
}

TEST(EfDecide, AgreesWithNaiveSolver) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 60; ++trial) {
    const Structure s = random_structure(rng, 1 + rng() % 7, 1 + rng() % 2, 0.5);
    const Structure t = random_structure(rng, 1 + rng() % 7, s.rel_count(), 0.5);
    const std::size_t r = 1 + rng() % 3;
    const auto res = ef_decide(s, t, GameConfig{r, {}});
    EXPECT_EQ(dup(res), NaiveEf(s, t).duplicator_wins({}, r)) << "trial " << trial;
    EXPECT_TRUE(ef_certificate_check(s, t, GameConfig{r, {}}, res.certificate));
  }
}

TEST(EfDecide, SideSymmetryAndMonotonicity) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 30; ++trial) {
    const Structure s = random_structure(rng, 3 + rng() % 6, 1, 0.5);
    const Structure t = random_structure(rng, 3 + rng() % 6, 1, 0.5);
    bool previous = true;
    for (std::size_t r = 0; r <= 3; ++r) {
      const bool forward = dup(ef_decide(s, t, GameConfig{r, {}}));
      EXPECT_EQ(forward, dup(ef_decide(t, s, GameConfig{r, {}})));
      if (!previous) EXPECT_FALSE(forward);
      previous = forward;
    }
  }
}

TEST(EfDecide, IsomorphicStructuresSurviveFullLength) {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 10; ++trial) {
    const Structure s = random_structure(rng, 6, 1, 0.5);
    std::vector<ElementId> perm{0, 1, 2, 3, 4, 5};
    std::shuffle(perm.begin(), perm.end(), rng);
    IdSet P, Q;
    for (auto x : s.P()) P.push_back(perm[x]);
    for (auto x : s.Q()) Q.push_back(perm[x]);
    PairSet rel;
    for (const auto& [a, b] : s.rel(0)) rel.emplace_back(perm[a], perm[b]);
    const Structure t = make_structure(s.vocab(), 6, P, Q, {rel});
    ASSERT_TRUE(isomorphic(s, t).has_value());
    EXPECT_TRUE(dup(ef_decide(s, t, GameConfig{6, {}})));
  }
}

TEST(Certificate, RejectsMissingBranch) {
  const Structure two = s_swap(2), three = s_swap(3);
  const GameConfig cfg{2, {}};
  auto res = ef_decide(two, three, cfg);
  ASSERT_TRUE(res.certificate.duplicator.has_value());
  EXPECT_TRUE(ef_certificate_check(two, three, cfg, res.certificate));
  res.certificate.duplicator->entries.pop_back();
  EXPECT_FALSE(ef_certificate_check(two, three, cfg, res.certificate));
}

TEST(Certificate, RejectsSpoilerLeafAtIsomorphism) {
  const Structure s = s_rigid();
  Certificate cert;
  cert.winner = Winner::Spoiler;
  cert.spoiler = SpoilerNode{};
  EXPECT_FALSE(ef_certificate_check(s, s, GameConfig{1, {}}, cert));
}

TEST(Certificate, RejectsWrongWinner) {
  const Structure two = s_swap(2), three = s_swap(3);
  auto res = ef_decide(two, three, GameConfig{3, {}});
  res.certificate.winner = Winner::Duplicator;
  EXPECT_FALSE(ef_certificate_check(two, three, GameConfig{3, {}}, res.certificate));
}

TEST(ProofFamily, Membership) {
  const auto& g = p0_sequence();
  const IndexSet x = sample_X(g, 1, 3);
  const auto ctx = make_proof_context(g, ProofVariant{ProofVariant::Kind::M1N1, 1, std::nullopt}, x);
  EXPECT_TRUE(proof_family_contains(ctx, PartialMap{}));

  // Residue 1 against residue 2.
  ElementId left1 = 0, right2 = 0;
  for (ElementId c : ctx.left.c_ids())
    if (g.residue(ctx.left.layout[c].index) == 1) {
      left1 = c;
      break;
    }
  for (ElementId c : ctx.right.c_ids())
    if (g.residue(ctx.right.layout[c].index) == 2) {
      right2 = c;
      break;
    }
  EXPECT_FALSE(proof_family_contains(ctx, PartialMap({{left1, right2}})));
}

TEST(ProofFamily, PinIsExempt) {
  const auto& g = p0_sequence();
  for (std::size_t m = 0; m < g.params.W; ++m) {
    const auto ctx = make_proof_context(g, ProofVariant{ProofVariant::Kind::N1N2, m, std::nullopt}, {});
    ASSERT_EQ(ctx.pins.size(), 1u);
    EXPECT_EQ(ctx.left.layout[ctx.pins.pairs()[0].first].label(), "c:" + std::to_string(m));
    EXPECT_EQ(ctx.right.layout[ctx.pins.pairs()[0].second].label(), "c:omega");
    EXPECT_TRUE(proof_family_contains(ctx, ctx.pins));
    EXPECT_FALSE(proof_family_contains(ctx, PartialMap{}));
  }
}

TEST(ProofExtend, FirstBIsIdentity) {
  const auto& g = p0_sequence();
  const auto ctx = make_proof_context(g, ProofVariant{ProofVariant::Kind::M1N1, 0, std::nullopt}, sample_X(g, 1, 3));
  for (ElementId b = 0; b < g.params.N; b += 9) {
    const auto f = proof_extend(ctx, PartialMap{}, Challenge{Side::Left, b});
    EXPECT_EQ(f.image(b), b);
    const auto h = proof_extend(ctx, PartialMap{}, Challenge{Side::Right, b});
    EXPECT_EQ(h.preimage(b), b);
  }
}

TEST(ProofExtend, RejectsPlayedChallenge) {
  const auto& g = p0_sequence();
  const auto ctx = make_proof_context(g, ProofVariant{ProofVariant::Kind::M1N1, 0, std::nullopt}, sample_X(g, 1, 3));
  const auto f = proof_extend(ctx, PartialMap{}, Challenge{Side::Left, 3});
  EXPECT_THROW(proof_extend(ctx, f, Challenge{Side::Left, 3}), ValidationError);
}

TEST(ProofExtend, RandomSmallPositionsAtP0) {
  const auto& g = p0_sequence();
  const auto ctx = make_proof_context(g, ProofVariant{ProofVariant::Kind::M1N1, 0, std::nullopt}, sample_X(g, 1, 3));
  std::mt19937_64 rng(46);
  const auto leftSize = ctx.left.structure.size(), rightSize = ctx.right.structure.size();
  auto random_challenge = [&](const PartialMap& f, bool cOnly) {
    for (;;) {
      const bool left = rng() & 1;
      const auto x = static_cast<ElementId>(rng() % (left ? leftSize : rightSize));
      const auto& layout = left ? ctx.left.layout : ctx.right.layout;
      if (cOnly && layout[x].kind == Role::Kind::B) continue;
      if (left ? f.has_source(x) : f.has_target(x)) continue;
      return Challenge{left ? Side::Left : Side::Right, x};
    }
  };
  for (int trial = 0; trial < 200; ++trial) {
    PartialMap f;
    const int size = static_cast<int>(rng() % 3);
    for (int i = 0; i < size; ++i) f = proof_extend(ctx, f, random_challenge(f, false));
    const auto next = proof_extend(ctx, f, random_challenge(f, true));
    EXPECT_TRUE(proof_family_contains(ctx, next));
    EXPECT_EQ(next.size(), f.size() + 1);
  }
}

TEST(VerifyBackAndForth, ZeroRoundsIsVacuous) {
  const auto& g = p0_sequence();
  const auto ctx = make_proof_context(g, ProofVariant{ProofVariant::Kind::N1N2, 2, std::nullopt}, {});
  const auto report = verify_back_and_forth(ctx, 0);
  EXPECT_TRUE(report.pass);
  EXPECT_EQ(report.checks[0].examined, 0u);
}

TEST(VerifyBackAndForth, ImpliesDuplicatorWin) {
  const auto& g = small_sequence();
  const IndexSet x = sample_X(g, 1, 3);
  std::size_t passes = 0;
  for (std::size_t m = 0; m < g.params.W; ++m)
    for (auto kind : {ProofVariant::Kind::M1N1, ProofVariant::Kind::N1N2}) {
      const auto ctx = make_proof_context(g, ProofVariant{kind, m, std::nullopt}, x);
      for (std::size_t rounds = 1; rounds <= 2; ++rounds) {
        const bool bf = verify_back_and_forth(ctx, rounds).pass;
        const auto res = ef_decide(ctx.left.structure, ctx.right.structure, GameConfig{rounds, ctx.pins});
        if (bf) {
          ++passes;
          EXPECT_TRUE(dup(res)) << ctx.variant.label() << " rounds " << rounds;
        }
      }
    }
  EXPECT_GT(passes, 0u);
}

TEST(EfDecide, ShrunkenInstanceAgreesWithNaive) {
  const auto& g = small_sequence();
  const IndexSet x = sample_X(g, 1, 3);
  const auto m1 = build_M1(g, x), m2 = build_M2(g, x);
  for (std::size_t m = 0; m < g.params.W; ++m) {
    const Structure s = reduct(m1.structure, m), t = reduct(m2.structure, m);
    const auto res = ef_decide(s, t, GameConfig{2, {}});
    EXPECT_EQ(dup(res), NaiveEf(s, t).duplicator_wins({}, 2)) << "m=" << m;
    EXPECT_TRUE(ef_certificate_check(s, t, GameConfig{2, {}}, res.certificate));
  }
}
