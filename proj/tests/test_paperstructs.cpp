#include <gtest/gtest.h>

#include "backforth/paperstructs.hpp"
#include "support.hpp"

using namespace backforth;
using backforth::testing::small_params;

namespace {

const GoodSequence& p0_sequence() {
  static const GoodSequence g = construct_good_sequence(default_params(), 0);
  return g;
}

const GoodSequence& small_sequence() {
  static const GoodSequence g = build_good_sequence(small_params());
  return g;
}

std::vector<ElementId> all_but_omega(const BuiltStructure& b) {
  std::vector<ElementId> keep;
  for (ElementId i = 0; i < b.structure.size(); ++i)
    if (b.layout[i].kind != Role::Kind::Omega) keep.push_back(i);
  return keep;
}

IndexSet all_ordinaries(const GoodSequence& g, bool omega) {
  IndexSet z;
  for (std::size_t a = 0; a < g.params.Lambda; ++a) z.ordinaries.push_back(a);
  z.includeOmega = omega;
  return z;
}

}  // namespace

TEST(Role, LabelsRoundTrip) {
  for (const Role& r : {Role{Role::Kind::B, 4}, Role{Role::Kind::C, 17}, Role{Role::Kind::Omega, 0}})
    EXPECT_EQ(Role::parse(r.label()), r);
  EXPECT_THROW(Role::parse("b:"), ValidationError);
  EXPECT_THROW(Role::parse("x:1"), ValidationError);
  EXPECT_THROW(Role::parse("c:1a"), ValidationError);
}

TEST(BuildN2, LayoutAndSizes) {
  const auto& g = p0_sequence();
  const auto& p = g.params;
  const auto n2 = build_N2(g);
  EXPECT_NO_THROW(n2.validate());
  EXPECT_EQ(n2.structure.size(), p.N + p.Lambda + 1);
  EXPECT_EQ(n2.structure.rel_count(), p.W + 1);
  EXPECT_EQ(n2.layout[0].label(), "b:0");
  EXPECT_EQ(n2.layout[p.N].label(), "c:0");
  EXPECT_EQ(n2.layout.back().label(), "c:omega");
  EXPECT_EQ(n2.omega(), static_cast<ElementId>(p.N + p.Lambda));
}

TEST(BuildN2, OnlyOmegaIsActiveInTopRelation) {
  const auto& g = p0_sequence();
  const auto n2 = build_N2(g);
  const auto& st = n2.structure;
  for (ElementId c : st.P()) {
    const bool active = !st.in(g.params.W, c).empty();
    EXPECT_EQ(active, c == *n2.omega()) << n2.layout[c].label();
  }
}

TEST(BuildN2, ResidueZeroOnlyInR0) {
  const auto& g = p0_sequence();
  const auto n2 = build_N2(g);
  const ElementId c0 = *n2.find(Role{Role::Kind::C, 0});
  EXPECT_FALSE(n2.structure.in(0, c0).empty());
  for (std::size_t n = 1; n <= g.params.W; ++n) EXPECT_TRUE(n2.structure.in(n, c0).empty());
}

TEST(BuildN2, RelationsReadTheRows) {
  const auto& g = p0_sequence();
  const auto& p = g.params;
  const auto n2 = build_N2(g);
  std::size_t r0 = g.omega[0].count();
  for (std::size_t a = 0; a < p.Lambda; ++a) r0 += g.row(a, 0).count();
  EXPECT_EQ(n2.structure.rel(0).size(), r0);
  for (std::size_t a = 0; a < p.Lambda; a += 7)
    for (std::size_t n = 0; n <= p.W; ++n)
      for (std::size_t i = 0; i < p.N; ++i)
        EXPECT_EQ(n2.structure.holds(n, static_cast<ElementId>(i), static_cast<ElementId>(p.N + a)),
                  n <= g.residue(a) && g.row(a, n).test(i));
}

TEST(BuildN1, IsN2WithoutOmega) {
  const auto& g = p0_sequence();
  const auto n2 = build_N2(g);
  const auto n1 = build_N1(g);
  EXPECT_EQ(n1.structure.size(), g.params.N + g.params.Lambda);
  EXPECT_EQ(restrict_built(n2, all_but_omega(n2), "N1"), n1);
  for (ElementId c : n1.structure.P()) EXPECT_TRUE(n1.structure.in(g.params.W, c).empty());
}

TEST(BuildMZ, Extremes) {
  const auto& g = p0_sequence();
  EXPECT_EQ(build_MZ(g, all_ordinaries(g, false)).structure.same_shape(build_N1(g).structure), true);
  IndexSet onlyOmega;
  onlyOmega.includeOmega = true;
  const auto m = build_MZ(g, onlyOmega);
  EXPECT_EQ(m.structure.size(), g.params.N + 1);
  EXPECT_EQ(m.structure.P().size(), 1u);
}

TEST(BuildMZ, NestedRestriction) {
  const auto& g = p0_sequence();
  IndexSet small{{1, 5, 9, 40}, true};
  IndexSet big{{0, 1, 2, 5, 9, 40, 77}, true};
  const auto mb = build_MZ(g, big);
  std::vector<ElementId> keep;
  for (ElementId i = 0; i < mb.layout.size(); ++i) {
    const Role& r = mb.layout[i];
    if (r.kind != Role::Kind::C || std::count(small.ordinaries.begin(), small.ordinaries.end(), r.index)) keep.push_back(i);
  }
  EXPECT_EQ(restrict_built(mb, keep, "MZ"), build_MZ(g, small));
  EXPECT_THROW(build_MZ(g, IndexSet{{192}, false}), ValidationError);
}

TEST(SampleX, FullMultiplicityKeepsEverything) {
  const auto& g = small_sequence();
  EXPECT_EQ(sample_X(g, g.params.c, 1), all_ordinaries(g, false));
}

TEST(SampleX, ThinnedSetPassesAtLowerMultiplicity) {
  const auto& g = small_sequence();
  const auto x = sample_X(g, 1, 3);
  EXPECT_EQ(x.ordinaries.size(), g.params.Lambda / g.params.c);
  for (auto a : x.ordinaries) EXPECT_LT(a, g.params.Lambda);
  auto thinned = g.params;
  thinned.c = 1;
  EXPECT_TRUE(verify_good_sequence(g, thinned, &x.ordinaries).pass);
  EXPECT_EQ(sample_X(g, 1, 3), x);
}

TEST(SampleX, P0Size) {
  const auto& g = p0_sequence();
  const auto x = sample_X(g, 1, 3);
  EXPECT_EQ(x.ordinaries.size(), g.params.Lambda / 3);
  EXPECT_EQ(build_M1(g, x).structure.size(), 64u + 64u);
}

TEST(BuildM1M2, DifferByOmega) {
  const auto& g = small_sequence();
  const auto x = sample_X(g, 1, 5);
  const auto m1 = build_M1(g, x);
  const auto m2 = build_M2(g, x);
  EXPECT_EQ(m2.structure.size(), m1.structure.size() + 1);
  EXPECT_EQ(restrict_built(m2, all_but_omega(m2), "M1"), m1);
  EXPECT_EQ(m1.structure.name(), "M1");
  EXPECT_EQ(m2.structure.name(), "M2");
}

TEST(IsRobust, Thresholds) {
  const auto& g = p0_sequence();
  EXPECT_TRUE(is_robust(all_ordinaries(g, true), g, g.params.c));
  IndexSet z;
  for (std::size_t a = 0; a < g.params.Lambda; ++a)
    if (g.residue(a) != 1) z.ordinaries.push_back(a);
  EXPECT_FALSE(is_robust(z, g, 1));

  IndexSet exact{{0, 3, 6, 1, 4, 7, 2, 5, 8}, true};
  EXPECT_TRUE(is_robust(exact, g, 3));
  exact.ordinaries.pop_back();
  EXPECT_FALSE(is_robust(exact, g, 3));
}
