#include <gtest/gtest.h>

#include <random>

#include "backforth/families.hpp"
#include "support.hpp"

using namespace backforth;
using backforth::testing::combination_count;
using backforth::testing::random_family;
using backforth::testing::small_params;

namespace {

PointSet set_of(std::size_t base, std::vector<std::size_t> members) { return PointSet::from_members(base, members); }

/// Direct count of the combination over explicit point iteration.
std::size_t count_combination(const SetFamily& f, const std::vector<std::size_t>& idx, std::uint64_t signs) {
  std::size_t n = 0;
  for (std::size_t x = 0; x < f.base; ++x) {
    bool in = true;
    for (std::size_t j = 0; j < idx.size() && in; ++j) in = f.sets[idx[j]].test(x) == (((signs >> j) & 1u) != 0);
    n += in ? 1 : 0;
  }
  return n;
}

}  // namespace

TEST(PerfectIndependent, BitConvention) {
  const auto f = perfect_independent(2);
  EXPECT_EQ(f.base, 4u);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f.sets[0].members(), std::vector<std::size_t>({1, 3}));
  EXPECT_EQ(f.sets[1].members(), std::vector<std::size_t>({2, 3}));
  EXPECT_EQ(count_combination(f, {0, 1}, 0b01), 1u);
}

TEST(PerfectIndependent, ExactCombinationCounts) {
  for (std::size_t m = 1; m <= 4; ++m) {
    const auto f = perfect_independent(m);
    for (std::uint64_t subset = 1; subset < (1u << m); ++subset) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < m; ++i)
        if ((subset >> i) & 1u) idx.push_back(i);
      for (std::uint64_t signs = 0; signs < (1u << idx.size()); ++signs)
        EXPECT_EQ(count_combination(f, idx, signs), std::size_t{1} << (m - idx.size()));
    }
    const auto report = verify_independence(f, m, 1);
    EXPECT_TRUE(report.pass);
    EXPECT_EQ(report.checks[0].mode, CheckMode::Exhaustive);
  }
}

TEST(PerfectIndependent, RangeChecked) {
  EXPECT_THROW(perfect_independent(0), ValidationError);
  EXPECT_THROW(perfect_independent(21), ValidationError);
}

TEST(VerifyIndependence, DuplicateSetsFailWithWitness) {
  SetFamily f;
  f.base = 3;
  f.add("A", set_of(3, {0, 1}));
  f.add("B", set_of(3, {0, 1}));
  const auto report = verify_independence(f, 2, 1);
  ASSERT_FALSE(report.pass);
  const auto& w = report.checks[0].detail["witness"];
  EXPECT_EQ(w["F0"], nlohmann::ordered_json::array({"A"}));
  EXPECT_EQ(w["F1"], nlohmann::ordered_json::array({"B"}));
  EXPECT_EQ(w["size"], 0);
}

TEST(VerifyIndependence, CountsEveryCombination) {
  std::mt19937_64 rng(21);
  const auto f = random_family(rng, 12, 9, 0.5);
  for (std::size_t d = 1; d <= 4; ++d) {
    const auto report = verify_independence(f, d, 1);
    EXPECT_EQ(report.checks[0].examined, combination_count(9, d));
  }
}

TEST(VerifyIndependence, AgreesWithDirectEnumeration) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const auto f = random_family(rng, 10, 6, 0.5);
    const std::size_t d = 1 + rng() % 3, s = 1 + rng() % 2;
    bool expect = true;
    for (std::uint64_t subset = 1; subset < 64; ++subset) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < 6; ++i)
        if ((subset >> i) & 1u) idx.push_back(i);
      if (idx.size() > d) continue;
      for (std::uint64_t signs = 0; signs < (1u << idx.size()); ++signs)
        expect = expect && count_combination(f, idx, signs) >= s;
    }
    EXPECT_EQ(verify_independence(f, d, s).pass, expect);
  }
}

TEST(VerifyIndependence, SampledModeIsFlaggedAndSound) {
  std::mt19937_64 rng(23);
  VerifyOptions small;
  small.budget = 100;
  small.samples = 50;
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_family(rng, 8, 10, 0.5);
    const auto exhaustive = verify_independence(f, 2, 1);
    const auto sampled = verify_independence(f, 2, 1, small);
    ASSERT_EQ(sampled.checks[0].mode, CheckMode::Sampled);
    EXPECT_EQ(sampled.checks[0].examined, 50u);
    if (!exhaustive.pass) continue;
    EXPECT_TRUE(sampled.pass);
  }
}

TEST(Improve, ForcesEveryTrace) {
  std::mt19937_64 rng(31);
  const auto f = random_family(rng, 5, 4, 0.5);
  const auto g = improve(f, 1, 2, 9);
  std::size_t with0 = 0;
  for (const auto& s : g.sets) with0 += s.test(0) ? 1 : 0;
  EXPECT_GE(with0, 2u);
  EXPECT_GE(g.size() - with0, 2u);
  EXPECT_EQ(g.base, f.base);
  EXPECT_EQ(g.size(), f.size());
}

TEST(Improve, TouchesOnlyThePrefix) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = rng() % 4, c = 1 + rng() % 3;
    const auto f = random_family(rng, 9, c * (1u << m) + rng() % 5, 0.5);
    const auto g = improve(f, m, c, rng());
    EXPECT_TRUE(verify_improved(g, m, c).pass);
    for (std::size_t k = 0; k < f.size(); ++k)
      for (std::size_t i = m; i < f.base; ++i) EXPECT_EQ(f.sets[k].test(i), g.sets[k].test(i));
  }
}

TEST(Improve, RejectsSmallFamilies) {
  std::mt19937_64 rng(33);
  const auto f = random_family(rng, 5, 7, 0.5);
  EXPECT_THROW(improve(f, 2, 2, 1), ValidationError);
}

TEST(VerifyImproved, EmptySetMissesTheFullTrace) {
  SetFamily f;
  f.base = 2;
  f.add("E", PointSet(2));
  const auto report = verify_improved(f, 1, 1);
  ASSERT_FALSE(report.pass);
  EXPECT_EQ(report.checks[0].detail["witness"]["u"], nlohmann::ordered_json::array({0}));
}

TEST(VerifyImproved, ZeroPrefixIsASizeCheck) {
  SetFamily f;
  f.base = 2;
  f.add("E", PointSet(2));
  f.add("F", set_of(2, {1}));
  EXPECT_TRUE(verify_improved(f, 0, 2).pass);
  EXPECT_FALSE(verify_improved(f, 0, 3).pass);
  EXPECT_EQ(verify_improved(f, 0, 3).checks[0].examined, 1u);
}

TEST(TruncationParams, Validation) {
  auto p = default_params();
  EXPECT_NO_THROW(p.validate());
  p.W = 1;
  EXPECT_THROW(p.validate(), ValidationError);
  p = default_params();
  p.Lambda = 100;
  EXPECT_THROW(p.validate(), ValidationError);
  p = default_params();
  p.t = p.d + 1;
  EXPECT_THROW(p.validate(), ValidationError);
  p = default_params();
  p.n_cap = p.W + 1;
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(GoodSequence, OmegaRowsAreBitRows) {
  TruncationParams p = small_params();
  p.N = 8;
  p.W = 2;
  p.Lambda = 12;
  const auto g = construct_good_sequence(p, 0);
  ASSERT_EQ(g.omega.size(), 3u);
  EXPECT_EQ(g.omega[0].members(), std::vector<std::size_t>({1, 3, 5, 7}));
  EXPECT_EQ(g.omega[1].members(), std::vector<std::size_t>({2, 3, 6, 7}));
  EXPECT_EQ(g.omega[2].members(), std::vector<std::size_t>({4, 5, 6, 7}));
}

TEST(GoodSequence, BuildPassesAtSmallParams) {
  const auto p = small_params();
  const auto g = build_good_sequence(p);
  EXPECT_EQ(g.rows.size(), p.Lambda * (p.W + 1));
  EXPECT_EQ(g.omega.size(), p.W + 1);
  const auto report = verify_good_sequence(g, p);
  EXPECT_TRUE(report.pass);
  ASSERT_EQ(report.checks.size(), 5u);
  for (const char* name : {"independence", "injectivity", "prefix_traces", "position_traces", "omega_separation"})
    EXPECT_NE(report.find(name), nullptr) << name;
}

TEST(GoodSequence, Reproducible) {
  const auto p = small_params();
  EXPECT_EQ(build_good_sequence(p), build_good_sequence(p));
  auto q = p;
  q.seed = 8;
  EXPECT_NE(construct_good_sequence(p, 0), construct_good_sequence(q, 0));
}

TEST(GoodSequence, EqualRowsBreakInjectivity) {
  const auto p = small_params();
  auto g = build_good_sequence(p);
  g.row(5, 2) = g.row(3, 1);
  const auto report = verify_good_sequence(g, p);
  const auto* inj = report.find("injectivity");
  ASSERT_NE(inj, nullptr);
  EXPECT_FALSE(inj->pass);
  EXPECT_EQ(inj->detail["witness"], nlohmann::ordered_json::array({"3,1", "5,2"}));
}

TEST(GoodSequence, TooManyPointsForOmegaRows) {
  auto p = small_params();
  p.N = 32;  // > 2^(W+1)
  const auto g = construct_good_sequence(p, 0);
  const auto* sep = verify_good_sequence(g, p).find("omega_separation");
  ASSERT_NE(sep, nullptr);
  EXPECT_FALSE(sep->pass);
  EXPECT_EQ(sep->mode, CheckMode::Exhaustive);
}

TEST(GoodSequence, PrefixTracesMonotone) {
  auto p = small_params();
  p.Lambda = 48;
  p.c = 3;
  p.n_cap = 2;
  p.m_cap = 1;
  const auto g = construct_good_sequence(p, 0);
  ASSERT_TRUE(verify_good_sequence(g, p).find("prefix_traces")->pass);
  for (std::size_t m = 0; m <= p.m_cap; ++m)
    for (std::size_t n = 0; n <= p.n_cap; ++n)
      for (std::size_t c = 1; c <= p.c; ++c) {
        auto q = p;
        q.m_cap = m;
        q.n_cap = n;
        q.c = c;
        EXPECT_TRUE(verify_good_sequence(g, q).find("prefix_traces")->pass) << m << n << c;
      }
}

TEST(GoodSequence, ScheduleCoversEveryPattern) {
  const auto p = default_params();
  std::vector<std::vector<std::size_t>> seen(p.W, std::vector<std::size_t>(schedule_period(p), 0));
  for (std::size_t a = 0; a < p.Lambda; ++a) ++seen[p.residue(a)][scheduled_pattern(p, a)];
  for (const auto& cls : seen)
    for (auto count : cls) EXPECT_GE(count, p.c);
}

TEST(GoodSequence, FamilyKeys) {
  const auto p = small_params();
  const auto f = as_family(construct_good_sequence(p, 0));
  EXPECT_EQ(f.size(), p.Lambda * (p.W + 1) + p.W + 1);
  EXPECT_EQ(f.keys.front(), "0,0");
  EXPECT_EQ(f.keys.back(), "omega,3");
}
