#include "backforth/families.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>

#include "random.hpp"

namespace backforth {

namespace {

constexpr std::uint64_t kSat = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return a > kSat - b ? kSat : a + b; }
std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  return a > kSat / b ? kSat : a * b;
}

/// binom[x][j] = C(x, j), saturating; x <= n, j <= k.
std::vector<std::vector<std::uint64_t>> binomial_table(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::uint64_t>> t(n + 1, std::vector<std::uint64_t>(k + 1, 0));
  for (std::size_t x = 0; x <= n; ++x) {
    t[x][0] = 1;
    for (std::size_t j = 1; j <= k && j <= x; ++j) t[x][j] = sat_add(t[x - 1][j - 1], j <= x - 1 ? t[x - 1][j] : 0);
  }
  return t;
}

/// Colex unranking of a j-subset of {0..n-1}; result ascending.
void unrank_subset(const std::vector<std::vector<std::uint64_t>>& binom, std::size_t n, std::size_t j,
                   std::uint64_t rank, std::vector<std::size_t>& out) {
  out.assign(j, 0);
  std::size_t hi = n;  // exclusive bound for the next element
  for (std::size_t r = j; r >= 1; --r) {
    // Largest x < hi with C(x, r) <= rank.
    std::size_t lo = r - 1, up = hi - 1;
    while (lo < up) {
      const std::size_t mid = (lo + up + 1) / 2;
      if (binom[mid][r] <= rank)
        lo = mid;
      else
        up = mid - 1;
    }
    out[r - 1] = lo;
    rank -= binom[lo][r];
    hi = lo;
  }
}

struct IndexedRun {
  CheckMode mode = CheckMode::Exhaustive;
  std::uint64_t examined = 0;
  std::uint64_t failures = 0;
};

/// Exhaustive over [0, total) when total <= budget; otherwise `samples`
/// distinct indices uniformly at random, or, when the enumeration size is
/// saturated, `samples` independent draws from `draw`.
IndexedRun run_indexed(std::uint64_t total, const VerifyOptions& opts, std::uint64_t salt,
                       const std::function<bool(std::uint64_t)>& eval,
                       const std::function<bool(std::mt19937_64&)>& draw = {}) {
  IndexedRun run;
  if (total <= opts.budget) {
    for (std::uint64_t i = 0; i < total; ++i) {
      ++run.examined;
      if (!eval(i)) ++run.failures;
    }
    return run;
  }
  run.mode = CheckMode::Sampled;
  std::mt19937_64 rng(detail::mix_seed(opts.seed, salt));
  if (total == kSat && draw) {
    for (std::uint64_t i = 0; i < opts.samples; ++i) {
      ++run.examined;
      if (!draw(rng)) ++run.failures;
    }
    return run;
  }
  for (std::uint64_t i : detail::sample_without_replacement(rng, total, opts.samples)) {
    ++run.examined;
    if (!eval(i)) ++run.failures;
  }
  return run;
}

nlohmann::ordered_json keys_json(const SetFamily& f, const std::vector<std::size_t>& idx,
                                 std::uint64_t signs, bool positive) {
  auto arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (((signs >> i) & 1u) == static_cast<std::uint64_t>(positive)) arr.push_back(f.keys[idx[i]]);
  return arr;
}

std::vector<std::size_t> all_ordinaries(const GoodSequence& g) {
  std::vector<std::size_t> v(g.params.Lambda);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
  return v;
}

}  // namespace

void TruncationParams::validate() const {
  auto fail = [](const std::string& m) { throw ValidationError("invalid parameters: " + m); };
  if (W < 2) fail("W must be at least 2");
  if (Lambda == 0 || Lambda % W != 0) fail("W must divide Lambda (Lambda > 0)");
  if (N == 0) fail("N must be positive");
  if (m_cap > N) fail("m_cap must not exceed N");
  if (n_cap > W) fail("n_cap must not exceed W");
  if (d < 1) fail("d must be at least 1");
  if (t > d) fail("t must not exceed d");
  if (c < 1) fail("c must be at least 1");
  if (s < 1) fail("s must be at least 1");
  if (m_cap * n_cap > 30) fail("m_cap * n_cap must be at most 30");
}

TruncationParams default_params() { return TruncationParams{}; }

const CheckResult* VerifyReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

void VerifyReport::merge(const VerifyReport& other, const std::string& prefix) {
  for (auto c : other.checks) {
    c.name = prefix + c.name;
    add(std::move(c));
  }
}

SetFamily perfect_independent(std::size_t m) {
  if (m < 1 || m > 20) throw ValidationError("perfect_independent: m must be in 1..20");
  const std::size_t base = std::size_t{1} << m;
  SetFamily f;
  f.base = base;
  for (std::size_t i = 0; i < m; ++i) {
    PointSet s(base);
    for (std::size_t x = 0; x < base; ++x)
      if ((x >> i) & 1u) s.set(x);
    f.add("A" + std::to_string(i), std::move(s));
  }
  return f;
}

VerifyReport verify_independence(const SetFamily& family, std::size_t d, std::size_t s,
                                 const VerifyOptions& opts) {
  if (d > 63) throw ValidationError("verify_independence: depth above 63 is not supported");
  const std::size_t M = family.size();
  const std::size_t K = std::min(d, M);
  const auto binom = binomial_table(M, K);

  std::vector<std::uint64_t> blockStart{0};
  for (std::size_t k = 1; k <= K; ++k)
    blockStart.push_back(sat_add(blockStart.back(), sat_mul(binom[M][k], std::uint64_t{1} << k)));
  const std::uint64_t total = blockStart.back();

  CheckResult check;
  check.name = "independence";
  check.total = total;
  check.detail["d"] = d;
  check.detail["s"] = s;
  check.detail["members"] = M;

  std::vector<std::size_t> idx;
  std::vector<const PointSet*> ptrs;
  std::size_t minSize = std::numeric_limits<std::size_t>::max();
  bool haveWitness = false;

  auto evaluate = [&](std::uint64_t signs) {
    ptrs.clear();
    for (std::size_t i : idx) ptrs.push_back(&family.sets[i]);
    const std::size_t size = combination_size(ptrs, signs);
    minSize = std::min(minSize, size);
    if (size >= s) return true;
    if (!haveWitness) {
      haveWitness = true;
      check.detail["witness"] = {{"F0", keys_json(family, idx, signs, true)},
                                 {"F1", keys_json(family, idx, signs, false)},
                                 {"size", size}};
    }
    return false;
  };

  auto by_index = [&](std::uint64_t index) {
    std::size_t k = 1;
    while (index >= blockStart[k]) ++k;
    const std::uint64_t r = index - blockStart[k - 1];
    unrank_subset(binom, M, k, r >> k, idx);
    return evaluate(r & ((std::uint64_t{1} << k) - 1));
  };

  // Block weights in floating point; only used when the space is too large to index.
  std::vector<long double> weight;
  long double weightSum = 0;
  for (std::size_t k = 1; k <= K; ++k) {
    long double b = std::ldexp(1.0L, static_cast<int>(k));
    for (std::size_t j = 0; j < k; ++j) b = b * static_cast<long double>(M - j) / static_cast<long double>(j + 1);
    weight.push_back(b);
    weightSum += b;
  }
  auto by_draw = [&](std::mt19937_64& rng) {
    long double u = static_cast<long double>(rng() >> 11) / static_cast<long double>(1ULL << 53) * weightSum;
    std::size_t k = 1;
    while (k < K && u >= weight[k - 1]) u -= weight[k++ - 1];
    auto chosen = detail::sample_without_replacement(rng, M, k);
    idx.assign(chosen.begin(), chosen.end());
    return evaluate(rng() & ((std::uint64_t{1} << k) - 1));
  };

  auto run = run_indexed(total, opts, 0x1d, by_index, by_draw);
  check.mode = run.mode;
  check.examined = run.examined;
  check.pass = run.failures == 0;
  check.detail["failures"] = run.failures;
  if (run.examined > 0) check.detail["minCombinationSize"] = minSize;

  VerifyReport report;
  report.add(std::move(check));
  return report;
}

SetFamily improve(const SetFamily& family, std::size_t m_cap, std::size_t c, std::uint64_t seed) {
  if (m_cap > family.base) throw ValidationError("improve: m_cap exceeds the base size");
  if (m_cap > 30) throw ValidationError("improve: m_cap too large");
  const std::size_t blocks = std::size_t{1} << m_cap;
  if (family.size() < c * blocks)
    throw ValidationError("improve: family has " + std::to_string(family.size()) + " members, needs " +
                          std::to_string(c * blocks));
  std::vector<std::size_t> order(family.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(detail::mix_seed(seed, 0x1a));
  detail::shuffle(rng, order);

  SetFamily out = family;
  for (std::size_t j = 0; j < order.size(); ++j) {
    const std::size_t pattern = j % blocks;
    PointSet& member = out.sets[order[j]];
    for (std::size_t i = 0; i < m_cap; ++i) member.set(i, (pattern >> i) & 1u);
  }
  return out;
}

VerifyReport verify_improved(const SetFamily& family, std::size_t m_cap, std::size_t c) {
  CheckResult check;
  check.name = "improved_traces";
  check.detail["m_cap"] = m_cap;
  check.detail["c"] = c;

  std::map<std::vector<bool>, std::size_t> counts;
  for (const auto& s : family.sets) {
    std::vector<bool> trace(m_cap);
    for (std::size_t i = 0; i < m_cap; ++i) trace[i] = i < s.base() && s.test(i);
    ++counts[trace];
  }
  // Enumerate patterns in increasing binary order; the first deficient one is
  // reached after at most |family| + 1 steps, so large m_cap stays cheap.
  const std::uint64_t patterns = m_cap >= 64 ? kSat : std::uint64_t{1} << m_cap;
  check.total = patterns;
  for (std::uint64_t u = 0; u < patterns; ++u) {
    std::vector<bool> trace(m_cap);
    for (std::size_t i = 0; i < m_cap && i < 64; ++i) trace[i] = (u >> i) & 1u;
    ++check.examined;
    auto it = counts.find(trace);
    const std::size_t have = it == counts.end() ? 0 : it->second;
    if (have < c) {
      check.pass = false;
      auto members = nlohmann::ordered_json::array();
      for (std::size_t i = 0; i < m_cap; ++i)
        if (trace[i]) members.push_back(i);
      check.detail["witness"] = {{"u", members}, {"count", have}};
      break;
    }
  }
  VerifyReport report;
  report.add(std::move(check));
  return report;
}

std::uint64_t schedule_period(const TruncationParams& p) { return std::uint64_t{1} << (p.m_cap * p.n_cap); }

std::uint64_t scheduled_pattern(const TruncationParams& p, std::size_t alpha) {
  return (alpha / p.W) % schedule_period(p);
}

GoodSequence construct_good_sequence(const TruncationParams& p, std::size_t attempt) {
  p.validate();
  GoodSequence g;
  g.params = p;
  const std::size_t rowsPer = p.W + 1;

  for (std::size_t n = 0; n <= p.W; ++n) {
    PointSet s(p.N);
    for (std::size_t i = 0; i < p.N; ++i)
      if (n < 64 && ((i >> n) & 1u)) s.set(i);
    g.omega.push_back(std::move(s));
  }

  std::mt19937_64 rng(detail::mix_seed(p.seed, attempt));
  g.rows.reserve(p.Lambda * rowsPer);
  for (std::size_t r = 0; r < p.Lambda * rowsPer; ++r) {
    PointSet s(p.N);
    auto words = s.words();
    for (std::size_t w = 0; w < words.size(); ++w) words[w] = rng();
    if (!words.empty()) words.back() &= s.tail_mask();
    g.rows.push_back(std::move(s));
  }

  for (std::size_t alpha = 0; alpha < p.Lambda; ++alpha) {
    const std::uint64_t pattern = scheduled_pattern(p, alpha);
    for (std::size_t l = 0; l < p.n_cap; ++l)
      for (std::size_t i = 0; i < p.m_cap; ++i) g.row(alpha, l).set(i, (pattern >> (l * p.m_cap + i)) & 1u);
  }
  return g;
}

GoodSequence build_good_sequence(const TruncationParams& p, const VerifyOptions& opts) {
  p.validate();
  GoodSequence candidate;
  VerifyReport report;
  for (std::size_t attempt = 0; attempt <= p.retries; ++attempt) {
    candidate = construct_good_sequence(p, attempt);
    report = verify_good_sequence(candidate, p, nullptr, opts);
    if (report.pass) return candidate;
  }
  std::string failing;
  for (const auto& c : report.checks)
    if (!c.pass) failing += (failing.empty() ? "" : ", ") + c.name;
  throw RetriesExhausted(std::move(candidate), std::move(report),
                         "good sequence construction failed after " + std::to_string(p.retries + 1) +
                             " attempts; failing checks: " + failing);
}

SetFamily as_family(const GoodSequence& g, const std::vector<std::size_t>* ordinaries) {
  SetFamily f;
  f.base = g.params.N;
  const auto all = all_ordinaries(g);
  for (std::size_t alpha : ordinaries ? *ordinaries : all)
    for (std::size_t n = 0; n <= g.params.W; ++n)
      f.add(std::to_string(alpha) + "," + std::to_string(n), g.row(alpha, n));
  for (std::size_t n = 0; n <= g.params.W; ++n) f.add("omega," + std::to_string(n), g.omega[n]);
  return f;
}

namespace {

CheckResult check_injectivity(const SetFamily& f) {
  CheckResult check;
  check.name = "injectivity";
  std::vector<std::size_t> order(f.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (f.sets[a] != f.sets[b]) return f.sets[a] < f.sets[b];
    return a < b;
  });
  std::size_t collisions = 0;
  for (std::size_t i = 1; i < order.size(); ++i)
    if (f.sets[order[i]] == f.sets[order[i - 1]]) {
      if (collisions++ == 0) check.detail["witness"] = {f.keys[order[i - 1]], f.keys[order[i]]};
    }
  check.pass = collisions == 0;
  check.examined = check.total = f.size();
  check.detail["collisions"] = collisions;
  return check;
}

/// Trace-realization check over residue classes. For every class k < W, every
/// position set from `positionSets`, and every n <= n_cap, each tuple of
/// traces of rows 0..n-1 on the position set must be realized by at least c
/// members of the class.
struct TraceCheckInput {
  const GoodSequence* g;
  const TruncationParams* p;
  std::vector<std::vector<std::size_t>> classes;  // residue -> members
};

/// Returns the first deficient tuple's description, or nullopt.
std::optional<nlohmann::ordered_json> trace_unit(const TraceCheckInput& in, std::size_t k,
                                                 const std::vector<std::size_t>& positions, std::size_t n) {
  const auto& members = in.classes[k];
  const std::size_t bits = positions.size() * n;
  if (bits > 30) throw ValidationError("trace check: position set too large");
  std::vector<std::size_t> counts(std::size_t{1} << bits, 0);
  for (std::size_t alpha : members) {
    std::size_t code = 0;
    for (std::size_t l = 0; l < n; ++l)
      for (std::size_t i = 0; i < positions.size(); ++i)
        if (in.g->row(alpha, l).test(positions[i])) code |= std::size_t{1} << (l * positions.size() + i);
    ++counts[code];
  }
  for (std::size_t code = 0; code < counts.size(); ++code)
    if (counts[code] < in.p->c) {
      auto tuple = nlohmann::ordered_json::array();
      for (std::size_t l = 0; l < n; ++l) {
        auto u = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < positions.size(); ++i)
          if ((code >> (l * positions.size() + i)) & 1u) u.push_back(positions[i]);
        tuple.push_back(u);
      }
      return nlohmann::ordered_json{{"residue", k},
                                    {"positions", positions},
                                    {"rows", n},
                                    {"traces", tuple},
                                    {"count", counts[code]}};
    }
  return std::nullopt;
}

CheckResult check_prefix_traces(const TraceCheckInput& in) {
  const auto& p = *in.p;
  CheckResult check;
  check.name = "prefix_traces";
  check.detail["m_cap"] = p.m_cap;
  check.detail["n_cap"] = p.n_cap;
  check.detail["c"] = p.c;
  std::vector<std::size_t> prefix(p.m_cap);
  for (std::size_t i = 0; i < p.m_cap; ++i) prefix[i] = i;
  std::size_t failures = 0;
  for (std::size_t k = 0; k < p.W; ++k)
    for (std::size_t n = 0; n <= p.n_cap; ++n) {
      ++check.examined;
      if (auto bad = trace_unit(in, k, prefix, n)) {
        if (failures++ == 0) check.detail["witness"] = *bad;
      }
    }
  check.total = check.examined;
  check.pass = failures == 0;
  check.detail["failures"] = failures;
  return check;
}

CheckResult check_position_traces(const TraceCheckInput& in, const VerifyOptions& opts) {
  const auto& p = *in.p;
  CheckResult check;
  check.name = "position_traces";
  check.detail["t"] = p.t;
  check.detail["n_cap"] = p.n_cap;
  check.detail["c"] = p.c;

  const auto binom = binomial_table(p.N, p.t);
  std::vector<std::uint64_t> sizeStart{0};  // subsets ordered by size 0..t
  for (std::size_t j = 0; j <= p.t; ++j) sizeStart.push_back(sat_add(sizeStart.back(), binom[p.N][j]));
  const std::uint64_t subsets = sizeStart.back();
  const std::uint64_t perClass = sat_mul(subsets, p.n_cap + 1);
  const std::uint64_t total = sat_mul(perClass, p.W);
  check.total = total;

  std::vector<std::size_t> positions;
  auto eval = [&](std::uint64_t index) {
    const std::size_t k = index / perClass;
    const std::uint64_t rest = index % perClass;
    const std::uint64_t subset = rest / (p.n_cap + 1);
    const std::size_t n = rest % (p.n_cap + 1);
    std::size_t j = 0;
    while (subset >= sizeStart[j + 1]) ++j;
    unrank_subset(binom, p.N, j, subset - sizeStart[j], positions);
    if (auto bad = trace_unit(in, k, positions, n)) {
      if (!check.detail.contains("witness")) check.detail["witness"] = *bad;
      return false;
    }
    return true;
  };
  auto run = run_indexed(total, opts, 0x3f, eval);
  check.mode = run.mode;
  check.examined = run.examined;
  check.pass = run.failures == 0;
  check.detail["failures"] = run.failures;
  return check;
}

CheckResult check_omega_separation(const GoodSequence& g) {
  const auto& p = g.params;
  CheckResult check;
  check.name = "omega_separation";
  std::map<std::vector<bool>, std::size_t> seen;
  std::size_t collisions = 0;
  for (std::size_t i = 0; i < p.N; ++i) {
    std::vector<bool> sig(p.W + 1);
    for (std::size_t n = 0; n <= p.W; ++n) sig[n] = g.omega[n].test(i);
    auto [it, fresh] = seen.emplace(sig, i);
    if (!fresh && collisions++ == 0) check.detail["witness"] = {it->second, i};
  }
  check.examined = check.total = p.N * (p.N - 1) / 2;
  check.pass = collisions == 0;
  check.detail["inseparablePoints"] = collisions;
  return check;
}

}  // namespace

VerifyReport verify_good_sequence(const GoodSequence& g, const TruncationParams& p,
                                  const std::vector<std::size_t>* ordinaries, const VerifyOptions& opts) {
  p.validate();
  if (g.params.N != p.N || g.params.W != p.W || g.params.Lambda != p.Lambda)
    throw ValidationError("verify_good_sequence: parameters do not match the sequence shape");
  const auto all = all_ordinaries(g);
  const auto& idx = ordinaries ? *ordinaries : all;
  for (auto a : idx)
    if (a >= p.Lambda) throw ValidationError("verify_good_sequence: ordinary index out of range");

  VerifyReport report;
  const SetFamily family = as_family(g, &idx);
  report.merge(verify_independence(family, p.d, p.s, opts));
  report.add(check_injectivity(family));

  TraceCheckInput in{&g, &p, std::vector<std::vector<std::size_t>>(p.W)};
  for (auto a : idx) in.classes[p.residue(a)].push_back(a);
  report.add(check_prefix_traces(in));
  report.add(check_position_traces(in, opts));
  report.add(check_omega_separation(g));
  return report;
}

}  // namespace backforth
