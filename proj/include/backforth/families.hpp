#pragma once

// Finite truncations of independent families and good independent sequences.
//
// Finite stand-ins used throughout:
//   "infinite"                 -> at least `s` elements
//   "continuum many"           -> at least `c` witnesses
//   "alpha = k mod omega"      -> alpha ≡ k (mod W)
//   omega (the base set)       -> {0..N-1}

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "backforth/errors.hpp"
#include "backforth/point_set.hpp"

namespace backforth {

struct TruncationParams {
  std::size_t N = 64;
  std::size_t W = 3;
  std::size_t Lambda = 192;
  std::size_t c = 3;
  std::size_t d = 3;
  std::size_t s = 2;
  std::size_t m_cap = 2;
  std::size_t n_cap = 1;
  std::size_t t = 1;
  std::uint64_t seed = 1;
  std::size_t retries = 20;

  /// Throws ValidationError unless W >= 2, W | Lambda, m_cap <= N, n_cap <= W,
  /// d >= 1, t <= d, c >= 1, s >= 1.
  void validate() const;
  std::size_t residue(std::size_t alpha) const { return alpha % W; }

  friend bool operator==(const TruncationParams&, const TruncationParams&) = default;
};

/// The reference parameter set used by the acceptance suite and as CLI default.
TruncationParams default_params();

struct SetFamily {
  std::size_t base = 0;
  std::vector<std::string> keys;
  std::vector<PointSet> sets;

  std::size_t size() const { return sets.size(); }
  void add(std::string key, PointSet set) {
    keys.push_back(std::move(key));
    sets.push_back(std::move(set));
  }
};

enum class CheckMode { Exhaustive, Sampled };

struct CheckResult {
  std::string name;
  bool pass = true;
  CheckMode mode = CheckMode::Exhaustive;
  std::uint64_t examined = 0;
  std::uint64_t total = 0;  // size of the full enumeration (saturated)
  nlohmann::ordered_json detail = nlohmann::ordered_json::object();
};

struct VerifyReport {
  bool pass = true;
  std::vector<CheckResult> checks;

  void add(CheckResult check) {
    pass = pass && check.pass;
    checks.push_back(std::move(check));
  }
  const CheckResult* find(const std::string& name) const;
  /// Appends another report's checks, prefixing their names.
  void merge(const VerifyReport& other, const std::string& prefix = {});
};

/// Enumeration tiering. Exhaustive when the enumeration has at most `budget`
/// items, otherwise `samples` items drawn uniformly without replacement.
struct VerifyOptions {
  std::uint64_t budget = 10'000'000;
  std::uint64_t samples = 100'000;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
};

/// A_i = { x < 2^m : bit i of x is set }, i < m.
SetFamily perfect_independent(std::size_t m);

/// Every combination of 1..d distinct members (some intersected, the rest
/// complemented) has at least s elements.
VerifyReport verify_independence(const SetFamily& family, std::size_t d, std::size_t s,
                                 const VerifyOptions& opts = {});

/// Overwrites traces on {0..m_cap-1} so that every trace pattern is carried
/// by at least c members. Members are split into 2^m_cap blocks after a
/// seeded shuffle.
SetFamily improve(const SetFamily& family, std::size_t m_cap, std::size_t c, std::uint64_t seed);

/// Every u ⊆ {0..m_cap-1} is the trace of at least c members.
VerifyReport verify_improved(const SetFamily& family, std::size_t m_cap, std::size_t c);

/// Rows A_{alpha,n} for ordinary alpha < Lambda and n <= W, plus the
/// distinguished omega rows A_{Omega,n}.
struct GoodSequence {
  TruncationParams params;
  std::vector<PointSet> rows;   // index alpha * (W + 1) + n
  std::vector<PointSet> omega;  // index n

  const PointSet& row(std::size_t alpha, std::size_t n) const { return rows[alpha * (params.W + 1) + n]; }
  PointSet& row(std::size_t alpha, std::size_t n) { return rows[alpha * (params.W + 1) + n]; }
  std::size_t residue(std::size_t alpha) const { return params.residue(alpha); }

  friend bool operator==(const GoodSequence&, const GoodSequence&) = default;
};

/// Trace pattern assigned by the round-robin schedule to the ordinary index
/// alpha. Bit (l * m_cap + i) set means position i is in the trace of row l.
std::uint64_t scheduled_pattern(const TruncationParams& p, std::size_t alpha);
/// Number of distinct schedule patterns, 2^(m_cap * n_cap).
std::uint64_t schedule_period(const TruncationParams& p);

/// One construction attempt, without verification.
GoodSequence construct_good_sequence(const TruncationParams& p, std::size_t attempt);

class RetriesExhausted : public Error {
 public:
  RetriesExhausted(GoodSequence last, VerifyReport report, std::string what)
      : Error(std::move(what)), last_(std::move(last)), report_(std::move(report)) {}
  const GoodSequence& last_candidate() const { return last_; }
  const VerifyReport& last_report() const { return report_; }

 private:
  GoodSequence last_;
  VerifyReport report_;
};

/// Constructs, verifies and reseeds up to p.retries times. Throws
/// RetriesExhausted carrying the last candidate and its report.
GoodSequence build_good_sequence(const TruncationParams& p, const VerifyOptions& opts = {});

/// Checks of a good independent sequence: independence, injectivity,
/// prefix_traces, position_traces, omega_separation. Thresholds come from p;
/// `ordinaries`, when given, restricts every check to those ordinary indices.
VerifyReport verify_good_sequence(const GoodSequence& g, const TruncationParams& p,
                                  const std::vector<std::size_t>* ordinaries = nullptr,
                                  const VerifyOptions& opts = {});

/// All rows as a keyed family ("<alpha>,<n>" and "omega,<n>").
SetFamily as_family(const GoodSequence& g, const std::vector<std::size_t>* ordinaries = nullptr);

}  // namespace backforth
