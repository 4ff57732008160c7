#include "backforth/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <map>
#include <random>

#include "backforth/autiso.hpp"
#include "backforth/efgames.hpp"
#include "backforth/paperstructs.hpp"
#include "random.hpp"

namespace backforth {

namespace {

using Clock = std::chrono::steady_clock;

enum : std::uint64_t { kStreamX = 0x58, kStreamIntermediate = 0x1a, kStreamCensus = 0xce };

CheckResult verdict(std::string name, bool pass, Json detail = Json::object()) {
  CheckResult c;
  c.name = std::move(name);
  c.pass = pass;
  c.examined = c.total = 1;
  c.detail = std::move(detail);
  return c;
}

std::vector<ElementId> all_but_omega(const BuiltStructure& b) {
  std::vector<ElementId> keep;
  for (ElementId i = 0; i < b.structure.size(); ++i)
    if (b.layout[i].kind != Role::Kind::Omega) keep.push_back(i);
  return keep;
}

struct Game {
  std::string label;
  const BuiltStructure* left;
  const BuiltStructure* right;
  std::size_t m;
  PartialMap pins;
};

struct GameOutcome {
  std::string label;
  std::optional<GameResult> result;
  bool certificateValid = false;
  std::string error;
  double seconds = 0;
};

GameOutcome play(const Game& game, std::size_t rounds, std::uint64_t budget) {
  GameOutcome out;
  out.label = game.label;
  const auto t0 = Clock::now();
  const Structure s = reduct(game.left->structure, game.m);
  const Structure t = reduct(game.right->structure, game.m);
  GameConfig cfg{rounds, game.pins};
  try {
    out.result = ef_decide(s, t, cfg, EfOptions{budget, true});
    out.certificateValid = ef_certificate_check(s, t, cfg, out.result->certificate);
  } catch (const BudgetExceeded& e) {
    out.error = e.what();
  }
  out.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

CheckResult game_check(const GameOutcome& g) {
  Json detail{{"seconds", g.seconds}};
  if (!g.result) {
    detail["error"] = g.error;
    return verdict("ef/" + g.label, false, std::move(detail));
  }
  const bool dup = g.result->winner == Winner::Duplicator;
  detail["winner"] = dup ? "duplicator" : "spoiler";
  detail["certificateValid"] = g.certificateValid;
  detail["nodes"] = g.result->stats.nodes;
  detail["memoHits"] = g.result->stats.memoHits;
  detail["collapsedChallenges"] = g.result->stats.collapsedChallenges;
  auto c = verdict("ef/" + g.label, dup && g.certificateValid, std::move(detail));
  c.examined = c.total = g.result->stats.nodes;
  return c;
}

/// Equal-size robust index sets with Omega: perClass members drawn from each
/// residue class, redrawn until pairwise distinct.
std::vector<IndexSet> census_sets(const GoodSequence& g, std::size_t count, std::size_t perClass) {
  const auto& p = g.params;
  const std::size_t classSize = p.Lambda / p.W;
  if (perClass > classSize) throw ValidationError("census: more members per class than the class holds");
  std::mt19937_64 rng(detail::mix_seed(p.seed, kStreamCensus));
  std::vector<IndexSet> out;
  for (std::size_t guard = 0; out.size() < count; ++guard) {
    if (guard > 100 * count) throw ValidationError("census: could not draw distinct index sets");
    IndexSet z;
    z.includeOmega = true;
    for (std::size_t k = 0; k < p.W; ++k)
      for (auto q : detail::sample_without_replacement(rng, classSize, perClass)) z.ordinaries.push_back(k + p.W * q);
    z.normalize(p.Lambda);
    if (std::find(out.begin(), out.end(), z) == out.end()) out.push_back(std::move(z));
  }
  return out;
}

class Runner {
 public:
  explicit Runner(const PipelineOptions& opts) : opts_(opts), p_(opts.params) {
    budget_ = opts.budget ? opts.budget : default_budget();
  }

  PipelineReport run() {
    PipelineReport report;
    report.params = p_;
    for (const auto& name : pipeline_stages()) {
      if (opts_.stage && *opts_.stage != name) continue;
      const auto t0 = Clock::now();
      StageReport stage;
      stage.name = name;
      stage.report = run_stage(name);
      stage.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
      report.pass = report.pass && stage.report.pass;
      report.stages.push_back(std::move(stage));
    }
    return report;
  }

 private:
  VerifyReport run_stage(const std::string& name) {
    if (name == "family") return family();
    if (name == "structures") return structures();
    if (name == "ef") return ef();
    if (name == "backforth") return backforth();
    if (name == "rigidity") return rigidity();
    return census_stage();
  }

  /// The sequence, built once. A sequence that exhausts its retries is still
  /// used downstream; the family stage records the failure.
  const GoodSequence& sequence() {
    if (!g_) {
      try {
        g_ = build_good_sequence(p_, opts_.verify);
        familyReport_ = verify_good_sequence(*g_, p_, nullptr, opts_.verify);
      } catch (const RetriesExhausted& e) {
        g_ = e.last_candidate();
        familyReport_ = e.last_report();
        retriesExhausted_ = true;
      }
    }
    return *g_;
  }

  const IndexSet& x() {
    if (!x_) x_ = pipeline_x(sequence(), opts_.cPrime, opts_.verify);
    return *x_;
  }

  const BuiltStructure& n1() { return n1_ ? *n1_ : *(n1_ = build_N1(sequence())); }
  const BuiltStructure& n2() { return n2_ ? *n2_ : *(n2_ = build_N2(sequence())); }
  const BuiltStructure& m1() { return m1_ ? *m1_ : *(m1_ = build_M1(sequence(), x())); }
  const BuiltStructure& m2() { return m2_ ? *m2_ : *(m2_ = build_M2(sequence(), x())); }

  VerifyReport family() {
    sequence();
    VerifyReport r;
    r.merge(familyReport_);
    r.add(verdict("construction", !retriesExhausted_,
                  Json{{"retriesExhausted", retriesExhausted_}, {"attempts", p_.retries + 1}}));
    return r;
  }

  VerifyReport structures() {
    VerifyReport r;
    const auto& g = sequence();
    const auto& full = n2();
    r.add(verdict("x_size", true, Json{{"size", x().ordinaries.size()}, {"cPrime", opts_.cPrime}}));

    const auto n1r = restrict_built(full, all_but_omega(full), "N1");
    r.add(verdict("N1_is_restriction_of_N2", n1r == n1()));
    const auto m1r = restrict_built(m2(), all_but_omega(m2()), "M1");
    r.add(verdict("M1_is_restriction_of_M2", m1r == m1()));

    // M1 is induced in N1: keep the b's and the c's indexed by X.
    std::vector<ElementId> keep;
    for (ElementId i = 0; i < n1().layout.size(); ++i) {
      const Role& role = n1().layout[i];
      if (role.kind == Role::Kind::B ||
          std::binary_search(x().ordinaries.begin(), x().ordinaries.end(), role.index))
        keep.push_back(i);
    }
    r.add(verdict("M1_induced_in_N1", restrict_built(n1(), keep, "M1") == m1()));

    // Activity: ordinary c_alpha active in R_n exactly for n <= residue(alpha);
    // c_Omega in every R_n.
    const Structure& st = full.structure;
    std::size_t mismatches = 0;
    Json witness = nullptr;
    for (ElementId c : st.P()) {
      const Role& role = full.layout[c];
      const std::size_t top = role.kind == Role::Kind::Omega ? p_.W : g.residue(role.index);
      for (std::size_t n = 0; n <= p_.W; ++n) {
        const bool active = !st.in(n, c).empty();
        if (active != (n <= top)) {
          if (mismatches++ == 0) witness = {{"element", role.label()}, {"relation", n}};
        }
      }
    }
    r.add(verdict("activity_pattern", mismatches == 0, Json{{"mismatches", mismatches}, {"witness", witness}}));

    std::size_t expected = g.omega[0].count();
    for (std::size_t a = 0; a < p_.Lambda; ++a) expected += g.row(a, 0).count();
    r.add(verdict("R0_size", st.rel(0).size() == expected, Json{{"size", st.rel(0).size()}, {"expected", expected}}));

    r.add(verdict("sizes", n1().structure.size() == p_.N + p_.Lambda && full.structure.size() == p_.N + p_.Lambda + 1 &&
                               m2().structure.size() == m1().structure.size() + 1,
                  Json{{"N1", n1().structure.size()},
                       {"N2", full.structure.size()},
                       {"M1", m1().structure.size()},
                       {"M2", m2().structure.size()}}));
    return r;
  }

  std::vector<Game> games() {
    std::vector<Game> out;
    for (std::size_t m = 0; m < p_.W; ++m) {
      const std::string tag = "(" + std::to_string(m) + ")";
      out.push_back({"M1M2" + tag, &m1(), &m2(), m, {}});
      out.push_back({"M1N1" + tag, &m1(), &n1(), m, {}});
      const ElementId src = *n1().find(Role{Role::Kind::C, m});
      out.push_back({"N1N2" + tag, &n1(), &n2(), m, PartialMap({{src, *n2().omega()}})});
    }
    return out;
  }

  std::vector<GameOutcome> play_all(const std::vector<Game>& list) {
    std::vector<GameOutcome> out(list.size());
    if (opts_.parallel) {
      std::vector<std::future<GameOutcome>> futures;
      for (const auto& game : list)
        futures.push_back(std::async(std::launch::async, play, std::cref(game), opts_.rounds, budget_));
      for (std::size_t i = 0; i < list.size(); ++i) out[i] = futures[i].get();
    } else {
      for (std::size_t i = 0; i < list.size(); ++i) out[i] = play(list[i], opts_.rounds, budget_);
    }
    for (const auto& o : out) games_[o.label] = o;
    return out;
  }

  VerifyReport ef() {
    VerifyReport r;
    for (const auto& o : play_all(games())) r.add(game_check(o));
    return r;
  }

  VerifyReport backforth() {
    VerifyReport r;
    std::vector<ProofContext> contexts;
    for (std::size_t m = 0; m < p_.W; ++m) {
      contexts.push_back(make_proof_context(sequence(), ProofVariant{ProofVariant::Kind::M1N1, m, std::nullopt}, x()));
      contexts.push_back(make_proof_context(sequence(), ProofVariant{ProofVariant::Kind::N1N2, m, std::nullopt}, x()));
    }
    std::vector<Game> missing;
    for (const auto& ctx : contexts) {
      const std::string label = game_label(ctx);
      if (!games_.count(label)) missing.push_back(game_for(ctx));
    }
    play_all(missing);

    for (const auto& ctx : contexts) {
      auto bf = verify_back_and_forth(ctx, opts_.rounds, opts_.verify.budget, p_.seed);
      const GameOutcome& game = games_.at(game_label(ctx));
      const bool bfPass = bf.pass;
      r.merge(bf, ctx.variant.label() + "/");
      const bool dup = game.result && game.result->winner == Winner::Duplicator;
      r.add(verdict(ctx.variant.label() + "/implies_ef", !bfPass || dup,
                    Json{{"backAndForth", bfPass}, {"efWinner", game.result ? (dup ? "duplicator" : "spoiler") : "error"}}));
    }
    return r;
  }

  static std::string game_label(const ProofContext& ctx) {
    const bool n1n2 = ctx.variant.kind == ProofVariant::Kind::N1N2;
    return std::string(n1n2 ? "N1N2" : "M1N1") + "(" + std::to_string(ctx.variant.m) + ")";
  }

  Game game_for(const ProofContext& ctx) {
    const bool n1n2 = ctx.variant.kind == ProofVariant::Kind::N1N2;
    return Game{game_label(ctx), n1n2 ? &n1() : &m1(), n1n2 ? &n2() : &n1(), ctx.variant.m, ctx.pins};
  }

  VerifyReport rigidity() {
    VerifyReport r;
    const auto& g = sequence();
    std::vector<std::pair<std::string, BuiltStructure>> targets;
    targets.emplace_back("M2", m2());

    std::vector<std::size_t> rest;
    for (std::size_t a = 0; a < p_.Lambda; ++a)
      if (!std::binary_search(x().ordinaries.begin(), x().ordinaries.end(), a)) rest.push_back(a);
    std::mt19937_64 rng(detail::mix_seed(p_.seed, kStreamIntermediate));
    for (std::size_t i = 0; i < opts_.intermediates; ++i) {
      IndexSet z = x();
      z.includeOmega = true;
      const auto extra = detail::uniform_below(rng, rest.size() + 1);
      for (auto idx : detail::sample_without_replacement(rng, rest.size(), extra)) z.ordinaries.push_back(rest[idx]);
      z.normalize(p_.Lambda);
      targets.emplace_back("Z" + std::to_string(i), build_MZ(g, z));
    }

    for (const auto& [name, built] : targets) {
      const auto t0 = Clock::now();
      const auto lemmas = rigidity_lemmas(built, g);
      const auto aut = automorphisms(built.structure, 2);
      const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
      const bool rigid = aut.automorphismCount == 1 && !aut.limitExceeded;
      r.merge(lemmas, name + "/");
      r.add(verdict(name + "/rigid", rigid,
                    Json{{"size", built.structure.size()},
                         {"automorphisms", aut.automorphismCount},
                         {"nodes", aut.searchStats.nodes},
                         {"seconds", seconds}}));
      r.add(verdict(name + "/lemmas_imply_rigid", !lemmas.pass || rigid));
    }
    return r;
  }

  VerifyReport census_stage() {
    VerifyReport r;
    const auto zs = census_sets(sequence(), opts_.censusSize, opts_.censusPerClass);
    const auto result = census(sequence(), zs, p_.c, opts_.parallel);
    Json matrix = Json::array();
    for (const auto& row : result.matrix) {
      Json line = Json::array();
      for (const auto& cell : row) line.push_back(cell.isomorphic);
      matrix.push_back(std::move(line));
    }
    r.add(verdict("diagonal_isomorphic", result.diagonal_isomorphic()));
    r.add(verdict("off_diagonal_nonisomorphic", result.off_diagonal_nonisomorphic(), Json{{"matrix", matrix}}));
    r.add(verdict("symmetric", result.symmetric()));
    return r;
  }

  const PipelineOptions& opts_;
  TruncationParams p_;
  std::uint64_t budget_ = 0;
  std::optional<GoodSequence> g_;
  VerifyReport familyReport_;
  bool retriesExhausted_ = false;
  std::optional<IndexSet> x_;
  std::optional<BuiltStructure> n1_, n2_, m1_, m2_;
  std::map<std::string, GameOutcome> games_;
};

}  // namespace

const std::vector<std::string>& pipeline_stages() {
  static const std::vector<std::string> names{"family", "structures", "ef", "backforth", "rigidity", "census"};
  return names;
}

const StageReport* PipelineReport::find(const std::string& name) const {
  for (const auto& s : stages)
    if (s.name == name) return &s;
  return nullptr;
}

IndexSet pipeline_x(const GoodSequence& g, std::size_t cPrime, const VerifyOptions& opts) {
  return sample_X(g, cPrime, detail::mix_seed(g.params.seed, kStreamX), g.params.retries, opts);
}

PipelineReport run_pipeline(const PipelineOptions& opts) {
  opts.params.validate();
  const auto& names = pipeline_stages();
  if (opts.stage && std::find(names.begin(), names.end(), *opts.stage) == names.end())
    throw ValidationError("unknown stage '" + *opts.stage + "'");
  return Runner(opts).run();
}

Json pipeline_to_json(const PipelineReport& r, bool timings) {
  Json stages = Json::array();
  for (const auto& s : r.stages) {
    Json stage{{"name", s.name}, {"pass", s.report.pass}};
    if (timings) stage["seconds"] = s.seconds;
    Json checks = report_to_json(s.report)["checks"];
    if (!timings)
      for (auto& c : checks) c["detail"].erase("seconds");
    stage["checks"] = std::move(checks);
    stages.push_back(std::move(stage));
  }
  return Json{{"params", params_to_json(r.params)}, {"pass", r.pass}, {"stages", std::move(stages)}};
}

}  // namespace backforth
