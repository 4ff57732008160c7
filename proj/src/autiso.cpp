#include "backforth/autiso.hpp"

#include <algorithm>
#include <future>
#include <map>

namespace backforth {

namespace {

using Coloring = std::vector<std::uint32_t>;

class Refiner {
 public:
  Refiner(const Structure& s, const Structure& t) : s_(s), t_(t) {}

  /// Refines both colourings jointly to a stable partition. Returns false if
  /// the colour class sizes of the two sides differ at any point.
  bool refine(Coloring& cs, Coloring& ct) const {
    std::size_t classes = count_classes(cs, ct);
    for (;;) {
      auto sigS = signatures(s_, cs);
      auto sigT = signatures(t_, ct);
      std::vector<const std::vector<std::uint64_t>*> all;
      all.reserve(sigS.size() + sigT.size());
      for (const auto& v : sigS) all.push_back(&v);
      for (const auto& v : sigT) all.push_back(&v);
      std::sort(all.begin(), all.end(), [](auto* a, auto* b) { return *a < *b; });
      std::map<std::vector<std::uint64_t>, std::uint32_t> rank;
      for (auto* v : all)
        if (rank.empty() || std::prev(rank.end())->first != *v) rank.emplace(*v, static_cast<std::uint32_t>(rank.size()));
      for (std::size_t i = 0; i < cs.size(); ++i) cs[i] = rank.at(sigS[i]);
      for (std::size_t i = 0; i < ct.size(); ++i) ct[i] = rank.at(sigT[i]);
      if (!same_histogram(cs, ct)) return false;
      if (rank.size() == classes) return true;
      classes = rank.size();
    }
  }

 private:
  static std::size_t count_classes(const Coloring& a, const Coloring& b) {
    std::vector<std::uint32_t> all(a);
    all.insert(all.end(), b.begin(), b.end());
    std::sort(all.begin(), all.end());
    return static_cast<std::size_t>(std::unique(all.begin(), all.end()) - all.begin());
  }

  static bool same_histogram(const Coloring& a, const Coloring& b) {
    if (a.size() != b.size()) return false;
    std::vector<std::uint32_t> x(a), y(b);
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    return x == y;
  }

  static std::vector<std::vector<std::uint64_t>> signatures(const Structure& st, const Coloring& c) {
    std::vector<std::vector<std::uint64_t>> sig(st.size());
    for (ElementId v = 0; v < st.size(); ++v) {
      auto& out = sig[v];
      for (std::size_t n = 0; n < st.rel_count(); ++n) {
        for (auto y : st.out(n, v)) out.push_back((std::uint64_t{n} << 33) | c[y]);
        for (auto y : st.in(n, v)) out.push_back((std::uint64_t{n} << 33) | (std::uint64_t{1} << 32) | c[y]);
      }
      std::sort(out.begin(), out.end());
      out.insert(out.begin(), c[v]);
    }
    return sig;
  }

  const Structure& s_;
  const Structure& t_;
};

class IsoSearch {
 public:
  IsoSearch(const Structure& s, const Structure& t, std::uint64_t limit)
      : s_(s), t_(t), refiner_(s, t), limit_(limit) {}

  AutSearchStats stats;
  std::vector<Bijection> found;
  bool stopped = false;

  void run() {
    if (!compatible()) {
      ++stats.prunes;
      return;
    }
    Coloring cs(s_.size()), ct(t_.size());
    for (ElementId v = 0; v < s_.size(); ++v) cs[v] = s_.in_P(v) ? 1 : 0;
    for (ElementId v = 0; v < t_.size(); ++v) ct[v] = t_.in_P(v) ? 1 : 0;
    search(std::move(cs), std::move(ct));
  }

 private:
  /// Cheap negative shortcuts only.
  bool compatible() const {
    if (s_.size() != t_.size() || s_.rel_count() != t_.rel_count() || s_.P().size() != t_.P().size()) return false;
    for (std::size_t n = 0; n < s_.rel_count(); ++n)
      if (s_.rel(n).size() != t_.rel(n).size()) return false;
    return true;
  }

  void search(Coloring cs, Coloring ct) {
    if (stopped) return;
    ++stats.nodes;
    if (!refiner_.refine(cs, ct)) {
      ++stats.prunes;
      return;
    }
    // First non-singleton class on the left.
    std::vector<std::uint32_t> size(s_.size() + 1, 0);
    for (auto col : cs) ++size[col];
    std::uint32_t target = 0;
    bool discrete = true;
    for (std::uint32_t col = 0; col < size.size(); ++col)
      if (size[col] > 1) {
        target = col;
        discrete = false;
        break;
      }
    if (discrete) {
      ++stats.leaves;
      Bijection map(s_.size());
      std::vector<ElementId> byColor(t_.size() + 1);
      for (ElementId v = 0; v < t_.size(); ++v) byColor[ct[v]] = v;
      for (ElementId v = 0; v < s_.size(); ++v) map[v] = byColor[cs[v]];
      if (is_isomorphism(s_, t_, map)) {
        found.push_back(std::move(map));
        if (found.size() >= limit_) stopped = true;
      }
      return;
    }
    ElementId x = 0;
    while (cs[x] != target) ++x;
    const auto fresh = static_cast<std::uint32_t>(s_.size() + 1);
    for (ElementId y = 0; y < t_.size() && !stopped; ++y) {
      if (ct[y] != target) continue;
      Coloring cs2 = cs, ct2 = ct;
      cs2[x] = fresh;
      ct2[y] = fresh;
      search(std::move(cs2), std::move(ct2));
    }
  }

  const Structure& s_;
  const Structure& t_;
  Refiner refiner_;
  std::uint64_t limit_;
};

bool is_identity(const Bijection& b) {
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i] != i) return false;
  return true;
}

}  // namespace

bool is_isomorphism(const Structure& s, const Structure& t, const Bijection& map) {
  if (map.size() != s.size() || s.size() != t.size() || s.rel_count() != t.rel_count()) return false;
  std::vector<bool> hit(t.size(), false);
  for (ElementId v = 0; v < s.size(); ++v) {
    if (map[v] >= t.size() || hit[map[v]]) return false;
    hit[map[v]] = true;
    if (s.in_P(v) != t.in_P(map[v])) return false;
  }
  for (std::size_t n = 0; n < s.rel_count(); ++n) {
    if (s.rel(n).size() != t.rel(n).size()) return false;
    for (const auto& [x, y] : s.rel(n))
      if (!t.holds(n, map[x], map[y])) return false;
  }
  return true;
}

AutReport automorphisms(const Structure& s, std::uint64_t limit) {
  AutReport report;
  IsoSearch search(s, s, std::max<std::uint64_t>(limit, 1));
  search.run();
  report.found = std::move(search.found);
  report.automorphismCount = report.found.size();
  report.limitExceeded = search.stopped;
  report.searchStats = search.stats;
  for (const auto& b : report.found)
    if (!is_identity(b)) {
      report.nontrivialWitness = b;
      break;
    }
  return report;
}

bool is_rigid(const Structure& s) {
  const auto r = automorphisms(s, 2);
  return r.automorphismCount == 1;
}

std::optional<Bijection> isomorphic(const Structure& s, const Structure& t) {
  IsoSearch search(s, t, 1);
  search.run();
  if (search.found.empty()) return std::nullopt;
  return search.found.front();
}

VerifyReport rigidity_lemmas(const BuiltStructure& m, const GoodSequence& g) {
  const auto omega = m.omega();
  if (!omega) throw ValidationError("rigidity_lemmas: structure has no c_omega");
  const Structure& st = m.structure;
  VerifyReport report;

  {
    CheckResult check;
    check.name = "omega_unique_full_activity";
    std::size_t fullyActive = 0;
    for (ElementId c : st.P()) {
      bool all = true;
      for (std::size_t n = 0; n < st.rel_count() && all; ++n) all = !st.in(n, c).empty();
      if (c == *omega && !all) {
        check.pass = false;
        check.detail["witness"] = {{"reason", "c:omega is inactive in some relation"}};
      }
      if (c != *omega && all) {
        ++fullyActive;
        if (check.pass) check.detail["witness"] = {{"reason", "another c is active everywhere"}, {"element", m.layout[c].label()}};
        check.pass = false;
      }
    }
    check.examined = check.total = st.P().size();
    check.detail["otherFullyActive"] = fullyActive;
    report.add(std::move(check));
  }

  const auto bs = m.b_ids();
  {
    CheckResult check;
    check.name = "omega_separates_b";
    std::map<std::vector<bool>, ElementId> seen;
    std::size_t collisions = 0;
    for (ElementId b : bs) {
      std::vector<bool> sig(st.rel_count());
      for (std::size_t n = 0; n < st.rel_count(); ++n) sig[n] = st.holds(n, b, *omega);
      auto [it, fresh] = seen.emplace(sig, b);
      if (!fresh && collisions++ == 0) check.detail["witness"] = {m.layout[it->second].label(), m.layout[b].label()};
    }
    check.pass = collisions == 0;
    check.examined = check.total = bs.size() * (bs.size() - (bs.empty() ? 0 : 1)) / 2;
    check.detail["inseparable"] = collisions;
    report.add(std::move(check));
  }

  {
    CheckResult check;
    check.name = "row0_distinct";
    std::map<std::vector<std::size_t>, ElementId> seen;
    std::size_t collisions = 0;
    bool consistent = true;
    for (ElementId c : m.c_ids()) {
      std::vector<std::size_t> trace;
      for (auto b : st.in(0, c)) trace.push_back(m.layout[b].index);
      for (ElementId b : bs)
        consistent = consistent && (st.holds(0, b, c) == g.row(m.layout[c].index, 0).test(m.layout[b].index));
      auto [it, fresh] = seen.emplace(trace, c);
      if (!fresh && collisions++ == 0) check.detail["witness"] = {m.layout[it->second].label(), m.layout[c].label()};
    }
    check.pass = collisions == 0 && consistent;
    check.examined = check.total = m.c_ids().size();
    check.detail["collisions"] = collisions;
    check.detail["matchesSequence"] = consistent;
    report.add(std::move(check));
  }
  return report;
}

bool CensusResult::diagonal_isomorphic() const {
  for (std::size_t i = 0; i < matrix.size(); ++i)
    if (!matrix[i][i].isomorphic) return false;
  return true;
}

bool CensusResult::off_diagonal_nonisomorphic() const {
  for (std::size_t i = 0; i < matrix.size(); ++i)
    for (std::size_t j = 0; j < matrix.size(); ++j)
      if (i != j && matrix[i][j].isomorphic) return false;
  return true;
}

bool CensusResult::symmetric() const {
  for (std::size_t i = 0; i < matrix.size(); ++i)
    for (std::size_t j = 0; j < matrix.size(); ++j)
      if (matrix[i][j].isomorphic != matrix[j][i].isomorphic) return false;
  return true;
}

CensusResult census(const GoodSequence& g, const std::vector<IndexSet>& zs, std::size_t cReq, bool parallel) {
  CensusResult result;
  result.zs = zs;
  std::vector<Structure> built;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    IndexSet z = zs[i];
    z.normalize(g.params.Lambda);
    if (!z.includeOmega) throw ValidationError("census: index set " + std::to_string(i) + " lacks omega");
    if (!is_robust(z, g, cReq))
      throw ValidationError("census: index set " + std::to_string(i) + " is not robust at " + std::to_string(cReq));
    result.zs[i] = z;
    built.push_back(build_MZ(g, z).structure);
  }
  const std::size_t k = zs.size();
  result.matrix.assign(k, std::vector<CensusCell>(k));

  auto cell = [&](std::size_t i, std::size_t j) {
    CensusCell c;
    c.witness = isomorphic(built[i], built[j]);
    c.isomorphic = c.witness.has_value();
    return c;
  };
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) jobs.emplace_back(i, j);
  std::vector<CensusCell> cells(jobs.size());
  if (parallel) {
    std::vector<std::future<CensusCell>> futures;
    for (const auto& [i, j] : jobs) futures.push_back(std::async(std::launch::async, cell, i, j));
    for (std::size_t n = 0; n < jobs.size(); ++n) cells[n] = futures[n].get();
  } else {
    for (std::size_t n = 0; n < jobs.size(); ++n) cells[n] = cell(jobs[n].first, jobs[n].second);
  }
  for (std::size_t n = 0; n < jobs.size(); ++n) {
    const auto [i, j] = jobs[n];
    result.matrix[i][j] = cells[n];
    if (i != j) {
      CensusCell mirror;
      mirror.isomorphic = cells[n].isomorphic;
      if (cells[n].witness) {
        Bijection inv(cells[n].witness->size());
        for (std::size_t v = 0; v < inv.size(); ++v) inv[(*cells[n].witness)[v]] = static_cast<ElementId>(v);
        mirror.witness = std::move(inv);
      }
      result.matrix[j][i] = std::move(mirror);
    }
  }
  return result;
}

}  // namespace backforth
