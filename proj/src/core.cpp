#include "backforth/core.hpp"

#include <algorithm>
#include <json.hpp>

#include "backforth/json_io.hpp"

namespace backforth {

namespace {

void normalize(IdSet& ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
}

void normalize(PairSet& pairs) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
}

void build_csr(std::size_t n, const PairSet& pairs, bool forward, std::vector<std::size_t>& start,
               std::vector<ElementId>& adj) {
  start.assign(n + 1, 0);
  for (const auto& [x, y] : pairs) ++start[(forward ? x : y) + 1];
  for (std::size_t i = 0; i < n; ++i) start[i + 1] += start[i];
  adj.resize(pairs.size());
  std::vector<std::size_t> fill(start.begin(), start.end() - 1);
  for (const auto& [x, y] : pairs) {
    if (forward)
      adj[fill[x]++] = y;
    else
      adj[fill[y]++] = x;
  }
  // Pairs are sorted by (x, y) so forward rows are already sorted.
  if (!forward)
    for (std::size_t i = 0; i < n; ++i) std::sort(adj.begin() + start[i], adj.begin() + start[i + 1]);
}

}  // namespace

bool Structure::holds(std::size_t n, ElementId x, ElementId y) const {
  auto row = out(n, x);
  return std::binary_search(row.begin(), row.end(), y);
}

std::span<const ElementId> Structure::out(std::size_t n, ElementId x) const {
  const auto& st = outStart_[n];
  return {outAdj_[n].data() + st[x], st[x + 1] - st[x]};
}

std::span<const ElementId> Structure::in(std::size_t n, ElementId y) const {
  const auto& st = inStart_[n];
  return {inAdj_[n].data() + st[y], st[y + 1] - st[y]};
}

bool Structure::same_shape(const Structure& other) const {
  return vocab_ == other.vocab_ && P_ == other.P_ && Q_ == other.Q_ && rels_ == other.rels_;
}

Structure Structure::renamed(std::string name) const {
  Structure copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

Structure make_structure(Vocabulary vocab, std::size_t domainSize, IdSet P, IdSet Q,
                         std::vector<PairSet> rels, std::string name) {
  if (vocab.relCount < 1) throw ValidationError("vocabulary needs at least one relation");
  if (rels.size() != vocab.relCount)
    throw ValidationError("expected " + std::to_string(vocab.relCount) + " relations, got " +
                          std::to_string(rels.size()));
  normalize(P);
  normalize(Q);
  for (auto& r : rels) normalize(r);

  std::vector<std::uint8_t> mark(domainSize, 0);  // 1 = P, 2 = Q
  for (ElementId x : P) {
    if (x >= domainSize) throw ValidationError("P id " + std::to_string(x) + " out of range");
    mark[x] = 1;
  }
  for (ElementId x : Q) {
    if (x >= domainSize) throw ValidationError("Q id " + std::to_string(x) + " out of range");
    if (mark[x] == 1) throw ValidationError("element " + std::to_string(x) + " is in both P and Q");
    mark[x] = 2;
  }
  for (std::size_t x = 0; x < domainSize; ++x)
    if (mark[x] == 0) throw ValidationError("element " + std::to_string(x) + " is in neither P nor Q");
  for (std::size_t n = 0; n < rels.size(); ++n)
    for (const auto& [x, y] : rels[n]) {
      if (x >= domainSize || y >= domainSize)
        throw ValidationError("R_" + std::to_string(n) + " pair out of range");
      if (mark[x] != 2 || mark[y] != 1)
        throw ValidationError("R_" + std::to_string(n) + " pair (" + std::to_string(x) + "," +
                              std::to_string(y) + ") not in Q x P");
    }

  Structure s;
  s.name_ = std::move(name);
  s.vocab_ = vocab;
  s.P_ = std::move(P);
  s.Q_ = std::move(Q);
  s.inP_.resize(domainSize);
  for (std::size_t x = 0; x < domainSize; ++x) s.inP_[x] = mark[x] == 1;
  s.rels_ = std::move(rels);
  const std::size_t k = vocab.relCount;
  s.outStart_.resize(k);
  s.inStart_.resize(k);
  s.outAdj_.resize(k);
  s.inAdj_.resize(k);
  for (std::size_t n = 0; n < k; ++n) {
    build_csr(domainSize, s.rels_[n], true, s.outStart_[n], s.outAdj_[n]);
    build_csr(domainSize, s.rels_[n], false, s.inStart_[n], s.inAdj_[n]);
  }
  return s;
}

Structure reduct(const Structure& s, std::size_t m) {
  if (m >= s.rel_count())
    throw ValidationError("reduct level " + std::to_string(m) + " out of range for " +
                          std::to_string(s.rel_count()) + " relations");
  std::vector<PairSet> rels(s.rels().begin(), s.rels().begin() + static_cast<std::ptrdiff_t>(m + 1));
  return make_structure(Vocabulary{m + 1}, s.size(), s.P(), s.Q(), std::move(rels), s.name());
}

Restriction restrict(const Structure& s, std::span<const ElementId> keep) {
  IdSet kept(keep.begin(), keep.end());
  normalize(kept);
  if (!kept.empty() && kept.back() >= s.size())
    throw ValidationError("restrict: id " + std::to_string(kept.back()) + " out of range");

  Restriction out;
  out.original = kept;
  out.renumber.assign(s.size(), std::nullopt);
  for (std::size_t i = 0; i < kept.size(); ++i) out.renumber[kept[i]] = static_cast<ElementId>(i);

  IdSet P, Q;
  for (ElementId x : kept) (s.in_P(x) ? P : Q).push_back(*out.renumber[x]);
  std::vector<PairSet> rels(s.rel_count());
  for (std::size_t n = 0; n < s.rel_count(); ++n)
    for (const auto& [x, y] : s.rel(n))
      if (out.renumber[x] && out.renumber[y]) rels[n].emplace_back(*out.renumber[x], *out.renumber[y]);
  out.structure = make_structure(s.vocab(), kept.size(), std::move(P), std::move(Q), std::move(rels),
                                 s.name());
  return out;
}

std::string encode(const Structure& s) { return structure_to_json(s).dump() + "\n"; }

Structure decode(std::string_view text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DecodeError(std::string("structure document: ") + e.what());
  }
  return structure_from_json(doc);
}

PartialMap::PartialMap(std::vector<IdPair> pairs) : pairs_(std::move(pairs)) {
  std::sort(pairs_.begin(), pairs_.end());
  for (std::size_t i = 1; i < pairs_.size(); ++i)
    if (pairs_[i].first == pairs_[i - 1].first)
      throw ValidationError("partial map is not functional at source " + std::to_string(pairs_[i].first));
  std::vector<ElementId> targets;
  targets.reserve(pairs_.size());
  for (const auto& p : pairs_) targets.push_back(p.second);
  std::sort(targets.begin(), targets.end());
  if (std::adjacent_find(targets.begin(), targets.end()) != targets.end())
    throw ValidationError("partial map is not injective");
}

std::optional<ElementId> PartialMap::image(ElementId src) const {
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), IdPair{src, 0});
  if (it != pairs_.end() && it->first == src) return it->second;
  return std::nullopt;
}

std::optional<ElementId> PartialMap::preimage(ElementId dst) const {
  for (const auto& [a, b] : pairs_)
    if (b == dst) return a;
  return std::nullopt;
}

PartialMap PartialMap::with(ElementId src, ElementId dst) const {
  auto pairs = pairs_;
  pairs.emplace_back(src, dst);
  return PartialMap(std::move(pairs));
}

PartialMap PartialMap::inverse() const {
  std::vector<IdPair> inv;
  inv.reserve(pairs_.size());
  for (const auto& [a, b] : pairs_) inv.emplace_back(b, a);
  return PartialMap(std::move(inv));
}

}  // namespace backforth
