#include "backforth/efgames.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "random.hpp"

namespace backforth {

std::uint64_t default_budget() {
  if (const char* env = std::getenv("BACKFORTH_BUDGET")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return EfOptions{}.budget;
}

bool partial_iso_check(const Structure& s, const Structure& t, const PartialMap& f) {
  for (const auto& [a, b] : f.pairs())
    if (a >= s.size() || b >= t.size()) throw ValidationError("partial map id out of range");
  if (s.rel_count() != t.rel_count()) return false;
  for (const auto& [a, b] : f.pairs())
    if (s.in_P(a) != t.in_P(b)) return false;
  for (std::size_t n = 0; n < s.rel_count(); ++n)
    for (const auto& [a, b] : f.pairs())
      for (const auto& [a2, b2] : f.pairs())
        if (s.holds(n, a, a2) != t.holds(n, b, b2)) return false;
  return true;
}

namespace {

using Position = std::vector<IdPair>;  // (left, right) in play order

/// Elements with identical predicate and neighbourhoods; swapping two twins
/// is an automorphism fixing everything else.
std::vector<std::uint32_t> twin_classes(const Structure& s) {
  std::map<std::vector<std::uint32_t>, std::uint32_t> ids;
  std::vector<std::uint32_t> out(s.size());
  for (ElementId x = 0; x < s.size(); ++x) {
    std::vector<std::uint32_t> sig{s.in_P(x) ? 1u : 0u};
    for (std::size_t n = 0; n < s.rel_count(); ++n) {
      sig.push_back(0xffffffffu);
      for (auto y : s.out(n, x)) sig.push_back(y);
      sig.push_back(0xfffffffeu);
      for (auto y : s.in(n, x)) sig.push_back(y);
    }
    out[x] = ids.emplace(std::move(sig), static_cast<std::uint32_t>(ids.size())).first->second;
  }
  return out;
}

struct VecHash {
  std::size_t operator()(const std::vector<std::uint64_t>& v) const {
    std::uint64_t h = 0x51ed270b27a1f3c5ULL;
    for (auto x : v) h = detail::splitmix64(h ^ x);
    return static_cast<std::size_t>(h);
  }
};

class Solver {
 public:
  Solver(const Structure& s, const Structure& t, const EfOptions& opts)
      : s_(s), t_(t), opts_(opts), twinS_(twin_classes(s)), twinT_(twin_classes(t)) {}

  SearchStats stats;

  const Structure& side(Side sd) const { return sd == Side::Left ? s_ : t_; }
  const std::vector<std::uint32_t>& twins(Side sd) const { return sd == Side::Left ? twinS_ : twinT_; }

  /// Atomic type of x over the played elements on side sd, bit-packed.
  std::vector<std::uint64_t> type_of(Side sd, ElementId x, const Position& pos) const {
    const Structure& st = side(sd);
    const std::size_t bits = 1 + pos.size() * st.rel_count() * 2;
    std::vector<std::uint64_t> key((bits + 63) / 64, 0);
    std::size_t b = 0;
    auto put = [&](bool v) {
      if (v) key[b >> 6] |= std::uint64_t{1} << (b & 63);
      ++b;
    };
    put(st.in_P(x));
    for (const auto& pr : pos) {
      const ElementId a = sd == Side::Left ? pr.first : pr.second;
      for (std::size_t n = 0; n < st.rel_count(); ++n) {
        put(st.holds(n, x, a));
        put(st.holds(n, a, x));
      }
    }
    return key;
  }

  std::vector<bool> played(Side sd, const Position& pos) const {
    std::vector<bool> used(side(sd).size(), false);
    for (const auto& pr : pos) used[sd == Side::Left ? pr.first : pr.second] = true;
    return used;
  }

  void tick(std::uint64_t units) {
    stats.nodes += units;
    if (stats.nodes > opts_.budget)
      throw BudgetExceeded("game search exceeded budget of " + std::to_string(opts_.budget) + " nodes");
  }

  /// Duplicator survives one more round iff both sides realize the same set
  /// of atomic types among unplayed elements.
  bool last_round(const Position& pos) {
    tick(s_.size() + t_.size());
    auto collect = [&](Side sd) {
      auto used = played(sd, pos);
      std::vector<std::vector<std::uint64_t>> types;
      for (ElementId x = 0; x < side(sd).size(); ++x)
        if (!used[x]) types.push_back(type_of(sd, x, pos));
      std::sort(types.begin(), types.end());
      types.erase(std::unique(types.begin(), types.end()), types.end());
      return types;
    };
    return collect(Side::Left) == collect(Side::Right);
  }

  std::vector<std::uint64_t> memo_key(const Position& pos, std::size_t k) const {
    Position sorted = pos;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::uint64_t> key{k};
    for (const auto& [a, b] : sorted) key.push_back((std::uint64_t{a} << 32) | b);
    return key;
  }

  static Position extended(const Position& pos, Side sd, ElementId x, ElementId y) {
    Position next = pos;
    next.push_back(sd == Side::Left ? IdPair{x, y} : IdPair{y, x});
    return next;
  }

  /// Candidate answers to challenge x on side sd: same id first, then ascending.
  std::vector<ElementId> candidates(Side sd, ElementId x, const Position& pos) const {
    const Side other = sd == Side::Left ? Side::Right : Side::Left;
    const auto used = played(other, pos);
    const auto n = static_cast<ElementId>(side(other).size());
    std::vector<ElementId> out;
    if (x < n && !used[x]) out.push_back(x);
    for (ElementId y = 0; y < n; ++y)
      if (y != x && !used[y]) out.push_back(y);
    return out;
  }

  /// Some winning answer to the challenge with k rounds left (including this
  /// one), or nullopt.
  std::optional<ElementId> answer(const Position& pos, Side sd, ElementId x, std::size_t k) {
    const Side other = sd == Side::Left ? Side::Right : Side::Left;
    const auto tx = type_of(sd, x, pos);
    std::unordered_set<std::uint32_t> triedTwins;
    for (ElementId y : candidates(sd, x, pos)) {
      tick(1);
      if (triedTwins.count(twins(other)[y])) continue;
      if (type_of(other, y, pos) != tx) continue;
      triedTwins.insert(twins(other)[y]);
      if (k == 1 || win(extended(pos, sd, x, y), k - 1)) return y;
    }
    return std::nullopt;
  }

  /// Duplicator wins the k-round game from pos (pos is a partial isomorphism).
  bool win(const Position& pos, std::size_t k) {
    if (k == 0) return true;
    if (k == 1) return last_round(pos);
    tick(1);
    auto key = memo_key(pos, k);
    if (auto it = memo_.find(key); it != memo_.end()) {
      ++stats.memoHits;
      return it->second;
    }
    bool result = true;
    for (Side sd : {Side::Left, Side::Right}) {
      const auto used = played(sd, pos);
      std::unordered_set<std::uint32_t> triedTwins;
      for (ElementId x = 0; x < side(sd).size() && result; ++x) {
        if (used[x]) continue;
        if (!triedTwins.insert(twins(sd)[x]).second) {
          ++stats.collapsedChallenges;
          continue;
        }
        if (!answer(pos, sd, x, k)) result = false;
      }
      if (!result) break;
    }
    memo_.emplace(std::move(key), result);
    return result;
  }

  DuplicatorNode duplicator_tree(const Position& pos, std::size_t k) {
    DuplicatorNode node;
    if (k == 0) return node;
    for (Side sd : {Side::Left, Side::Right}) {
      const auto used = played(sd, pos);
      for (ElementId x = 0; x < side(sd).size(); ++x) {
        if (used[x]) continue;
        auto y = answer(pos, sd, x, k);
        if (!y) throw std::logic_error("duplicator strategy lost a branch");
        DuplicatorNode::Entry e{sd, x, *y, {}};
        if (k > 1) e.next.push_back(duplicator_tree(extended(pos, sd, x, *y), k - 1));
        node.entries.push_back(std::move(e));
      }
    }
    return node;
  }

  SpoilerNode spoiler_tree(const Position& pos, std::size_t k) {
    for (Side sd : {Side::Left, Side::Right}) {
      const auto used = played(sd, pos);
      for (ElementId x = 0; x < side(sd).size(); ++x) {
        if (used[x] || answer(pos, sd, x, k)) continue;
        SpoilerNode node;
        node.leaf = false;
        node.side = sd;
        node.challenge = x;
        const Side other = sd == Side::Left ? Side::Right : Side::Left;
        const auto tx = type_of(sd, x, pos);
        const auto usedOther = played(other, pos);
        for (ElementId y = 0; y < side(other).size(); ++y) {
          if (usedOther[y] || type_of(other, y, pos) != tx) continue;
          SpoilerNode::Reply reply{y, {}};
          reply.next.push_back(spoiler_tree(extended(pos, sd, x, y), k - 1));
          node.replies.push_back(std::move(reply));
        }
        return node;
      }
    }
    throw std::logic_error("spoiler strategy has no winning challenge");
  }

 private:
  const Structure& s_;
  const Structure& t_;
  EfOptions opts_;
  std::vector<std::uint32_t> twinS_, twinT_;
  std::unordered_map<std::vector<std::uint64_t>, bool, VecHash> memo_;
};

Position as_position(const PartialMap& pins) { return pins.pairs(); }

bool check_duplicator(const Structure& s, const Structure& t, const DuplicatorNode& node, const PartialMap& pos,
                      std::size_t k) {
  if (k == 0) return true;
  std::map<std::pair<int, ElementId>, const DuplicatorNode::Entry*> index;
  for (const auto& e : node.entries)
    if (!index.emplace(std::pair{static_cast<int>(e.side), e.challenge}, &e).second) return false;
  for (Side sd : {Side::Left, Side::Right}) {
    const Structure& st = sd == Side::Left ? s : t;
    const Structure& other = sd == Side::Left ? t : s;
    for (ElementId x = 0; x < st.size(); ++x) {
      const bool playedX = sd == Side::Left ? pos.has_source(x) : pos.has_target(x);
      if (playedX) continue;
      auto it = index.find({static_cast<int>(sd), x});
      if (it == index.end()) return false;
      const auto& e = *it->second;
      if (e.response >= other.size()) return false;
      const bool playedY = sd == Side::Left ? pos.has_target(e.response) : pos.has_source(e.response);
      if (playedY) return false;
      const PartialMap next = sd == Side::Left ? pos.with(x, e.response) : pos.with(e.response, x);
      if (!partial_iso_check(s, t, next)) return false;
      if (k > 1) {
        if (e.next.size() != 1) return false;
        if (!check_duplicator(s, t, e.next.front(), next, k - 1)) return false;
      }
    }
  }
  return true;
}

bool check_spoiler(const Structure& s, const Structure& t, const SpoilerNode& node, const PartialMap& pos,
                   std::size_t k) {
  if (!partial_iso_check(s, t, pos)) return true;
  if (k == 0 || node.leaf) return false;
  const Structure& st = node.side == Side::Left ? s : t;
  const Structure& other = node.side == Side::Left ? t : s;
  if (node.challenge >= st.size()) return false;
  const bool playedX = node.side == Side::Left ? pos.has_source(node.challenge) : pos.has_target(node.challenge);
  if (playedX) return false;
  std::map<ElementId, const SpoilerNode::Reply*> replies;
  for (const auto& r : node.replies) replies.emplace(r.response, &r);
  for (ElementId y = 0; y < other.size(); ++y) {
    const bool playedY = node.side == Side::Left ? pos.has_target(y) : pos.has_source(y);
    if (playedY) continue;
    const PartialMap next = node.side == Side::Left ? pos.with(node.challenge, y) : pos.with(y, node.challenge);
    if (!partial_iso_check(s, t, next)) continue;
    auto it = replies.find(y);
    if (it == replies.end() || it->second->next.size() != 1) return false;
    if (!check_spoiler(s, t, it->second->next.front(), next, k - 1)) return false;
  }
  return true;
}

}  // namespace

GameResult ef_decide(const Structure& s, const Structure& t, const GameConfig& cfg, const EfOptions& opts) {
  GameResult result;
  if (!partial_iso_check(s, t, cfg.pins)) {
    result.winner = Winner::Spoiler;
    result.certificate.winner = Winner::Spoiler;
    if (opts.certificate) result.certificate.spoiler = SpoilerNode{};
    return result;
  }
  Solver solver(s, t, opts);
  const Position start = as_position(cfg.pins);
  const bool dup = solver.win(start, cfg.rounds);
  result.winner = dup ? Winner::Duplicator : Winner::Spoiler;
  result.certificate.winner = result.winner;
  if (opts.certificate) {
    if (dup)
      result.certificate.duplicator = solver.duplicator_tree(start, cfg.rounds);
    else
      result.certificate.spoiler = solver.spoiler_tree(start, cfg.rounds);
  }
  result.stats = solver.stats;
  return result;
}

bool ef_certificate_check(const Structure& s, const Structure& t, const GameConfig& cfg, const Certificate& cert) {
  if (cert.winner == Winner::Duplicator) {
    if (!cert.duplicator) return false;
    if (!partial_iso_check(s, t, cfg.pins)) return false;
    return check_duplicator(s, t, *cert.duplicator, cfg.pins, cfg.rounds);
  }
  if (!cert.spoiler) return false;
  return check_spoiler(s, t, *cert.spoiler, cfg.pins, cfg.rounds);
}

// ---------------------------------------------------------------------------
// The map family F.

std::string ProofVariant::label() const {
  if (kind == Kind::M1N1) return "M1N1(" + std::to_string(m) + ")";
  return "N1N2(" + std::to_string(m) + (pinSource ? ",pin=" + std::to_string(*pinSource) : "") + ")";
}

ProofContext make_proof_context(const GoodSequence& g, const ProofVariant& variant, const IndexSet& x) {
  const auto& p = g.params;
  if (variant.m > p.W) throw ValidationError("proof context: reduct level above W");
  ProofContext ctx;
  ctx.variant = variant;
  ctx.W = p.W;
  if (variant.kind == ProofVariant::Kind::N1N2) {
    if (variant.pin_source() >= p.Lambda) throw ValidationError("proof context: pin source out of range");
    ctx.left = reduct_built(build_N1(g), variant.m);
    ctx.right = reduct_built(build_N2(g), variant.m);
    const auto src = ctx.left.find(Role{Role::Kind::C, variant.pin_source()});
    ctx.pins = PartialMap({{*src, *ctx.right.omega()}});
  } else {
    ctx.left = reduct_built(build_M1(g, x), variant.m);
    ctx.right = reduct_built(build_N1(g), variant.m);
  }
  return ctx;
}

bool proof_family_contains(const ProofContext& ctx, const PartialMap& f) {
  if (!partial_iso_check(ctx.left.structure, ctx.right.structure, f)) return false;
  const bool pinned = ctx.variant.kind == ProofVariant::Kind::N1N2;
  const std::size_t pin = ctx.variant.pin_source();
  bool pinSeen = false;
  for (const auto& [a, b] : f.pairs()) {
    const Role& ra = ctx.left.layout[a];
    const Role& rb = ctx.right.layout[b];
    if (ra.kind == Role::Kind::B) continue;  // b's may move freely
    if (ra.kind == Role::Kind::Omega) return false;
    const bool isPin = pinned && ra.index == pin;
    if (isPin) {
      if (rb.kind != Role::Kind::Omega) return false;
      pinSeen = true;
      continue;
    }
    if (rb.kind != Role::Kind::C) return false;
    if (ctx.residue(ra.index) != ctx.residue(rb.index)) return false;
  }
  return !pinned || pinSeen;
}

namespace {

nlohmann::ordered_json describe_map(const ProofContext& ctx, const PartialMap& f) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& [a, b] : f.pairs()) arr.push_back({ctx.left.layout[a].label(), ctx.right.layout[b].label()});
  return arr;
}

}  // namespace

PartialMap proof_extend(const ProofContext& ctx, const PartialMap& f, const Challenge& challenge) {
  if (!proof_family_contains(ctx, f)) throw ValidationError("proof_extend: position is not in the map family");
  const bool fromLeft = challenge.side == Side::Left;
  const BuiltStructure& home = fromLeft ? ctx.left : ctx.right;
  const BuiltStructure& away = fromLeft ? ctx.right : ctx.left;
  const ElementId x = challenge.element;
  if (x >= home.structure.size()) throw ValidationError("proof_extend: challenge id out of range");
  if (fromLeft ? f.has_source(x) : f.has_target(x))
    throw ValidationError("proof_extend: challenge " + home.layout[x].label() + " is already played");

  // Pairs oriented as (home element, away element).
  std::vector<IdPair> placed;
  std::vector<bool> awayUsed(away.structure.size(), false);
  for (const auto& [a, b] : f.pairs()) {
    placed.push_back(fromLeft ? IdPair{a, b} : IdPair{b, a});
    awayUsed[fromLeft ? b : a] = true;
  }

  const Structure& hs = home.structure;
  const Structure& as = away.structure;
  const Role& role = home.layout[x];
  const bool isB = role.kind == Role::Kind::B;

  // Required trace of x over the placed elements of the opposite sort.
  auto matches = [&](ElementId y) {
    for (const auto& [h, a] : placed)
      for (std::size_t n = 0; n < hs.rel_count(); ++n) {
        const bool want = isB ? hs.holds(n, x, h) : hs.holds(n, h, x);
        const bool got = isB ? as.holds(n, y, a) : as.holds(n, a, y);
        if (want != got) return false;
      }
    return true;
  };
  auto eligible = [&](ElementId y) {
    if (awayUsed[y]) return false;
    const Role& ry = away.layout[y];
    if (isB) return ry.kind == Role::Kind::B;
    if (role.kind == Role::Kind::Omega || ry.kind != Role::Kind::C) return false;
    return ctx.residue(ry.index) == ctx.residue(role.index);
  };

  std::vector<ElementId> order;
  if (auto same = away.find(role)) order.push_back(*same);
  for (ElementId y = 0; y < as.size(); ++y)
    if (order.empty() || y != order.front()) order.push_back(y);

  for (ElementId y : order) {
    if (!eligible(y) || !matches(y)) continue;
    PartialMap next = fromLeft ? f.with(x, y) : f.with(y, x);
    if (!proof_family_contains(ctx, next)) throw std::logic_error("proof_extend produced a map outside the family");
    return next;
  }

  nlohmann::ordered_json trace = nlohmann::ordered_json::array();
  for (const auto& [h, a] : placed) {
    if (hs.in_P(h) == hs.in_P(x)) continue;
    auto bits = nlohmann::ordered_json::array();
    for (std::size_t n = 0; n < hs.rel_count(); ++n) bits.push_back((isB ? hs.holds(n, x, h) : hs.holds(n, h, x)) ? 1 : 0);
    trace.push_back({{"over", home.layout[h].label()}, {"R", bits}});
  }
  nlohmann::ordered_json info{{"variant", ctx.variant.label()},
                              {"side", fromLeft ? "left" : "right"},
                              {"challenge", role.label()},
                              {"position", describe_map(ctx, f)},
                              {"requiredTrace", trace}};
  throw NoExtension("no extension in the map family: " + info.dump());
}

VerifyReport verify_back_and_forth(const ProofContext& ctx, std::size_t rounds, std::uint64_t budget,
                                   std::uint64_t seed) {
  CheckResult check;
  check.name = "back_and_forth";
  check.detail["variant"] = ctx.variant.label();
  check.detail["rounds"] = rounds;
  VerifyReport report;
  if (!proof_family_contains(ctx, ctx.pins)) {
    check.pass = false;
    check.detail["witness"] = {{"reason", "pins are not in the map family"}};
    report.add(std::move(check));
    return report;
  }
  if (rounds == 0) {
    report.add(std::move(check));
    return report;
  }

  const std::uint64_t width = ctx.left.structure.size() + ctx.right.structure.size();
  std::uint64_t estimate = 0, level = 1;
  for (std::size_t j = 0; j < rounds; ++j) {
    level = level > budget / std::max<std::uint64_t>(width, 1) ? budget + 1 : level * width;
    estimate = std::min(budget + 1, estimate + level);
  }

  std::uint64_t attempts = 0, failures = 0;
  auto attempt = [&](const PartialMap& f, const Challenge& ch) -> std::optional<PartialMap> {
    ++attempts;
    try {
      return proof_extend(ctx, f, ch);
    } catch (const NoExtension& e) {
      if (failures++ == 0) check.detail["witness"] = {{"message", e.what()}};
      return std::nullopt;
    }
  };
  auto unplayed = [&](const PartialMap& f) {
    std::vector<Challenge> out;
    for (ElementId x = 0; x < ctx.left.structure.size(); ++x)
      if (!f.has_source(x)) out.push_back({Side::Left, x});
    for (ElementId y = 0; y < ctx.right.structure.size(); ++y)
      if (!f.has_target(y)) out.push_back({Side::Right, y});
    return out;
  };

  if (estimate <= budget) {
    auto dfs = [&](auto&& self, const PartialMap& f, std::size_t depth) -> void {
      for (const auto& ch : unplayed(f)) {
        auto next = attempt(f, ch);
        if (next && depth + 1 < rounds) self(self, *next, depth + 1);
      }
    };
    dfs(dfs, ctx.pins, 0);
  } else {
    check.mode = CheckMode::Sampled;
    std::mt19937_64 rng(detail::mix_seed(seed, 0xbf));
    const std::uint64_t playouts = std::max<std::uint64_t>(1, std::min<std::uint64_t>(budget, 100'000) / rounds);
    for (std::uint64_t i = 0; i < playouts; ++i) {
      PartialMap f = ctx.pins;
      for (std::size_t depth = 0; depth < rounds; ++depth) {
        auto options = unplayed(f);
        if (options.empty()) break;
        auto next = attempt(f, options[detail::uniform_below(rng, options.size())]);
        if (!next) break;
        f = std::move(*next);
      }
    }
  }
  check.examined = attempts;
  check.total = estimate;
  check.pass = failures == 0;
  check.detail["failures"] = failures;
  report.add(std::move(check));
  return report;
}

}  // namespace backforth
