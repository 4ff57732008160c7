#include "backforth/paperstructs.hpp"

#include <algorithm>
#include <random>

#include "random.hpp"

namespace backforth {

void IndexSet::normalize(std::size_t lambda) {
  std::sort(ordinaries.begin(), ordinaries.end());
  ordinaries.erase(std::unique(ordinaries.begin(), ordinaries.end()), ordinaries.end());
  if (!ordinaries.empty() && ordinaries.back() >= lambda)
    throw ValidationError("index set: ordinary index " + std::to_string(ordinaries.back()) + " out of range");
}

std::string Role::label() const {
  switch (kind) {
    case Kind::B:
      return "b:" + std::to_string(index);
    case Kind::C:
      return "c:" + std::to_string(index);
    case Kind::Omega:
      return "c:omega";
  }
  return {};
}

Role Role::parse(const std::string& label) {
  if (label == "c:omega") return Role{Kind::Omega, 0};
  if (label.size() > 2 && (label[0] == 'b' || label[0] == 'c') && label[1] == ':') {
    std::size_t pos = 0;
    const std::string digits = label.substr(2);
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
      const std::size_t value = std::stoull(digits, &pos);
      return Role{label[0] == 'b' ? Kind::B : Kind::C, value};
    }
  }
  throw ValidationError("bad layout label '" + label + "'");
}

std::optional<ElementId> BuiltStructure::find(const Role& role) const {
  for (std::size_t i = 0; i < layout.size(); ++i)
    if (layout[i] == role) return static_cast<ElementId>(i);
  return std::nullopt;
}

std::vector<ElementId> BuiltStructure::b_ids() const {
  std::vector<ElementId> out;
  for (std::size_t i = 0; i < layout.size(); ++i)
    if (layout[i].kind == Role::Kind::B) out.push_back(static_cast<ElementId>(i));
  return out;
}

std::vector<ElementId> BuiltStructure::c_ids() const {
  std::vector<ElementId> out;
  for (std::size_t i = 0; i < layout.size(); ++i)
    if (layout[i].kind == Role::Kind::C) out.push_back(static_cast<ElementId>(i));
  return out;
}

void BuiltStructure::validate() const {
  if (layout.size() != structure.size()) throw ValidationError("layout size does not match the domain");
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const bool isB = layout[i].kind == Role::Kind::B;
    if (isB != structure.in_Q(static_cast<ElementId>(i)))
      throw ValidationError("layout role " + layout[i].label() + " disagrees with P/Q at id " + std::to_string(i));
  }
}

BuiltStructure restrict_built(const BuiltStructure& b, std::span<const ElementId> keep, std::string name) {
  auto r = restrict(b.structure, keep);
  BuiltStructure out;
  out.structure = r.structure.renamed(std::move(name));
  out.layout.reserve(r.original.size());
  for (ElementId old : r.original) out.layout.push_back(b.layout[old]);
  return out;
}

BuiltStructure reduct_built(const BuiltStructure& b, std::size_t m) {
  return BuiltStructure{reduct(b.structure, m), b.layout};
}

BuiltStructure build_N2(const GoodSequence& g) {
  const auto& p = g.params;
  const std::size_t cBase = p.N;
  const std::size_t omega = p.N + p.Lambda;
  const std::size_t size = omega + 1;

  BuiltStructure out;
  out.layout.reserve(size);
  IdSet P, Q;
  for (std::size_t i = 0; i < p.N; ++i) {
    Q.push_back(static_cast<ElementId>(i));
    out.layout.push_back(Role{Role::Kind::B, i});
  }
  for (std::size_t a = 0; a < p.Lambda; ++a) {
    P.push_back(static_cast<ElementId>(cBase + a));
    out.layout.push_back(Role{Role::Kind::C, a});
  }
  P.push_back(static_cast<ElementId>(omega));
  out.layout.push_back(Role{Role::Kind::Omega, 0});

  std::vector<PairSet> rels(p.W + 1);
  for (std::size_t n = 0; n <= p.W; ++n) {
    for (std::size_t i = 0; i < p.N; ++i) {
      // Ordinary c_alpha is active in R_n only for n <= residue(alpha).
      for (std::size_t a = 0; a < p.Lambda; ++a)
        if (n <= g.residue(a) && g.row(a, n).test(i))
          rels[n].emplace_back(static_cast<ElementId>(i), static_cast<ElementId>(cBase + a));
      if (g.omega[n].test(i)) rels[n].emplace_back(static_cast<ElementId>(i), static_cast<ElementId>(omega));
    }
  }
  out.structure = make_structure(Vocabulary{p.W + 1}, size, std::move(P), std::move(Q), std::move(rels), "N2");
  return out;
}

namespace {

std::vector<ElementId> keep_ids(const GoodSequence& g, const IndexSet& z) {
  const auto& p = g.params;
  std::vector<ElementId> keep;
  for (std::size_t i = 0; i < p.N; ++i) keep.push_back(static_cast<ElementId>(i));
  for (auto a : z.ordinaries) keep.push_back(static_cast<ElementId>(p.N + a));
  if (z.includeOmega) keep.push_back(static_cast<ElementId>(p.N + p.Lambda));
  return keep;
}

IndexSet all_ordinaries(const GoodSequence& g, bool omega) {
  IndexSet z;
  z.ordinaries.resize(g.params.Lambda);
  for (std::size_t a = 0; a < g.params.Lambda; ++a) z.ordinaries[a] = a;
  z.includeOmega = omega;
  return z;
}

}  // namespace

BuiltStructure build_N1(const GoodSequence& g) {
  return restrict_built(build_N2(g), keep_ids(g, all_ordinaries(g, false)), "N1");
}

BuiltStructure build_MZ(const GoodSequence& g, IndexSet z) {
  z.normalize(g.params.Lambda);
  return restrict_built(build_N2(g), keep_ids(g, z), "MZ");
}

BuiltStructure build_M1(const GoodSequence& g, IndexSet x) {
  x.includeOmega = false;
  auto out = build_MZ(g, std::move(x));
  out.structure = out.structure.renamed("M1");
  return out;
}

BuiltStructure build_M2(const GoodSequence& g, IndexSet x) {
  x.includeOmega = true;
  auto out = build_MZ(g, std::move(x));
  out.structure = out.structure.renamed("M2");
  return out;
}

IndexSet sample_X(const GoodSequence& g, std::size_t cPrime, std::uint64_t seed, std::size_t retries,
                  const VerifyOptions& opts) {
  const auto& p = g.params;
  if (cPrime < 1 || cPrime > p.c) throw ValidationError("sample_X: cPrime must be in 1..c");
  if (cPrime == p.c) return all_ordinaries(g, false);

  const std::size_t classSize = p.Lambda / p.W;
  const std::size_t total = p.Lambda * cPrime / p.c;
  const std::uint64_t period = schedule_period(p);

  TruncationParams thinned = p;
  thinned.c = cPrime;
  const VerifyReport parent = verify_good_sequence(g, p, nullptr, opts);

  std::string lastFailure;
  for (std::size_t attempt = 0; attempt <= retries; ++attempt) {
    std::mt19937_64 rng(detail::mix_seed(seed, 0x5a00 + attempt));
    // Per-class quotas summing to Lambda * cPrime / c; the remainder goes to
    // randomly chosen classes.
    std::vector<std::size_t> quota(p.W, total / p.W);
    std::vector<std::size_t> classes(p.W);
    for (std::size_t k = 0; k < p.W; ++k) classes[k] = k;
    detail::shuffle(rng, classes);
    for (std::size_t r = 0; r < total % p.W; ++r) ++quota[classes[r]];

    IndexSet x;
    for (std::size_t k = 0; k < p.W; ++k) {
      // Class members in schedule order are alpha = k + W*q; a window of
      // consecutive q's covers every schedule pattern evenly.
      const auto start = static_cast<std::size_t>(detail::uniform_below(rng, classSize));
      const std::size_t aligned = start - start % period;
      for (std::size_t j = 0; j < quota[k] && j < classSize; ++j) {
        const std::size_t q = (aligned + j) % classSize;
        x.ordinaries.push_back(k + p.W * q);
      }
    }
    x.normalize(p.Lambda);

    const VerifyReport child = verify_good_sequence(g, thinned, &x.ordinaries, opts);
    bool ok = true;
    for (const auto& check : parent.checks) {
      const CheckResult* mine = child.find(check.name);
      if (check.pass && (!mine || !mine->pass)) {
        ok = false;
        lastFailure = check.name;
        break;
      }
    }
    if (ok) return x;
  }
  throw ValidationError("sample_X: thinned index set fails check '" + lastFailure + "' after " +
                        std::to_string(retries + 1) + " attempts");
}

bool is_robust(const IndexSet& z, const GoodSequence& g, std::size_t cReq) {
  std::vector<std::size_t> counts(g.params.W, 0);
  for (auto a : z.ordinaries)
    if (a < g.params.Lambda) ++counts[g.residue(a)];
  return std::all_of(counts.begin(), counts.end(), [&](std::size_t n) { return n >= cReq; });
}

}  // namespace backforth
