#include "backforth/json_io.hpp"

#include <algorithm>
#include <limits>

namespace backforth {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw DecodeError((path.empty() ? std::string("/") : path) + ": " + msg);
}

const Json& field(const Json& doc, const char* key, const std::string& path) {
  if (!doc.is_object()) fail(path, "expected an object");
  auto it = doc.find(key);
  if (it == doc.end()) fail(path, std::string("missing field '") + key + "'");
  return *it;
}

std::uint64_t read_uint(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    fail(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

ElementId read_id(const Json& j, const std::string& path) {
  const auto v = read_uint(j, path);
  if (v > std::numeric_limits<ElementId>::max()) fail(path, "id too large");
  return static_cast<ElementId>(v);
}

/// Strictly ascending list of naturals.
std::vector<std::uint64_t> read_ascending(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  std::vector<std::uint64_t> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = path + "/" + std::to_string(i);
    const auto v = read_uint(j[i], at);
    if (!out.empty() && v <= out.back()) fail(at, "list is not strictly ascending");
    out.push_back(v);
  }
  return out;
}

IdSet read_ids(const Json& j, const std::string& path) {
  const auto raw = read_ascending(j, path);
  IdSet out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] > std::numeric_limits<ElementId>::max()) fail(path + "/" + std::to_string(i), "id too large");
    out.push_back(static_cast<ElementId>(raw[i]));
  }
  return out;
}

Json ids_json(const IdSet& ids) {
  Json arr = Json::array();
  for (auto x : ids) arr.push_back(x);
  return arr;
}

Json point_set_json(const PointSet& s) {
  Json arr = Json::array();
  for (auto x : s.members()) arr.push_back(x);
  return arr;
}

PointSet read_point_set(const Json& j, std::size_t base, const std::string& path) {
  const auto raw = read_ascending(j, path);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] >= base) fail(path + "/" + std::to_string(i), "point outside the base set");
    members.push_back(static_cast<std::size_t>(raw[i]));
  }
  return PointSet::from_members(base, members);
}

const char* side_name(Side s) { return s == Side::Left ? "left" : "right"; }

Json bijection_json(const std::optional<Bijection>& b) {
  if (!b) return nullptr;
  Json arr = Json::array();
  for (auto x : *b) arr.push_back(x);
  return arr;
}

Json duplicator_json(const DuplicatorNode& node) {
  Json entries = Json::array();
  for (const auto& e : node.entries) {
    Json entry{{"side", side_name(e.side)}, {"challenge", e.challenge}, {"response", e.response}};
    if (!e.next.empty()) entry["next"] = duplicator_json(e.next.front());
    entries.push_back(std::move(entry));
  }
  return Json{{"entries", std::move(entries)}};
}

Json spoiler_json(const SpoilerNode& node) {
  if (node.leaf) return Json{{"leaf", true}};
  Json replies = Json::array();
  for (const auto& r : node.replies) {
    Json reply{{"response", r.response}};
    if (!r.next.empty()) reply["next"] = spoiler_json(r.next.front());
    replies.push_back(std::move(reply));
  }
  return Json{{"side", side_name(node.side)}, {"challenge", node.challenge}, {"replies", std::move(replies)}};
}

}  // namespace

Json parse_json(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DecodeError(what + ": " + e.what());
  }
}

Json structure_to_json(const Structure& s) {
  Json rels = Json::array();
  for (const auto& rel : s.rels()) {
    Json pairs = Json::array();
    for (const auto& [q, p] : rel) pairs.push_back({q, p});
    rels.push_back(std::move(pairs));
  }
  return Json{{"name", s.name()},
              {"relCount", s.rel_count()},
              {"domainSize", s.size()},
              {"P", ids_json(s.P())},
              {"Q", ids_json(s.Q())},
              {"R", std::move(rels)}};
}

Structure structure_from_json(const Json& doc) {
  if (!doc.is_object()) fail("", "expected an object");
  const Json& name = field(doc, "name", "");
  if (!name.is_string()) fail("/name", "expected a string");
  const auto relCount = read_uint(field(doc, "relCount", ""), "/relCount");
  const auto domainSize = read_uint(field(doc, "domainSize", ""), "/domainSize");
  if (relCount < 1) fail("/relCount", "must be at least 1");
  if (domainSize > std::numeric_limits<ElementId>::max()) fail("/domainSize", "too large");
  IdSet P = read_ids(field(doc, "P", ""), "/P");
  IdSet Q = read_ids(field(doc, "Q", ""), "/Q");
  const Json& R = field(doc, "R", "");
  if (!R.is_array()) fail("/R", "expected an array");
  if (R.size() != relCount) fail("/R", "expected " + std::to_string(relCount) + " relations");
  std::vector<PairSet> rels(relCount);
  for (std::size_t n = 0; n < relCount; ++n) {
    const std::string rpath = "/R/" + std::to_string(n);
    if (!R[n].is_array()) fail(rpath, "expected an array");
    for (std::size_t k = 0; k < R[n].size(); ++k) {
      const std::string at = rpath + "/" + std::to_string(k);
      const Json& pair = R[n][k];
      if (!pair.is_array() || pair.size() != 2) fail(at, "expected a [q, p] pair");
      IdPair v{read_id(pair[0], at + "/0"), read_id(pair[1], at + "/1")};
      if (!rels[n].empty() && v <= rels[n].back()) fail(at, "pairs are not strictly ascending");
      rels[n].push_back(v);
    }
  }
  try {
    return make_structure(Vocabulary{relCount}, domainSize, std::move(P), std::move(Q), std::move(rels),
                          name.get<std::string>());
  } catch (const ValidationError& e) {
    fail("", e.what());
  }
}

Json built_to_json(const BuiltStructure& b) {
  Json doc = structure_to_json(b.structure);
  Json layout = Json::object();
  for (std::size_t i = 0; i < b.layout.size(); ++i) layout[std::to_string(i)] = b.layout[i].label();
  doc["layout"] = std::move(layout);
  return doc;
}

BuiltStructure built_from_json(const Json& doc) {
  BuiltStructure out;
  out.structure = structure_from_json(doc);
  auto it = doc.find("layout");
  if (it == doc.end()) return out;
  if (!it->is_object()) fail("/layout", "expected an object");
  if (it->size() != out.structure.size()) fail("/layout", "must name every element");
  out.layout.resize(out.structure.size());
  for (std::size_t i = 0; i < out.structure.size(); ++i) {
    const std::string key = std::to_string(i);
    auto entry = it->find(key);
    if (entry == it->end()) fail("/layout", "missing id " + key);
    if (!entry->is_string()) fail("/layout/" + key, "expected a string");
    try {
      out.layout[i] = Role::parse(entry->get<std::string>());
    } catch (const ValidationError& e) {
      fail("/layout/" + key, e.what());
    }
  }
  try {
    out.validate();
  } catch (const ValidationError& e) {
    fail("/layout", e.what());
  }
  return out;
}

Json params_to_json(const TruncationParams& p) {
  return Json{{"N", p.N},     {"W", p.W},         {"Lambda", p.Lambda}, {"c", p.c},
              {"d", p.d},     {"s", p.s},         {"m_cap", p.m_cap},   {"n_cap", p.n_cap},
              {"t", p.t},     {"seed", p.seed},   {"retries", p.retries}};
}

TruncationParams params_from_json(const Json& doc) {
  if (!doc.is_object()) fail("", "expected an object");
  TruncationParams p = default_params();
  auto read = [&](const char* key, auto& slot) {
    auto it = doc.find(key);
    if (it != doc.end()) slot = static_cast<std::remove_reference_t<decltype(slot)>>(read_uint(*it, std::string("/") + key));
  };
  read("N", p.N);
  read("W", p.W);
  read("Lambda", p.Lambda);
  read("c", p.c);
  read("d", p.d);
  read("s", p.s);
  read("m_cap", p.m_cap);
  read("n_cap", p.n_cap);
  read("t", p.t);
  read("seed", p.seed);
  read("retries", p.retries);
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    static const char* known[] = {"N", "W", "Lambda", "c", "d", "s", "m_cap", "n_cap", "t", "seed", "retries"};
    if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return it.key() == k; }))
      fail("/" + it.key(), "unknown parameter");
  }
  p.validate();
  return p;
}

Json sequence_to_json(const GoodSequence& g) {
  const auto& p = g.params;
  Json rows = Json::object();
  for (std::size_t a = 0; a < p.Lambda; ++a)
    for (std::size_t n = 0; n <= p.W; ++n)
      rows[std::to_string(a) + "," + std::to_string(n)] = point_set_json(g.row(a, n));
  Json omega = Json::object();
  for (std::size_t n = 0; n <= p.W; ++n) omega[std::to_string(n)] = point_set_json(g.omega[n]);
  return Json{{"params", params_to_json(p)}, {"rows", std::move(rows)}, {"omega", std::move(omega)}};
}

GoodSequence sequence_from_json(const Json& doc) {
  GoodSequence g;
  try {
    g.params = params_from_json(field(doc, "params", ""));
  } catch (const ValidationError& e) {
    fail("/params", e.what());
  }
  const auto& p = g.params;
  const Json& rows = field(doc, "rows", "");
  const Json& omega = field(doc, "omega", "");
  if (!rows.is_object()) fail("/rows", "expected an object");
  if (!omega.is_object()) fail("/omega", "expected an object");
  if (rows.size() != p.Lambda * (p.W + 1)) fail("/rows", "expected exactly Lambda * (W + 1) rows");
  if (omega.size() != p.W + 1) fail("/omega", "expected exactly W + 1 rows");
  g.rows.resize(p.Lambda * (p.W + 1));
  for (std::size_t a = 0; a < p.Lambda; ++a)
    for (std::size_t n = 0; n <= p.W; ++n) {
      const std::string key = std::to_string(a) + "," + std::to_string(n);
      auto it = rows.find(key);
      if (it == rows.end()) fail("/rows", "missing row " + key);
      g.row(a, n) = read_point_set(*it, p.N, "/rows/" + key);
    }
  for (std::size_t n = 0; n <= p.W; ++n) {
    const std::string key = std::to_string(n);
    auto it = omega.find(key);
    if (it == omega.end()) fail("/omega", "missing row " + key);
    g.omega.push_back(read_point_set(*it, p.N, "/omega/" + key));
  }
  return g;
}

Json index_set_to_json(const IndexSet& z) {
  Json ords = Json::array();
  for (auto a : z.ordinaries) ords.push_back(a);
  return Json{{"ordinaries", std::move(ords)}, {"includeOmega", z.includeOmega}};
}

IndexSet index_set_from_json(const Json& doc) {
  IndexSet z;
  for (auto v : read_ascending(field(doc, "ordinaries", ""), "/ordinaries")) z.ordinaries.push_back(v);
  const Json& om = field(doc, "includeOmega", "");
  if (!om.is_boolean()) fail("/includeOmega", "expected a boolean");
  z.includeOmega = om.get<bool>();
  return z;
}

Json check_to_json(const CheckResult& c) {
  Json out{{"name", c.name}, {"pass", c.pass}, {"mode", c.mode == CheckMode::Exhaustive ? "exhaustive" : "sampled"}};
  if (c.mode == CheckMode::Sampled) out["sampleSize"] = c.examined;
  out["examined"] = c.examined;
  out["total"] = c.total;
  out["detail"] = c.detail;
  return out;
}

Json report_to_json(const VerifyReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) checks.push_back(check_to_json(c));
  return Json{{"pass", r.pass}, {"checks", std::move(checks)}};
}

Json map_to_json(const PartialMap& f) {
  Json arr = Json::array();
  for (const auto& [a, b] : f.pairs()) arr.push_back({a, b});
  return arr;
}

Json certificate_to_json(const Certificate& c) {
  Json out{{"winner", c.winner == Winner::Duplicator ? "duplicator" : "spoiler"}};
  if (c.duplicator) out["strategy"] = duplicator_json(*c.duplicator);
  if (c.spoiler) out["strategy"] = spoiler_json(*c.spoiler);
  return out;
}

Json game_to_json(const GameResult& r) {
  return Json{{"winner", r.winner == Winner::Duplicator ? "duplicator" : "spoiler"},
              {"stats", {{"nodes", r.stats.nodes},
                         {"memoHits", r.stats.memoHits},
                         {"collapsedChallenges", r.stats.collapsedChallenges}}},
              {"certificate", certificate_to_json(r.certificate)}};
}

Json aut_to_json(const AutReport& r) {
  Json out;
  if (r.limitExceeded)
    out["automorphismCount"] = "limit-exceeded";
  else
    out["automorphismCount"] = r.automorphismCount;
  out["found"] = r.automorphismCount;
  out["nontrivialWitness"] = bijection_json(r.nontrivialWitness);
  out["searchStats"] = {{"nodes", r.searchStats.nodes}, {"prunes", r.searchStats.prunes}, {"leaves", r.searchStats.leaves}};
  return out;
}

Json census_to_json(const CensusResult& r) {
  Json zs = Json::array();
  for (const auto& z : r.zs) zs.push_back(index_set_to_json(z));
  Json matrix = Json::array();
  Json witnesses = Json::array();
  for (const auto& row : r.matrix) {
    Json verdicts = Json::array(), maps = Json::array();
    for (const auto& cell : row) {
      verdicts.push_back(cell.isomorphic);
      maps.push_back(bijection_json(cell.witness));
    }
    matrix.push_back(std::move(verdicts));
    witnesses.push_back(std::move(maps));
  }
  return Json{{"zs", std::move(zs)},
              {"matrix", std::move(matrix)},
              {"diagonalIsomorphic", r.diagonal_isomorphic()},
              {"offDiagonalNonIsomorphic", r.off_diagonal_nonisomorphic()},
              {"symmetric", r.symmetric()},
              {"witnesses", std::move(witnesses)}};
}

}  // namespace backforth
