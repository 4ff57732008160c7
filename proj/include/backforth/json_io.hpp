#pragma once

// JSON forms of every interchange value. Readers throw DecodeError with a
// JSON-pointer style location ("/R/2/5") on malformed documents.

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "backforth/autiso.hpp"
#include "backforth/core.hpp"
#include "backforth/efgames.hpp"
#include "backforth/families.hpp"
#include "backforth/paperstructs.hpp"

namespace backforth {

using Json = nlohmann::ordered_json;

Json structure_to_json(const Structure& s);
Structure structure_from_json(const Json& doc);

Json built_to_json(const BuiltStructure& b);
/// The layout is optional; without it the result has an empty layout.
BuiltStructure built_from_json(const Json& doc);

Json params_to_json(const TruncationParams& p);
/// Missing fields keep their P0 defaults; the result is validated.
TruncationParams params_from_json(const Json& doc);

Json sequence_to_json(const GoodSequence& g);
GoodSequence sequence_from_json(const Json& doc);

Json index_set_to_json(const IndexSet& z);
IndexSet index_set_from_json(const Json& doc);

Json report_to_json(const VerifyReport& r);
Json check_to_json(const CheckResult& c);

Json map_to_json(const PartialMap& f);
Json certificate_to_json(const Certificate& c);
Json game_to_json(const GameResult& r);

Json aut_to_json(const AutReport& r);
Json census_to_json(const CensusResult& r);

/// Parses text, wrapping syntax errors in DecodeError.
Json parse_json(std::string_view text, const std::string& what);

}  // namespace backforth
