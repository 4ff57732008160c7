#pragma once

// The end-to-end verification pipeline behind `verify-paper`.
//
// Stages: family, structures, ef, backforth, rigidity, census. Every random
// choice is derived from params.seed.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "backforth/families.hpp"
#include "backforth/json_io.hpp"
#include "backforth/paperstructs.hpp"

namespace backforth {

struct PipelineOptions {
  TruncationParams params = default_params();
  std::optional<std::string> stage;  // run only this stage
  bool parallel = false;
  std::uint64_t budget = 0;  // EF node budget; 0 = default_budget()
  std::size_t rounds = 2;
  std::size_t cPrime = 1;  // thinning of X
  std::size_t intermediates = 3;
  std::size_t censusSize = 5;
  std::size_t censusPerClass = 32;
  VerifyOptions verify;
};

struct StageReport {
  std::string name;
  VerifyReport report;
  double seconds = 0;
};

struct PipelineReport {
  TruncationParams params;
  std::vector<StageReport> stages;
  bool pass = true;

  const StageReport* find(const std::string& name) const;
};

const std::vector<std::string>& pipeline_stages();

/// The thinned index set X used for M1 and M2, seeded from g.params.seed.
IndexSet pipeline_x(const GoodSequence& g, std::size_t cPrime, const VerifyOptions& opts = {});

/// Throws ValidationError on an unknown stage name.
PipelineReport run_pipeline(const PipelineOptions& opts);

/// `timings` false drops wall-clock fields so the output is reproducible.
Json pipeline_to_json(const PipelineReport& r, bool timings = true);

}  // namespace backforth
