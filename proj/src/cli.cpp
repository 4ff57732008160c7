#include "backforth/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "backforth/autiso.hpp"
#include "backforth/efgames.hpp"
#include "backforth/json_io.hpp"
#include "backforth/pipeline.hpp"

namespace backforth::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json read_json(const std::string& path) { return parse_json(read_file(path), path); }

void emit(const Json& doc, const std::string& path, std::ostream& out) {
  const std::string text = doc.dump(path.empty() ? 2 : -1) + "\n";
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ValidationError("cannot write '" + path + "'");
  file << text;
}

BuiltStructure read_structure(const std::string& path) {
  try {
    return built_from_json(read_json(path));
  } catch (const DecodeError& e) {
    throw DecodeError(path + ":" + e.what());
  }
}

Json structure_json(const BuiltStructure& b) {
  return b.layout.empty() ? structure_to_json(b.structure) : built_to_json(b);
}

GoodSequence read_sequence(const std::string& path) { return sequence_from_json(read_json(path)); }

TruncationParams read_params(const std::string& path) {
  if (path.empty()) return default_params();
  return params_from_json(read_json(path));
}

IdPair parse_pin(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ValidationError("pin '" + text + "' is not srcId:dstId");
  try {
    std::size_t a = 0, b = 0;
    const auto src = std::stoul(text.substr(0, colon), &a);
    const auto dst = std::stoul(text.substr(colon + 1), &b);
    if (a != colon || b != text.size() - colon - 1) throw std::invalid_argument(text);
    return {static_cast<ElementId>(src), static_cast<ElementId>(dst)};
  } catch (const std::logic_error&) {
    throw ValidationError("pin '" + text + "' is not srcId:dstId");
  }
}

std::vector<ElementId> parse_ids(const std::string& text) {
  std::vector<ElementId> ids;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const auto v = std::stoul(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      ids.push_back(static_cast<ElementId>(v));
    } catch (const std::logic_error&) {
      throw ValidationError("bad id '" + item + "'");
    }
  }
  return ids;
}

std::uint64_t budget_or_default(std::uint64_t budget) { return budget ? budget : default_budget(); }

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite truncations of good independent sequences, with game and rigidity checks."};
  app.require_subcommand(1);
  std::uint64_t budget = 0;
  app.add_option("--budget", budget, "Search node cap (default: BACKFORTH_BUDGET or built in)");

  std::string paramsPath, outPath, familyPath, inPath;

  auto* gen = app.add_subcommand("gen", "Generate a good independent sequence");
  gen->add_option("--params", paramsPath, "Parameter file (default: the P0 set)");
  gen->add_option("--out", outPath, "Output file");

  auto* verifyFamily = app.add_subcommand("verify-family", "Verify a good independent sequence");
  verifyFamily->add_option("--family", familyPath)->required();
  verifyFamily->add_option("--out", outPath);

  std::string kind = "N2", zsPath;
  std::size_t cPrime = 1;
  auto* build = app.add_subcommand("build", "Build N1, N2, M1, M2 or M_Z");
  build->add_option("--family", familyPath)->required();
  build->add_option("--kind", kind)->check(CLI::IsMember({"N1", "N2", "M1", "M2", "MZ"}));
  build->add_option("--cprime", cPrime, "Thinning for M1/M2");
  build->add_option("--z", zsPath, "Index set file for MZ");
  build->add_option("--out", outPath);

  std::size_t level = 0;
  auto* reductCmd = app.add_subcommand("reduct", "Keep relations R_0..R_m");
  reductCmd->add_option("--in", inPath)->required();
  reductCmd->add_option("--m", level)->required();
  reductCmd->add_option("--out", outPath);

  std::string keepText;
  auto* restrictCmd = app.add_subcommand("restrict", "Induced substructure");
  restrictCmd->add_option("--in", inPath)->required();
  restrictCmd->add_option("--keep", keepText, "Comma-separated ids")->required();
  restrictCmd->add_option("--out", outPath);

  std::string leftPath, rightPath;
  std::size_t rounds = 2;
  std::vector<std::string> pins;
  bool noCertificate = false;
  auto* ef = app.add_subcommand("ef", "Decide the r-round back-and-forth game");
  ef->add_option("left", leftPath)->required();
  ef->add_option("right", rightPath)->required();
  ef->add_option("--rounds", rounds);
  ef->add_option("--pin", pins, "srcId:dstId, repeatable");
  ef->add_flag("--no-certificate", noCertificate);
  ef->add_option("--out", outPath);

  std::uint64_t limit = 1000;
  auto* aut = app.add_subcommand("aut", "Count automorphisms");
  aut->add_option("--in", inPath)->required();
  aut->add_option("--limit", limit);

  auto* rigid = app.add_subcommand("rigid", "Rigidity verdict");
  rigid->add_option("--in", inPath)->required();

  std::string aPath, bPath;
  auto* iso = app.add_subcommand("iso", "Isomorphism search");
  iso->add_option("--a", aPath)->required();
  iso->add_option("--b", bPath)->required();

  std::size_t cReq = 0;
  bool parallel = false;
  auto* censusCmd = app.add_subcommand("census", "Pairwise isomorphism over M_Z");
  censusCmd->add_option("--family", familyPath)->required();
  censusCmd->add_option("--zs", zsPath)->required();
  censusCmd->add_option("--creq", cReq, "Robustness threshold (default: c)");
  censusCmd->add_flag("--parallel", parallel);

  std::string stage, fixturesDir;
  auto* paper = app.add_subcommand("verify-paper", "Run every verification stage");
  paper->add_option("--params", paramsPath);
  paper->add_option("--stage", stage)->check(CLI::IsMember(pipeline_stages()));
  paper->add_flag("--parallel", parallel);
  paper->add_option("--rounds", rounds);
  paper->add_option("--out", outPath);
  paper->add_option("--regen-fixtures", fixturesDir, "Write expected-report fixtures into this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kHolds : kUsage;
  }

  try {
    if (*gen) {
      const auto p = read_params(paramsPath);
      try {
        emit(sequence_to_json(build_good_sequence(p)), outPath, out);
        return kHolds;
      } catch (const RetriesExhausted& e) {
        err << e.what() << "\n" << report_to_json(e.last_report()).dump(2) << "\n";
        return kFails;
      }
    }
    if (*verifyFamily) {
      const auto g = read_sequence(familyPath);
      const auto report = verify_good_sequence(g, g.params);
      emit(report_to_json(report), outPath, out);
      return report.pass ? kHolds : kFails;
    }
    if (*build) {
      const auto g = read_sequence(familyPath);
      BuiltStructure b;
      if (kind == "N2") b = build_N2(g);
      else if (kind == "N1") b = build_N1(g);
      else if (kind == "M1") b = build_M1(g, pipeline_x(g, cPrime));
      else if (kind == "M2") b = build_M2(g, pipeline_x(g, cPrime));
      else {
        if (zsPath.empty()) throw ValidationError("build --kind MZ needs --z");
        b = build_MZ(g, index_set_from_json(read_json(zsPath)));
      }
      emit(built_to_json(b), outPath, out);
      return kHolds;
    }
    if (*reductCmd) {
      const auto b = read_structure(inPath);
      if (level >= b.structure.rel_count()) throw ValidationError("--m must be below relCount");
      emit(structure_json(BuiltStructure{reduct(b.structure, level), b.layout}), outPath, out);
      return kHolds;
    }
    if (*restrictCmd) {
      const auto b = read_structure(inPath);
      const auto keep = parse_ids(keepText);
      if (b.layout.empty()) {
        const auto r = restrict(b.structure, keep);
        Json doc = structure_to_json(r.structure);
        Json renumber = Json::object();
        for (std::size_t i = 0; i < r.original.size(); ++i) renumber[std::to_string(r.original[i])] = i;
        doc["renumber"] = std::move(renumber);
        emit(doc, outPath, out);
      } else {
        emit(built_to_json(restrict_built(b, keep, b.structure.name())), outPath, out);
      }
      return kHolds;
    }
    if (*ef) {
      const auto s = read_structure(leftPath).structure;
      const auto t = read_structure(rightPath).structure;
      std::vector<IdPair> pinPairs;
      for (const auto& p : pins) pinPairs.push_back(parse_pin(p));
      GameConfig cfg{rounds, PartialMap(std::move(pinPairs))};
      const auto result = ef_decide(s, t, cfg, EfOptions{budget_or_default(budget), !noCertificate});
      emit(game_to_json(result), outPath, out);
      return result.winner == Winner::Duplicator ? kHolds : kFails;
    }
    if (*aut) {
      const auto report = automorphisms(read_structure(inPath).structure, limit);
      emit(aut_to_json(report), "", out);
      return kHolds;
    }
    if (*rigid) {
      const auto report = automorphisms(read_structure(inPath).structure, 2);
      const bool isRigid = report.automorphismCount == 1;
      Json doc{{"rigid", isRigid}, {"report", aut_to_json(report)}};
      emit(doc, "", out);
      return isRigid ? kHolds : kFails;
    }
    if (*iso) {
      const auto a = read_structure(aPath).structure;
      const auto b = read_structure(bPath).structure;
      const auto map = isomorphic(a, b);
      Json doc{{"isomorphic", map.has_value()}, {"map", nullptr}};
      if (map) doc["map"] = *map;
      emit(doc, "", out);
      return map ? kHolds : kFails;
    }
    if (*censusCmd) {
      const auto g = read_sequence(familyPath);
      const Json zsDoc = read_json(zsPath);
      if (!zsDoc.is_array()) throw DecodeError(zsPath + ": expected an array of index sets");
      std::vector<IndexSet> zs;
      for (const auto& z : zsDoc) zs.push_back(index_set_from_json(z));
      const auto result = census(g, zs, cReq ? cReq : g.params.c, parallel);
      emit(census_to_json(result), "", out);
      return result.off_diagonal_nonisomorphic() && result.diagonal_isomorphic() ? kHolds : kFails;
    }
    if (*paper) {
      PipelineOptions opts;
      opts.params = read_params(paramsPath);
      if (!stage.empty()) opts.stage = stage;
      opts.parallel = parallel;
      opts.budget = budget;
      opts.rounds = rounds;
      const auto report = run_pipeline(opts);
      emit(pipeline_to_json(report), outPath, out);
      if (!fixturesDir.empty()) {
        std::filesystem::create_directories(fixturesDir);
        emit(params_to_json(opts.params), fixturesDir + "/p0_params.json", out);
        emit(pipeline_to_json(report, false), fixturesDir + "/p0_report.json", out);
      }
      return report.pass ? kHolds : kFails;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace backforth::cli
