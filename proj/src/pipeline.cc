//
// Copyright 2026 The ReconLab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "reconlab/pipeline.h"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "json.hpp"
#include "reconlab/csv.h"
#include "reconlab/linkage.h"
#include "reconlab/parallel.h"
#include "reconlab/rng.h"

namespace reconlab {
namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

constexpr std::string_view kManifest = "manifest.json";
constexpr std::string_view kConfigFile = "config.txt";

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> SplitList(std::string_view s) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= s.size()) {
    const size_t comma = s.find(',', start);
    const std::string item =
        Trim(s.substr(start, comma == std::string_view::npos ? s.size() - start : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

template <typename T>
std::string JoinList(const std::vector<T>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += FormatDouble(v[i]);
    } else if constexpr (std::is_arithmetic_v<T>) {
      out += std::to_string(v[i]);
    } else {
      out += v[i];
    }
  }
  return out;
}

struct KeyHandler {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

int64_t ToInt(const std::string& key, const std::string& v) {
  try {
    return ParseInt(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

double ToDouble(const std::string& key, const std::string& v) {
  try {
    return ParseDouble(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

bool ToBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

template <typename Fn>
auto Wrap(const std::string& key, Fn fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

const std::vector<KeyHandler>& Handlers() {
  using C = ExperimentConfig;
  using S = const std::string&;
  static const std::vector<KeyHandler> kHandlers = {
      {"seed",
       [](C& c, S v) {
         if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
           throw ConfigError("seed: expected an unsigned integer, got '" + v + "'");
         c.seed = std::stoull(v);
       },
       [](const C& c) { return std::to_string(c.seed); }},
      {"universe.manifest", [](C& c, S v) { c.geography = v; },
       [](const C& c) { return c.geography; }},
      {"universe.tracts",
       [](C& c, S v) { c.shape.tracts = static_cast<int>(ToInt("universe.tracts", v)); },
       [](const C& c) { return std::to_string(c.shape.tracts); }},
      {"universe.blocks_per_tract",
       [](C& c, S v) {
         c.shape.blocks_per_tract = static_cast<int>(ToInt("universe.blocks_per_tract", v));
       },
       [](const C& c) { return std::to_string(c.shape.blocks_per_tract); }},
      {"universe.block_sizes",
       [](C& c, S v) {
         c.shape.block_sizes.clear();
         for (const auto& item : SplitList(v))
           c.shape.block_sizes.push_back(ToInt("universe.block_sizes", item));
       },
       [](const C& c) { return JoinList(c.shape.block_sizes); }},
      {"universe.size_weights",
       [](C& c, S v) {
         c.shape.size_weights.clear();
         for (const auto& item : SplitList(v))
           c.shape.size_weights.push_back(ToDouble("universe.size_weights", item));
       },
       [](const C& c) { return JoinList(c.shape.size_weights); }},
      {"universe.state",
       [](C& c, S v) { c.shape.state = static_cast<uint16_t>(ToInt("universe.state", v)); },
       [](const C& c) { return std::to_string(c.shape.state); }},
      {"universe.county",
       [](C& c, S v) { c.shape.county = static_cast<uint16_t>(ToInt("universe.county", v)); },
       [](const C& c) { return std::to_string(c.shape.county); }},
      {"population.male_share",
       [](C& c, S v) { c.male_share = ToDouble("population.male_share", v); },
       [](const C& c) { return FormatDouble(c.male_share); }},
      {"population.missing_pid_rate",
       [](C& c, S v) { c.missing_pid_rate = ToDouble("population.missing_pid_rate", v); },
       [](const C& c) { return FormatDouble(c.missing_pid_rate); }},
      {"population.duplicate_pid_rate",
       [](C& c, S v) { c.duplicate_pid_rate = ToDouble("population.duplicate_pid_rate", v); },
       [](const C& c) { return FormatDouble(c.duplicate_pid_rate); }},
      {"defense.name", [](C& c, S v) { c.defense = v; }, [](const C& c) { return c.defense; }},
      {"defense.swap.rate", [](C& c, S v) { c.swap.rate = ToDouble("defense.swap.rate", v); },
       [](const C& c) { return FormatDouble(c.swap.rate); }},
      {"defense.swap.scope",
       [](C& c, S v) { c.swap.scope = Wrap("defense.swap.scope", [&] { return ParseSwapScope(v); }); },
       [](const C& c) { return std::string(SwapScopeName(c.swap.scope)); }},
      {"defense.swap.selection",
       [](C& c, S v) {
         c.swap.selection =
             Wrap("defense.swap.selection", [&] { return ParseSwapSelection(v); });
       },
       [](const C& c) { return std::string(SwapSelectionName(c.swap.selection)); }},
      {"defense.noise.family",
       [](C& c, S v) {
         c.noise.family = Wrap("defense.noise.family", [&] { return ParseNoiseFamily(v); });
       },
       [](const C& c) { return std::string(NoiseFamilyName(c.noise.family)); }},
      {"defense.noise.sex_age_scale",
       [](C& c, S v) { c.noise.sex_age_scale = ToDouble("defense.noise.sex_age_scale", v); },
       [](const C& c) { return FormatDouble(c.noise.sex_age_scale); }},
      {"defense.noise.race_eth_scale",
       [](C& c, S v) { c.noise.race_eth_scale = ToDouble("defense.noise.race_eth_scale", v); },
       [](const C& c) { return FormatDouble(c.noise.race_eth_scale); }},
      {"defense.noise.detail_scale",
       [](C& c, S v) { c.noise.detail_scale = ToDouble("defense.noise.detail_scale", v); },
       [](const C& c) { return FormatDouble(c.noise.detail_scale); }},
      {"defense.suppress.threshold",
       [](C& c, S v) { c.suppress.threshold = ToInt("defense.suppress.threshold", v); },
       [](const C& c) { return std::to_string(c.suppress.threshold); }},
      {"defense.suppress.whole_table",
       [](C& c, S v) { c.suppress.whole_table = ToBool("defense.suppress.whole_table", v); },
       [](const C& c) { return std::string(c.suppress.whole_table ? "true" : "false"); }},
      {"reconstruct.mode",
       [](C& c, S v) { c.mode = Wrap("reconstruct.mode", [&] { return ParseReconMode(v); }); },
       [](const C& c) { return std::string(ReconModeName(c.mode)); }},
      {"solver.max_nodes", [](C& c, S v) { c.limits.max_nodes = ToInt("solver.max_nodes", v); },
       [](const C& c) { return std::to_string(c.limits.max_nodes); }},
      {"solver.max_seconds",
       [](C& c, S v) { c.limits.max_seconds = ToDouble("solver.max_seconds", v); },
       [](const C& c) { return FormatDouble(c.limits.max_seconds); }},
      {"solver.lp_max_free",
       [](C& c, S v) { c.limits.lp_max_free = static_cast<int>(ToInt("solver.lp_max_free", v)); },
       [](const C& c) { return std::to_string(c.limits.lp_max_free); }},
      {"solver.restart_nodes",
       [](C& c, S v) { c.limits.restart_nodes = ToInt("solver.restart_nodes", v); },
       [](const C& c) { return std::to_string(c.limits.restart_nodes); }},
      {"solvar.enumerate_limit",
       [](C& c, S v) {
         c.solvar.enumerate_limit = static_cast<int>(ToInt("solvar.enumerate_limit", v));
       },
       [](const C& c) { return std::to_string(c.solvar.enumerate_limit); }},
      {"solvar.enumerate_nodes",
       [](C& c, S v) { c.solvar.enumerate_limits.max_nodes = ToInt("solvar.enumerate_nodes", v); },
       [](const C& c) { return std::to_string(c.solvar.enumerate_limits.max_nodes); }},
      {"solvar.milp_nodes", [](C& c, S v) { c.solvar.milp_nodes = ToInt("solvar.milp_nodes", v); },
       [](const C& c) { return std::to_string(c.solvar.milp_nodes); }},
      {"solvar.milp_max_free",
       [](C& c, S v) { c.solvar.milp_max_free = static_cast<int>(ToInt("solvar.milp_max_free", v)); },
       [](const C& c) { return std::to_string(c.solvar.milp_max_free); }},
      {"attack.attackers", [](C& c, S v) { c.attackers = SplitList(v); },
       [](const C& c) { return JoinList(c.attackers); }},
      {"attack.baselines", [](C& c, S v) { c.baselines = ToBool("attack.baselines", v); },
       [](const C& c) { return std::string(c.baselines ? "true" : "false"); }},
      {"attack.mdg_frame", [](C& c, S v) { c.mdg_frame = v; },
       [](const C& c) { return c.mdg_frame; }},
  };
  return kHandlers;
}

fs::path At(const fs::path& dir, std::string_view name) { return dir / std::string(name); }

struct StageIo {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

bool Defended(const ExperimentConfig& cfg) { return cfg.defense != "none"; }

std::string ReconDataName(const ExperimentConfig& cfg) {
  return "rhdf_" + std::string(ReconModeName(cfg.mode));
}

// Solution variability of every block problem in a bundle. Blocks that
// cannot be posed (unreconstructable or infeasible) are left out.
std::vector<SolvarResult> SolvarForBundle(const TableBundle& bundle, const GeoUniverse& universe,
                                          const SolvarOptions& options, int jobs) {
  std::vector<std::optional<SolvarResult>> slots(universe.size());
  ParallelFor(universe.size(), jobs, [&](size_t b) {
    const ReconProblem p = BuildProblemB(bundle, universe.block(b).str());
    if (p.status != BuildStatus::kOk) return;
    try {
      slots[b] = ComputeSolvar(p, options);
    } catch (const InfeasibleProblem&) {
    }
  });
  std::vector<SolvarResult> out;
  for (auto& s : slots)
    if (s) out.push_back(std::move(*s));
  return out;
}

void WriteKeyValues(const std::vector<std::pair<std::string, std::string>>& kv,
                    const fs::path& path) {
  CsvWriter w(path);
  w.Row({"key", "value"});
  for (const auto& [k, v] : kv) w.Row({k, v});
}

std::string PutativeFileName(const std::string& data, const std::string& attacker) {
  return "putative_" + data + "_" + attacker + ".csv";
}

void WritePutative(const std::vector<EnhancedRow>& rows, const std::vector<char>& confirmed,
                   const fs::path& path) {
  CsvWriter w(path);
  w.Row({"attacker_index", "source_index", "pass", "pid", "block", "sex", "age", "race",
         "ethnicity", "confirmed"});
  for (size_t k = 0; k < rows.size(); ++k) {
    const EnhancedRow& e = rows[k];
    w.Row({std::to_string(e.attacker_index), std::to_string(e.source_index),
           std::to_string(e.pass), std::to_string(e.row.pid), e.row.block.str(),
           std::string(1, SexCode(e.row.sex)), std::to_string(e.row.age), RaceFlags(e.race),
           std::string(1, EthnicityCode(e.eth)), confirmed[k] ? "1" : "0"});
  }
}

Degradation DegradationFor(const std::string& attacker) {
  if (attacker == "perfect") return PerfectDegradation();
  if (attacker == "comrcl") return CommercialDegradation();
  throw ConfigError("attack.attackers: unknown attacker '" + attacker + "'");
}

StageIo Generate(const ExperimentConfig& cfg, const fs::path& dir) {
  StageIo io;
  GeoUniverse universe;
  if (cfg.geography.empty()) {
    universe = MakeSyntheticUniverse(cfg.shape, StageSeed(cfg.seed, "universe"));
  } else {
    universe = ReadGeographyManifest(cfg.geography);
  }
  WriteGeographyManifest(universe, At(dir, "geography.csv"));

  PopulationSpec spec;
  spec.universe = universe;
  spec.mixture = DefaultMixture();
  spec.age_weights = DefaultAgeWeights();
  spec.male_share = cfg.male_share;
  spec.missing_pid_rate = cfg.missing_pid_rate;
  spec.duplicate_pid_rate = cfg.duplicate_pid_rate;
  spec.seed = StageSeed(cfg.seed, "population");
  const auto pop = GeneratePopulation(spec);
  WriteMicrodata(pop, At(dir, "truth.csv"));
  const auto dd = DataDefinedFilter(pop, StageSeed(cfg.seed, "data-defined"));
  WriteMicrodata(dd, At(dir, "data_defined.csv"));
  io.outputs = {"geography.csv", "truth.csv", "data_defined.csv"};
  const uint64_t attacker_seed = StageSeed(cfg.seed, "attacker");
  for (const auto& name : cfg.attackers) {
    const auto file =
        MakeAttackerFile(dd, universe, DegradationFor(name), DeriveSeed(attacker_seed, name));
    const std::string out = "attacker_" + name + ".csv";
    WriteAttackerFile(file, At(dir, out));
    io.outputs.push_back(out);
  }
  return io;
}

StageIo Defend(const ExperimentConfig& cfg, const fs::path& dir, int jobs) {
  StageIo io{{"geography.csv", "truth.csv"}, {"hdf.csv"}};
  const GeoUniverse universe = ReadGeographyManifest(At(dir, "geography.csv"));
  auto pop = ReadMicrodata(At(dir, "truth.csv"));
  const uint64_t seed = StageSeed(cfg.seed, "defend");
  if (cfg.defense == "swap") {
    SwapConfig sc = cfg.swap;
    sc.seed = seed;
    auto res = SwapDefense(pop, sc);
    pop = std::move(res.records);
    const SwapReport& r = res.report;
    WriteKeyValues({{"households", std::to_string(r.households)},
                    {"pairs_requested", std::to_string(r.pairs_requested)},
                    {"pairs_swapped", std::to_string(r.pairs_swapped)},
                    {"cross_size_pairs", std::to_string(r.cross_size_pairs)},
                    {"unpaired", std::to_string(r.unpaired)},
                    {"households_moved", std::to_string(r.households_moved)}},
                   At(dir, "swap_report.csv"));
    io.outputs.push_back("swap_report.csv");
  } else if (cfg.defense == "noise") {
    pop = NoiseDefense(pop, universe, cfg.noise, seed, jobs).records;
  }
  WriteMicrodata(pop, At(dir, "hdf.csv"));
  return io;
}

StageIo TabulateStage(const ExperimentConfig& cfg, const fs::path& dir) {
  StageIo io{{"geography.csv", "hdf.csv"}, {"tables.csv", "tables.csv.schema"}};
  const GeoUniverse universe = ReadGeographyManifest(At(dir, "geography.csv"));
  TableBundle bundle = Tabulate(ReadMicrodata(At(dir, "hdf.csv")), universe, AllTableNames());
  if (cfg.defense == "suppress") {
    auto res = SuppressDefense(bundle, cfg.suppress);
    bundle = std::move(res.bundle);
    WriteSuppressionReport(res.report, At(dir, "suppression_report.csv"));
    io.outputs.push_back("suppression_report.csv");
  }
  WriteBundle(bundle, At(dir, "tables.csv"));
  if (Defended(cfg)) {
    io.inputs.push_back("truth.csv");
    WriteBundle(Tabulate(ReadMicrodata(At(dir, "truth.csv")), universe, AllTableNames()),
                At(dir, "truth_tables.csv"));
    io.outputs.push_back("truth_tables.csv");
    io.outputs.push_back("truth_tables.csv.schema");
  }
  return io;
}

StageIo Reconstruct(const ExperimentConfig& cfg, const fs::path& dir, int jobs) {
  StageIo io{{"geography.csv", "tables.csv", "tables.csv.schema"},
             {"rhdf.csv", "solver_report.csv"}};
  const GeoUniverse universe = ReadGeographyManifest(At(dir, "geography.csv"));
  const TableBundle bundle = ReadBundle(At(dir, "tables.csv"));
  const auto rec =
      AssembleRhdf(bundle, universe, cfg.mode, cfg.limits, StageSeed(cfg.seed, "reconstruct"), jobs);
  WriteMicrodata(rec.records, At(dir, "rhdf.csv"));
  WriteSolverReport(rec.report, At(dir, "solver_report.csv"), false);
  return io;
}

StageIo SolvarStage(const ExperimentConfig& cfg, const fs::path& dir, int jobs) {
  StageIo io{{"geography.csv", "tables.csv", "tables.csv.schema"},
             {"solvar.csv", "cumsolvar.csv"}};
  const GeoUniverse universe = ReadGeographyManifest(At(dir, "geography.csv"));
  const auto results = SolvarForBundle(ReadBundle(At(dir, "tables.csv")), universe, cfg.solvar, jobs);
  WriteSolvar(results, At(dir, "solvar.csv"));
  WriteCumSolvar(CumSolvar(results, DefaultPercentGrid(), StageSeed(cfg.seed, "cumsolvar")),
                 At(dir, "cumsolvar.csv"));
  if (Defended(cfg)) {
    io.inputs.push_back("truth_tables.csv");
    io.inputs.push_back("truth_tables.csv.schema");
    WriteSolvar(SolvarForBundle(ReadBundle(At(dir, "truth_tables.csv")), universe, cfg.solvar, jobs),
                At(dir, "solvar_truth.csv"));
    io.outputs.push_back("solvar_truth.csv");
  }
  return io;
}

StageIo Attack(const ExperimentConfig& cfg, const fs::path& dir) {
  const std::string solvar_file = Defended(cfg) ? "solvar_truth.csv" : "solvar.csv";
  StageIo io{{"geography.csv", "truth.csv", "data_defined.csv", "hdf.csv", "rhdf.csv", solvar_file},
             {}};
  const GeoUniverse universe = ReadGeographyManifest(At(dir, "geography.csv"));
  const auto truth = ReadMicrodata(At(dir, "truth.csv"));
  const auto dd = ReadMicrodata(At(dir, "data_defined.csv"));
  const Strata strata(truth, universe, ReadSolvar(At(dir, solvar_file)));

  std::vector<std::pair<std::string, std::vector<PersonRecord>>> sources;
  sources.emplace_back(ReconDataName(cfg), ReadMicrodata(At(dir, "rhdf.csv")));
  const auto hdf = ReadMicrodata(At(dir, "hdf.csv"));
  if (cfg.defense == "noise") sources.emplace_back("mdf", hdf);
  if (cfg.baselines) {
    if (cfg.mdg_frame == "tables") {
      io.inputs.push_back("tables.csv");
      io.inputs.push_back("tables.csv.schema");
      const TableBundle bundle = ReadBundle(At(dir, "tables.csv"));
      sources.emplace_back("mdg", MdgBaselineFromTables(bundle, universe));
      sources.emplace_back("prg",
                           PrgBaselineFromTables(bundle, universe, StageSeed(cfg.seed, "prg")));
    } else {
      sources.emplace_back("mdg", MdgBaseline(hdf, universe));
      sources.emplace_back("prg", PrgBaseline(hdf, universe, StageSeed(cfg.seed, "prg")));
    }
  }
  std::vector<ReidRow> report;
  for (const auto& attacker : cfg.attackers) {
    const std::string afile = "attacker_" + attacker + ".csv";
    io.inputs.push_back(afile);
    const AttackerFile att = ReadAttackerFile(At(dir, afile));
    for (const auto& [name, records] : sources) {
      const auto put = PutativeMatch(records, att);
      const auto conf = ConfirmMatch(put, dd);
      const std::string pfile = PutativeFileName(name, attacker);
      WritePutative(put, conf, At(dir, pfile));
      io.outputs.push_back(pfile);
      auto rows = ReidMetrics(name, attacker, att, put, conf, strata);
      report.insert(report.end(), rows.begin(), rows.end());
    }
  }
  WriteReidReport(report, At(dir, "reid_counts.csv"));
  io.outputs.push_back("reid_counts.csv");
  return io;
}

StageIo Report(const fs::path& dir) {
  StageIo io{{"reid_counts.csv"}, {"table5.csv", "table6.csv", "figures.csv"}};
  const auto rows = ReadReidReport(At(dir, "reid_counts.csv"));
  WriteReidReport(SelectOverall(rows), At(dir, "table5.csv"));
  WriteReidReport(SelectNonmodalZeroUnique(rows), At(dir, "table6.csv"));
  WriteFigureData(rows, At(dir, "figures.csv"));
  return io;
}

Json LoadManifest(const fs::path& dir) {
  const fs::path path = At(dir, kManifest);
  if (!fs::exists(path)) return Json{{"format", "reconlab-manifest-v1"}, {"stages", Json::object()}};
  try {
    return Json::parse(ReadFile(path));
  } catch (const Json::exception& e) {
    throw IoError("malformed manifest: " + std::string(e.what()));
  }
}

}  // namespace

void ExperimentConfig::Validate() const {
  static const std::set<std::string> kDefenses = {"none", "swap", "noise", "suppress"};
  if (!kDefenses.count(defense))
    throw ConfigError("defense.name: unknown defense '" + defense +
                      "' (expected none, swap, noise or suppress)");
  if (geography.empty()) {
    if (shape.tracts < 1) throw ConfigError("universe.tracts: must be >= 1");
    if (shape.blocks_per_tract < 1 || shape.blocks_per_tract > 9999)
      throw ConfigError("universe.blocks_per_tract: must lie in [1, 9999]");
    if (shape.block_sizes.empty() || shape.block_sizes.size() != shape.size_weights.size())
      throw ConfigError("universe.size_weights: must have one weight per block size");
    for (int64_t s : shape.block_sizes)
      if (s < 0) throw ConfigError("universe.block_sizes: sizes must be >= 0");
  }
  auto rate = [](const char* key, double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(key) + ": must lie in [0, 1]");
  };
  rate("population.male_share", male_share);
  rate("population.missing_pid_rate", missing_pid_rate);
  rate("population.duplicate_pid_rate", duplicate_pid_rate);
  rate("defense.swap.rate", swap.rate);
  Wrap("defense.noise", [&] { noise.Validate(); });
  Wrap("defense.suppress.threshold", [&] { suppress.Validate(); });
  if (limits.max_nodes < 1) throw ConfigError("solver.max_nodes: must be >= 1");
  if (attackers.empty()) throw ConfigError("attack.attackers: at least one attacker is required");
  for (const auto& a : attackers) DegradationFor(a);
  if (mdg_frame != "truth" && mdg_frame != "tables")
    throw ConfigError("attack.mdg_frame: expected truth or tables, got '" + mdg_frame + "'");
}

ExperimentConfig ParseConfig(std::string_view text) {
  ExperimentConfig cfg;
  std::map<std::string, const KeyHandler*> by_key;
  for (const auto& h : Handlers()) by_key[h.key] = &h;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string t = Trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = Trim(std::string_view(t).substr(0, eq));
    const std::string value = Trim(std::string_view(t).substr(eq + 1));
    auto it = by_key.find(key);
    if (it == by_key.end()) throw ConfigError(key + ": unknown configuration key");
    it->second->set(cfg, value);
  }
  cfg.Validate();
  return cfg;
}

ExperimentConfig LoadConfig(const fs::path& path) { return ParseConfig(ReadFile(path)); }

std::string ConfigToText(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& h : Handlers()) out += h.key + " = " + h.get(cfg) + "\n";
  return out;
}

uint64_t StageSeed(uint64_t master, std::string_view stage) { return DeriveSeed(master, stage); }

std::string Sha256File(const fs::path& path) {
  const std::string data = ReadFile(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256 failed: " + path.string());
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 15];
  }
  return hex;
}

std::map<std::string, std::vector<std::string>> StageOutputs(const ExperimentConfig& cfg) {
  std::map<std::string, std::vector<std::string>> out;
  out["generate"] = {"geography.csv", "truth.csv", "data_defined.csv"};
  for (const auto& a : cfg.attackers) out["generate"].push_back("attacker_" + a + ".csv");
  out["defend"] = {"hdf.csv"};
  if (cfg.defense == "swap") out["defend"].push_back("swap_report.csv");
  out["tabulate"] = {"tables.csv", "tables.csv.schema"};
  if (cfg.defense == "suppress") out["tabulate"].push_back("suppression_report.csv");
  if (Defended(cfg)) {
    out["tabulate"].push_back("truth_tables.csv");
    out["tabulate"].push_back("truth_tables.csv.schema");
  }
  out["reconstruct"] = {"rhdf.csv", "solver_report.csv"};
  out["solvar"] = {"solvar.csv", "cumsolvar.csv"};
  if (Defended(cfg)) out["solvar"].push_back("solvar_truth.csv");
  std::vector<std::string> data = {ReconDataName(cfg)};
  if (cfg.defense == "noise") data.push_back("mdf");
  if (cfg.baselines) data.insert(data.end(), {"mdg", "prg"});
  for (const auto& a : cfg.attackers)
    for (const auto& d : data) out["attack"].push_back(PutativeFileName(d, a));
  out["attack"].push_back("reid_counts.csv");
  out["report"] = {"table5.csv", "table6.csv", "figures.csv"};
  return out;
}

void RunStage(const ExperimentConfig& cfg, const std::string& stage, const fs::path& dir,
              int jobs) {
  StageIo io;
  try {
    cfg.Validate();
    fs::create_directories(dir);
    WriteFile(At(dir, kConfigFile), ConfigToText(cfg));
    if (stage == "generate") {
      io = Generate(cfg, dir);
    } else if (stage == "defend") {
      io = Defend(cfg, dir, jobs);
    } else if (stage == "tabulate") {
      io = TabulateStage(cfg, dir);
    } else if (stage == "reconstruct") {
      io = Reconstruct(cfg, dir, jobs);
    } else if (stage == "solvar") {
      io = SolvarStage(cfg, dir, jobs);
    } else if (stage == "attack") {
      io = Attack(cfg, dir);
    } else if (stage == "report") {
      io = Report(dir);
    } else {
      throw ConfigError("unknown stage '" + stage + "'");
    }
    io.inputs.insert(io.inputs.begin(), std::string(kConfigFile));
    Json manifest = LoadManifest(dir);
    Json entry{{"inputs", Json::object()}, {"outputs", Json::object()}};
    for (const auto& f : io.inputs) entry["inputs"][f] = Sha256File(At(dir, f));
    for (const auto& f : io.outputs) entry["outputs"][f] = Sha256File(At(dir, f));
    manifest["stages"][stage] = entry;
    WriteFile(At(dir, kManifest), manifest.dump(2) + "\n");
  } catch (const StageError&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

void RunExperiment(const ExperimentConfig& cfg, const fs::path& dir, int jobs) {
  for (const auto& stage : StageNames()) RunStage(cfg, stage, dir, jobs);
}

std::vector<std::string> VerifyArtifacts(const fs::path& dir) {
  std::vector<std::string> v;
  auto exists = [&](std::string_view name) { return fs::exists(At(dir, name)); };
  if (!exists(kConfigFile)) return {"config.txt missing"};
  const ExperimentConfig cfg = LoadConfig(At(dir, kConfigFile));
  if (!exists("geography.csv")) return {"geography.csv missing"};
  const GeoUniverse universe = ReadGeographyManifest(At(dir, "geography.csv"));

  std::optional<TableBundle> tables;
  if (exists("tables.csv")) {
    tables = ReadBundle(At(dir, "tables.csv"));
    for (const auto& msg : CheckAdditivity(*tables)) v.push_back("tables.csv: " + msg);
  }

  bool all_feasible = true;
  if (tables && exists("rhdf.csv") && exists("solver_report.csv")) {
    const auto rhdf = ReadMicrodata(At(dir, "rhdf.csv"));
    const CsvTable report = ReadCsv(At(dir, "solver_report.csv"));
    const size_t gc = report.Column("geocode"), sc = report.Column("status");
    std::map<std::string, std::vector<PersonRecord>> by_geo;
    for (const auto& r : rhdf) {
      by_geo[cfg.mode == ReconMode::kBlock ? r.block.str() : r.block.tract_code()].push_back(r);
    }
    std::set<std::string> feasible;
    for (const auto& row : report.rows) {
      if (row[sc] != SolveStatusName(SolveStatus::kFeasible)) {
        all_feasible = false;
        continue;
      }
      const std::string& geo = row[gc];
      feasible.insert(geo);
      const ReconProblem p = cfg.mode == ReconMode::kBlock ? BuildProblemB(*tables, geo)
                                                           : BuildProblemBT(*tables, geo);
      if (p.status != BuildStatus::kOk) {
        v.push_back("rhdf.csv: " + geo + " reported feasible but its problem is not well posed");
        continue;
      }
      std::string error;
      const auto it = by_geo.find(geo);
      const auto counts =
          CountsFromRecords(p, it == by_geo.end() ? std::vector<PersonRecord>{} : it->second, &error);
      if (!error.empty()) {
        v.push_back("rhdf.csv: " + error);
        continue;
      }
      const std::string violation = FindViolation(p, counts);
      if (!violation.empty()) v.push_back("rhdf.csv: constraint violated: " + violation);
    }
    for (const auto& [geo, recs] : by_geo)
      if (!feasible.count(geo)) v.push_back("rhdf.csv: records for unsolved geography " + geo);
  }

  for (const auto& [stage, files] : StageOutputs(cfg)) {
    if (stage != "attack") continue;
    for (const auto& f : files) {
      if (f.rfind("putative_", 0) != 0 || !exists(f)) continue;
      const CsvTable t = ReadCsv(At(dir, f));
      const size_t ac = t.Column("attacker_index"), sc = t.Column("source_index");
      std::set<std::string> seen_a, seen_s;
      for (const auto& row : t.rows) {
        if (!seen_a.insert(row[ac]).second)
          v.push_back(f + ": attacker row " + row[ac] + " matched more than once");
        if (!seen_s.insert(row[sc]).second)
          v.push_back(f + ": source record " + row[sc] + " matched more than once");
      }
    }
  }

  if (exists("reid_counts.csv")) {
    const CsvTable t = ReadCsv(At(dir, "reid_counts.csv"));
    const size_t dc = t.Column("data"), ac = t.Column("attacker"), sc = t.Column("stratum"),
                 pc = t.Column("population"), uc = t.Column("putative"),
                 cc = t.Column("confirmed"), rc = t.Column("precision");
    std::map<std::pair<std::string, std::string>, std::map<std::string, int64_t>> putative_by;
    for (const auto& row : t.rows) {
      const int64_t pop = ParseInt(row[pc]), put = ParseInt(row[uc]), conf = ParseInt(row[cc]);
      const std::string where = row[dc] + "/" + row[ac] + "/" + row[sc];
      if (!(conf <= put && put <= pop && conf >= 0))
        v.push_back("reid_counts.csv: " + where + ": counts violate confirmed <= putative <= population");
      if (put == 0) {
        if (row[rc] != "NA") v.push_back("reid_counts.csv: " + where + ": precision must be NA");
      } else if (row[rc] == "NA" ||
                 std::abs(ParseDouble(row[rc]) - 100.0 * conf / put) > 1e-4) {
        v.push_back("reid_counts.csv: " + where + ": precision != 100*confirmed/putative");
      }
      putative_by[{row[ac], row[sc]}][row[dc]] = put;
    }
    // Sources sharing the published {block, sex, agebin} frame must agree on
    // putative counts.
    if (cfg.defense != "suppress" && all_feasible && cfg.mdg_frame == "truth") {
      for (const auto& [key, by_data] : putative_by) {
        std::set<int64_t> distinct;
        for (const auto& [data, put] : by_data) distinct.insert(put);
        if (distinct.size() > 1)
          v.push_back("reid_counts.csv: putative counts differ across data sources for " +
                      key.first + "/" + key.second);
      }
    }
  }

  for (const char* f : {"solvar.csv", "solvar_truth.csv"}) {
    if (!exists(f)) continue;
    for (const auto& r : ReadSolvar(At(dir, f))) {
      const double expect = 100.0 * static_cast<double>(r.dstar) / static_cast<double>(r.population);
      if (r.dstar < 0 || r.dstar > r.population || std::abs(r.solvar - expect) > 1e-3 ||
          std::abs(r.max_solvar - std::min(100.0, 2.0 * r.solvar)) > 2e-3)
        v.push_back(std::string(f) + ": " + r.block + ": inconsistent solution variability");
    }
  }

  if (!exists(kManifest)) {
    v.push_back("manifest.json missing");
  } else {
    const Json manifest = LoadManifest(dir);
    for (const auto& [stage, entry] : manifest.at("stages").items()) {
      for (const char* side : {"inputs", "outputs"}) {
        for (const auto& [file, hash] : entry.at(side).items()) {
          if (!exists(file)) {
            v.push_back("manifest.json: " + file + " (" + stage + ") missing");
          } else if (Sha256File(At(dir, file)) != hash.get<std::string>()) {
            v.push_back("manifest.json: hash mismatch for " + file + " (" + stage + " " + side + ")");
          }
        }
      }
    }
  }
  return v;
}

TableBundle TabulateMicrodataFile(const fs::path& input) {
  const auto records = ReadMicrodata(input);
  std::map<Geocode, int64_t> counts;
  for (const auto& r : records) ++counts[r.block];
  std::vector<BlockEntry> blocks;
  for (const auto& [g, n] : counts) blocks.push_back({g, n});
  return Tabulate(records, GeoUniverse(std::move(blocks)), AllTableNames());
}

}  // namespace reconlab
