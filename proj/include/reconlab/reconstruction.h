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

// Integer programs that invert published tables into record-level data.
//
// Mode b solves one problem per block over (sex, BIN38 age bin, race,
// ethnicity) cells using block tables. Mode bt solves one problem per tract
// over (block, sex, TRACT103 age, race, ethnicity) cells using block and
// tract tables together.

#ifndef RECONLAB_RECONSTRUCTION_H_
#define RECONLAB_RECONSTRUCTION_H_

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "reconlab/population.h"
#include "reconlab/search.h"
#include "reconlab/tabulation.h"

namespace reconlab {

enum class ReconMode { kBlock, kBlockTract };
std::string_view ReconModeName(ReconMode m);
ReconMode ParseReconMode(std::string_view s);

struct VarCell {
  uint32_t block_slot = 0;
  Sex sex = Sex::kMale;
  uint8_t age_idx = 0;  // index into the problem's age grid
  uint8_t race_eth = 0;
  bool operator==(const VarCell&) const = default;
};

struct ReconRow {
  std::vector<int> vars;
  int64_t rhs = 0;
  std::string label;  // e.g. "010730051031001 P12[3]"
};

enum class BuildStatus { kOk, kInfeasible, kUnreconstructable };

struct ReconProblem {
  ReconMode mode = ReconMode::kBlock;
  std::string geo;
  std::vector<Geocode> blocks;
  AgeSchemaName age_schema = AgeSchemaName::kBin38;
  std::vector<VarCell> vars;
  std::vector<int64_t> ub;
  std::vector<ReconRow> rows;
  BuildStatus status = BuildStatus::kOk;
  std::string note;
  int64_t population = 0;

  const AgeRange& AgeOf(int v) const;
  // LP-safe variable name, e.g. "x_M_b25_29_rW_____eN".
  std::string VarName(int v) const;
  std::vector<EqRow> EqRows() const;
};

struct BuildOptions {
  // Tables left out of the constraint set.
  std::set<std::string> exclude_tables;
};

ReconProblem BuildProblemB(const TableBundle& bundle, const std::string& block,
                           const BuildOptions& options = {});
ReconProblem BuildProblemBT(const TableBundle& bundle, const std::string& tract,
                            const BuildOptions& options = {});

enum class SolveStatus { kFeasible, kInfeasible, kBudgetExceeded, kUnreconstructable };
std::string_view SolveStatusName(SolveStatus s);

struct ReconSolution {
  SolveStatus status = SolveStatus::kInfeasible;
  std::vector<int64_t> counts;  // per variable; empty unless feasible
  SearchStats stats;
  double millis = 0.0;
};

ReconSolution SolveFeasible(const ReconProblem& p, const SearchLimits& limits, uint64_t seed);

// Records in variable order, pid and hid unset. Mode b records carry only
// the age bin; mode bt records carry single-year ages (the lower edge for
// the three open TRACT103 bins above 99).
std::vector<PersonRecord> ExpandSolution(const ReconProblem& p, const std::vector<int64_t>& counts);

// Inverse of ExpandSolution: per-variable counts of `records`, which must
// all lie in the problem's blocks. Sets `error` and returns an empty vector
// when a record matches no variable.
std::vector<int64_t> CountsFromRecords(const ReconProblem& p,
                                       const std::vector<PersonRecord>& records,
                                       std::string* error);

// Empty string when counts satisfy bounds, integrality (by type) and every
// row; otherwise a description of the first violation.
std::string FindViolation(const ReconProblem& p, const std::vector<int64_t>& counts);
bool VerifySolution(const ReconProblem& p, const std::vector<int64_t>& counts);

// CPLEX LP text format. Throws IoError.
void ExportLp(const ReconProblem& p, const std::filesystem::path& path);
// Reads a solution file with `name value` lines (comments start with '#').
// Variables absent from the file are zero. Throws IoError on unknown names
// or non-integral values.
std::vector<int64_t> ReadSolution(const ReconProblem& p, const std::filesystem::path& path);

struct GeoReport {
  std::string geocode;
  SolveStatus status = SolveStatus::kFeasible;
  int64_t nodes = 0;
  double millis = 0.0;
  std::string note;
};

struct Reconstruction {
  std::vector<PersonRecord> records;
  std::vector<GeoReport> report;
};

// Solves every block (mode b) or tract (mode bt) of the universe. Failures
// are reported, not thrown. Output order is by geocode then cell key and
// does not depend on `jobs`.
Reconstruction AssembleRhdf(const TableBundle& bundle, const GeoUniverse& universe, ReconMode mode,
                            const SearchLimits& limits, uint64_t seed, int jobs = 1);

// Report CSV `geocode,status,nodes,millis`. With `timings` false the millis
// column is left empty so the file is reproducible.
void WriteSolverReport(const std::vector<GeoReport>& report, const std::filesystem::path& path,
                       bool timings);

}  // namespace reconlab

#endif  // RECONLAB_RECONSTRUCTION_H_
