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

#include "reconlab/reconstruction.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "reconlab/csv.h"
#include "reconlab/parallel.h"
#include "reconlab/rng.h"

namespace reconlab {
namespace {

// Published cell usable as a constraint.
struct Source {
  const TableDef* def = nullptr;
  const std::vector<int64_t>* counts = nullptr;
};

std::vector<Source> UsableTables(const TableBundle& bundle, const std::string& geo,
                                 const BuildOptions& options) {
  const Schema& s = bundle.schema();
  std::vector<Source> out(s.tables().size());
  for (size_t t = 0; t < s.tables().size(); ++t) {
    if (options.exclude_tables.count(s.table(t).name)) continue;
    const auto* counts = bundle.Find(geo, t);
    if (counts != nullptr) out[t] = {&s.table(t), counts};
  }
  return out;
}

bool Usable(const std::vector<Source>& src, const CellRef& ref) {
  const Source& s = src[ref.table];
  return s.counts != nullptr && (*s.counts)[ref.cell] != kSuppressed;
}

int64_t Value(const std::vector<Source>& src, const CellRef& ref) {
  return (*src[ref.table].counts)[ref.cell];
}

// Index for non-default schemas, cached per call site.
struct IndexHolder {
  std::unique_ptr<CellIndex> owned;
  const CellIndex* index = nullptr;
};

IndexHolder IndexFor(const Schema& schema, GeoLevel level, AgeSchemaName grid) {
  IndexHolder h;
  if (&schema == &Schema::Default()) {
    if (grid == AgeSchemaName::kBin38) {
      h.index = &Bin38BlockIndex();
    } else {
      h.index = level == GeoLevel::kBlock ? &Tract103BlockIndex() : &Tract103TractIndex();
    }
    return h;
  }
  h.owned = std::make_unique<CellIndex>(schema, level, AgeSchema::Get(grid).bins());
  h.index = h.owned.get();
  return h;
}

std::string RowLabel(const std::string& geo, const TableDef& def, int cell) {
  return geo + " " + def.name + "[" + std::to_string(cell) + "]";
}

// Collects rows keyed by (geography slot, table, cell), then drops empty
// zero rows and merges duplicates.
class RowCollector {
 public:
  void Add(int slot, const CellRef& ref, int var) { rows_[Key(slot, ref)].push_back(var); }
  void Touch(int slot, const CellRef& ref, int64_t rhs, std::string label) {
    auto& m = meta_[Key(slot, ref)];
    m.rhs = rhs;
    if (m.label.empty()) m.label = std::move(label);
  }

  void Finish(ReconProblem& p) {
    std::map<std::vector<int>, size_t> seen;
    for (auto& [key, meta] : meta_) {
      auto it = rows_.find(key);
      std::vector<int> vars = it == rows_.end() ? std::vector<int>{} : std::move(it->second);
      if (vars.empty()) {
        if (meta.rhs != 0) {
          p.status = BuildStatus::kInfeasible;
          p.note = meta.label + "=" + std::to_string(meta.rhs) + " has no admissible cells";
        }
        continue;
      }
      std::sort(vars.begin(), vars.end());
      auto [pos, inserted] = seen.emplace(vars, p.rows.size());
      if (!inserted) {
        if (p.rows[pos->second].rhs != meta.rhs) {
          p.status = BuildStatus::kInfeasible;
          p.note = meta.label + " contradicts " + p.rows[pos->second].label;
        }
        continue;
      }
      p.rows.push_back({std::move(vars), meta.rhs, meta.label});
    }
  }

 private:
  struct Meta {
    int64_t rhs = 0;
    std::string label;
  };
  static uint64_t Key(int slot, const CellRef& ref) {
    return (static_cast<uint64_t>(slot) << 32) | (static_cast<uint64_t>(ref.table) << 16) | ref.cell;
  }
  std::map<uint64_t, Meta> meta_;
  std::unordered_map<uint64_t, std::vector<int>> rows_;
};

void RegisterCells(const std::vector<Source>& src, int slot, const std::string& geo,
                   RowCollector& rows) {
  for (size_t t = 0; t < src.size(); ++t) {
    if (src[t].counts == nullptr) continue;
    for (size_t c = 0; c < src[t].counts->size(); ++c) {
      const int64_t v = (*src[t].counts)[c];
      if (v == kSuppressed) continue;
      rows.Touch(slot, {static_cast<uint16_t>(t), static_cast<uint16_t>(c)}, v,
                 RowLabel(geo, *src[t].def, static_cast<int>(c)));
    }
  }
}

bool P1Usable(const std::vector<Source>& src, const Schema& schema) {
  const auto p1 = schema.Find("P1");
  return p1 && src[*p1].counts != nullptr && (*src[*p1].counts)[0] != kSuppressed;
}

std::string AgeToken(const AgeRange& r) { return std::to_string(r.lo) + "_" + std::to_string(r.hi); }

std::string RaceToken(int race_eth) {
  std::string s = RaceFlags(RaceOfCell(race_eth));
  std::replace(s.begin(), s.end(), '.', '_');
  return s;
}

}  // namespace

std::string_view ReconModeName(ReconMode m) { return m == ReconMode::kBlock ? "b" : "bt"; }

ReconMode ParseReconMode(std::string_view s) {
  if (s == "b") return ReconMode::kBlock;
  if (s == "bt") return ReconMode::kBlockTract;
  throw std::invalid_argument("unknown reconstruction mode '" + std::string(s) + "'");
}

std::string_view SolveStatusName(SolveStatus s) {
  switch (s) {
    case SolveStatus::kFeasible:
      return "feasible";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kBudgetExceeded:
      return "budget-exceeded";
    case SolveStatus::kUnreconstructable:
      return "unreconstructable";
  }
  return "?";
}

const AgeRange& ReconProblem::AgeOf(int v) const {
  return AgeSchema::Get(age_schema).bins()[vars[v].age_idx];
}

std::string ReconProblem::VarName(int v) const {
  const VarCell& c = vars[v];
  std::string name = "x_";
  if (mode == ReconMode::kBlockTract) name += "b" + blocks[c.block_slot].str() + "_";
  name += SexCode(c.sex);
  name += (mode == ReconMode::kBlock ? "_b" : "_a") + AgeToken(AgeOf(v));
  name += "_r" + RaceToken(c.race_eth);
  name += "_e";
  name += EthnicityCode(EthOfCell(c.race_eth));
  return name;
}

std::vector<EqRow> ReconProblem::EqRows() const {
  std::vector<EqRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({r.vars, r.rhs});
  return out;
}

ReconProblem BuildProblemB(const TableBundle& bundle, const std::string& block,
                           const BuildOptions& options) {
  ReconProblem p;
  p.mode = ReconMode::kBlock;
  p.geo = block;
  p.blocks = {ParseGeocode(block)};
  p.age_schema = AgeSchemaName::kBin38;
  const auto src = UsableTables(bundle, block, options);
  if (!P1Usable(src, bundle.schema())) {
    p.status = BuildStatus::kUnreconstructable;
    p.note = "P1 unavailable";
    return p;
  }
  p.population = (*src[*bundle.schema().Find("P1")].counts)[0];
  const IndexHolder idx = IndexFor(bundle.schema(), GeoLevel::kBlock, AgeSchemaName::kBin38);
  RowCollector rows;
  RegisterCells(src, 0, block, rows);
  for (size_t key = 0; key < idx.index->num_keys(); ++key) {
    const auto& refs = idx.index->CellsOf(key);
    int64_t ub = INT64_MAX;
    for (const CellRef& ref : refs) {
      if (Usable(src, ref)) ub = std::min(ub, Value(src, ref));
    }
    if (ub <= 0) continue;
    const int v = static_cast<int>(p.vars.size());
    p.vars.push_back({0, idx.index->SexOf(key), static_cast<uint8_t>(idx.index->AgeOf(key)),
                      static_cast<uint8_t>(idx.index->RaceEthOf(key))});
    p.ub.push_back(ub);
    for (const CellRef& ref : refs) {
      if (Usable(src, ref)) rows.Add(0, ref, v);
    }
  }
  rows.Finish(p);
  return p;
}

ReconProblem BuildProblemBT(const TableBundle& bundle, const std::string& tract,
                            const BuildOptions& options) {
  ReconProblem p;
  p.mode = ReconMode::kBlockTract;
  p.geo = tract;
  p.age_schema = AgeSchemaName::kTract103;
  std::vector<std::string> block_codes;
  for (auto it = bundle.geos().lower_bound(tract); it != bundle.geos().end(); ++it) {
    if (it->first.compare(0, tract.size(), tract) != 0) break;
    if (it->first.size() == 15) block_codes.push_back(it->first);
  }
  const auto tract_src = UsableTables(bundle, tract, options);
  const IndexHolder bidx = IndexFor(bundle.schema(), GeoLevel::kBlock, AgeSchemaName::kTract103);
  const IndexHolder tidx = IndexFor(bundle.schema(), GeoLevel::kTract, AgeSchemaName::kTract103);

  RowCollector rows;
  const int tract_slot = static_cast<int>(block_codes.size());
  RegisterCells(tract_src, tract_slot, tract, rows);
  // Tract-level admissibility is shared by every block.
  std::vector<int64_t> tract_ub(tidx.index->num_keys(), INT64_MAX);
  for (size_t key = 0; key < tract_ub.size(); ++key) {
    for (const CellRef& ref : tidx.index->CellsOf(key)) {
      if (Usable(tract_src, ref)) tract_ub[key] = std::min(tract_ub[key], Value(tract_src, ref));
    }
  }
  for (size_t slot = 0; slot < block_codes.size(); ++slot) {
    const std::string& code = block_codes[slot];
    p.blocks.push_back(ParseGeocode(code));
    const auto src = UsableTables(bundle, code, options);
    if (!P1Usable(src, bundle.schema())) {
      p.status = BuildStatus::kUnreconstructable;
      p.note = "P1 unavailable for block " + code;
      return p;
    }
    p.population += (*src[*bundle.schema().Find("P1")].counts)[0];
    RegisterCells(src, static_cast<int>(slot), code, rows);
    for (size_t key = 0; key < bidx.index->num_keys(); ++key) {
      int64_t ub = tract_ub[key];
      const auto& refs = bidx.index->CellsOf(key);
      for (const CellRef& ref : refs) {
        if (Usable(src, ref)) ub = std::min(ub, Value(src, ref));
      }
      if (ub <= 0) continue;
      const int v = static_cast<int>(p.vars.size());
      p.vars.push_back({static_cast<uint32_t>(slot), bidx.index->SexOf(key),
                        static_cast<uint8_t>(bidx.index->AgeOf(key)),
                        static_cast<uint8_t>(bidx.index->RaceEthOf(key))});
      p.ub.push_back(ub);
      for (const CellRef& ref : refs) {
        if (Usable(src, ref)) rows.Add(static_cast<int>(slot), ref, v);
      }
      for (const CellRef& ref : tidx.index->CellsOf(key)) {
        if (Usable(tract_src, ref)) rows.Add(tract_slot, ref, v);
      }
    }
  }
  rows.Finish(p);
  return p;
}

ReconSolution SolveFeasible(const ReconProblem& p, const SearchLimits& limits, uint64_t seed) {
  ReconSolution sol;
  const auto start = std::chrono::steady_clock::now();
  if (p.status == BuildStatus::kUnreconstructable) {
    sol.status = SolveStatus::kUnreconstructable;
    return sol;
  }
  if (p.status == BuildStatus::kInfeasible) {
    sol.status = SolveStatus::kInfeasible;
    return sol;
  }
  const std::vector<EqRow> rows = p.EqRows();
  bool found = false;
  auto attempt = [&](const SearchLimits& lim, uint64_t s) {
    SearchStats st;
    const SearchOutcome o = SearchSolutions(
        p.ub, rows, lim, s,
        [&](const std::vector<int64_t>& x) {
          sol.counts = x;
          found = true;
          return false;
        },
        &st);
    sol.stats.nodes += st.nodes;
    sol.stats.propagations += st.propagations;
    sol.stats.lp_calls += st.lp_calls;
    sol.stats.lp_prunes += st.lp_prunes;
    return o;
  };
  SearchOutcome outcome = SearchOutcome::kBudgetExceeded;
  if (limits.restart_nodes <= 0 || limits.lexicographic) {
    outcome = attempt(limits, seed);
  } else {
    // Restarts with growing budgets; an exhausted search proves infeasibility
    // whatever its seed.
    int64_t spent = 0;
    int64_t budget = limits.restart_nodes;
    for (uint64_t k = 0; !found && spent < limits.max_nodes; ++k, budget *= 2) {
      SearchLimits lim = limits;
      lim.max_nodes = std::min(budget, limits.max_nodes - spent);
      const int64_t before = sol.stats.nodes;
      outcome = attempt(lim, k == 0 ? seed : DeriveSeed(seed, k));
      spent += sol.stats.nodes - before;
      if (outcome != SearchOutcome::kBudgetExceeded) break;
      const std::chrono::duration<double> el = std::chrono::steady_clock::now() - start;
      if (limits.max_seconds > 0 && el.count() > limits.max_seconds) break;
    }
  }
  if (found) {
    sol.status = SolveStatus::kFeasible;
  } else {
    sol.status = outcome == SearchOutcome::kBudgetExceeded ? SolveStatus::kBudgetExceeded
                                                           : SolveStatus::kInfeasible;
  }
  const std::chrono::duration<double, std::milli> el = std::chrono::steady_clock::now() - start;
  sol.millis = el.count();
  return sol;
}

std::vector<PersonRecord> ExpandSolution(const ReconProblem& p, const std::vector<int64_t>& counts) {
  std::vector<PersonRecord> out;
  for (size_t v = 0; v < p.vars.size(); ++v) {
    const VarCell& c = p.vars[v];
    const AgeRange& ages = p.AgeOf(static_cast<int>(v));
    PersonRecord r;
    r.block = p.blocks[c.block_slot];
    r.sex = c.sex;
    r.race = RaceOfCell(c.race_eth);
    r.eth = EthOfCell(c.race_eth);
    if (p.mode == ReconMode::kBlock) {
      r.age = -1;
      r.agebin = static_cast<uint8_t>(AgeBin38(ages.lo));
    } else {
      r.age = static_cast<int16_t>(ages.lo);
      r.agebin = static_cast<uint8_t>(AgeBin38(ages.lo));
    }
    for (int64_t k = 0; k < counts[v]; ++k) out.push_back(r);
  }
  return out;
}

std::vector<int64_t> CountsFromRecords(const ReconProblem& p,
                                       const std::vector<PersonRecord>& records,
                                       std::string* error) {
  std::map<std::tuple<uint32_t, Sex, int, int>, int> index;
  for (size_t v = 0; v < p.vars.size(); ++v) {
    const VarCell& c = p.vars[v];
    const int age_key = p.mode == ReconMode::kBlock ? AgeBin38(p.AgeOf(static_cast<int>(v)).lo)
                                                    : c.age_idx;
    index[{c.block_slot, c.sex, age_key, c.race_eth}] = static_cast<int>(v);
  }
  const AgeSchema& grid = AgeSchema::Get(p.age_schema);
  std::vector<int64_t> counts(p.vars.size(), 0);
  for (const PersonRecord& r : records) {
    const auto slot = std::find(p.blocks.begin(), p.blocks.end(), r.block);
    int age_key = r.agebin;
    if (p.mode == ReconMode::kBlockTract) age_key = r.has_age() ? grid.BinOf(r.age) : -1;
    auto it = slot == p.blocks.end()
                  ? index.end()
                  : index.find({static_cast<uint32_t>(slot - p.blocks.begin()), r.sex, age_key,
                                r.race_eth()});
    if (it == index.end()) {
      if (error != nullptr) {
        *error = "record " + r.block.str() + " " + SexCode(r.sex) + " age " +
                 std::to_string(r.age) + " " + RaceEthLabel(r.race_eth()) +
                 " matches no variable of " + p.geo;
      }
      return {};
    }
    ++counts[it->second];
  }
  return counts;
}

std::string FindViolation(const ReconProblem& p, const std::vector<int64_t>& counts) {
  if (counts.size() != p.vars.size()) {
    return "dimension mismatch: " + std::to_string(counts.size()) + " values for " +
           std::to_string(p.vars.size()) + " variables";
  }
  for (size_t v = 0; v < counts.size(); ++v) {
    if (counts[v] < 0 || counts[v] > p.ub[v]) {
      return p.VarName(static_cast<int>(v)) + "=" + std::to_string(counts[v]) + " outside [0," +
             std::to_string(p.ub[v]) + "]";
    }
  }
  for (const auto& row : p.rows) {
    int64_t sum = 0;
    for (int v : row.vars) sum += counts[v];
    if (sum != row.rhs) {
      return row.label + ": expected " + std::to_string(row.rhs) + ", got " + std::to_string(sum);
    }
  }
  return {};
}

bool VerifySolution(const ReconProblem& p, const std::vector<int64_t>& counts) {
  return FindViolation(p, counts).empty();
}

void ExportLp(const ReconProblem& p, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "\\ reconstruction problem for " << p.geo << "\n";
  out << "Minimize\n obj:";
  if (!p.vars.empty()) out << " 0 " << p.VarName(0);
  out << "\nSubject To\n";
  for (size_t r = 0; r < p.rows.size(); ++r) {
    out << " c" << r << ":";
    const auto& vars = p.rows[r].vars;
    for (size_t k = 0; k < vars.size(); ++k) {
      if (k > 0 && k % 6 == 0) out << "\n  ";
      out << (k == 0 ? " " : " + ") << p.VarName(vars[k]);
    }
    out << " = " << p.rows[r].rhs << "\n";
  }
  out << "Bounds\n";
  for (size_t v = 0; v < p.vars.size(); ++v) {
    out << " 0 <= " << p.VarName(static_cast<int>(v)) << " <= " << p.ub[v] << "\n";
  }
  if (!p.vars.empty()) {
    out << "General\n";
    for (size_t v = 0; v < p.vars.size(); ++v) out << " " << p.VarName(static_cast<int>(v)) << "\n";
  }
  out << "End\n";
  WriteFile(path, out.str());
}

std::vector<int64_t> ReadSolution(const ReconProblem& p, const std::filesystem::path& path) {
  std::unordered_map<std::string, int> by_name;
  for (size_t v = 0; v < p.vars.size(); ++v) by_name.emplace(p.VarName(static_cast<int>(v)), v);
  std::vector<int64_t> counts(p.vars.size(), 0);
  std::istringstream in(ReadFile(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string name;
    double value = 0;
    if (!(fields >> name)) continue;
    if (!(fields >> value)) throw IoError("bad solution line: " + line);
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      if (name.rfind("x_", 0) != 0) continue;  // objective or auxiliary entries
      throw IoError("unknown variable in solution: " + name);
    }
    const double rounded = std::round(value);
    if (std::abs(value - rounded) > 1e-6) throw IoError("non-integral value for " + name);
    counts[it->second] = static_cast<int64_t>(rounded);
  }
  return counts;
}

namespace {

GeoReport ReportOf(const std::string& geo, const ReconSolution& sol, const std::string& note) {
  return {geo, sol.status, sol.stats.nodes, sol.millis, note};
}

// Mode bt with block-level aggregates pinned to independent mode b
// solutions. Any solution of the pinned problem solves the plain one.
ReconProblem PinToBlockSolutions(const ReconProblem& bt,
                                 const std::vector<std::vector<int64_t>>& block_hist) {
  ReconProblem pinned = bt;
  std::map<std::pair<uint32_t, int>, std::vector<int>> groups;
  for (size_t v = 0; v < bt.vars.size(); ++v) {
    const VarCell& c = bt.vars[v];
    const int bin = AgeBin38(bt.AgeOf(static_cast<int>(v)).lo);
    const int cell = (static_cast<int>(c.sex) * 38 + bin) * kNumRaceEth + c.race_eth;
    groups[{c.block_slot, cell}].push_back(static_cast<int>(v));
  }
  for (auto& [key, vars] : groups) {
    pinned.rows.push_back({vars, block_hist[key.first][key.second], "pin"});
  }
  return pinned;
}

}  // namespace

Reconstruction AssembleRhdf(const TableBundle& bundle, const GeoUniverse& universe, ReconMode mode,
                            const SearchLimits& limits, uint64_t seed, int jobs) {
  Reconstruction out;
  if (mode == ReconMode::kBlock) {
    const size_t n = universe.size();
    std::vector<std::vector<PersonRecord>> recs(n);
    std::vector<GeoReport> reps(n);
    ParallelFor(n, jobs, [&](size_t b) {
      const std::string geo = universe.block(b).str();
      const ReconProblem p = BuildProblemB(bundle, geo);
      const ReconSolution sol = SolveFeasible(p, limits, DeriveSeed(seed, b));
      reps[b] = ReportOf(geo, sol, p.note);
      if (sol.status == SolveStatus::kFeasible) recs[b] = ExpandSolution(p, sol.counts);
    });
    for (size_t b = 0; b < n; ++b) {
      out.records.insert(out.records.end(), recs[b].begin(), recs[b].end());
      out.report.push_back(std::move(reps[b]));
    }
    return out;
  }

  const auto& tracts = universe.tracts();
  std::vector<std::vector<PersonRecord>> recs(tracts.size());
  std::vector<GeoReport> reps(tracts.size());
  ParallelFor(tracts.size(), jobs, [&](size_t t) {
    const std::string& tract = tracts[t];
    const ReconProblem p = BuildProblemBT(bundle, tract);
    const uint64_t tseed = DeriveSeed(seed, t);
    ReconSolution sol;
    if (p.status == BuildStatus::kOk) {
      // First try with block histograms pinned to mode b solutions.
      std::vector<std::vector<int64_t>> hist(p.blocks.size(),
                                             std::vector<int64_t>(2 * 38 * kNumRaceEth, 0));
      bool all_blocks = true;
      for (size_t s = 0; s < p.blocks.size() && all_blocks; ++s) {
        const ReconProblem pb = BuildProblemB(bundle, p.blocks[s].str());
        const ReconSolution sb = SolveFeasible(pb, limits, DeriveSeed(tseed, s));
        if (sb.status != SolveStatus::kFeasible) {
          all_blocks = false;
          break;
        }
        for (size_t v = 0; v < pb.vars.size(); ++v) {
          const VarCell& c = pb.vars[v];
          hist[s][(static_cast<int>(c.sex) * 38 + c.age_idx) * kNumRaceEth + c.race_eth] +=
              sb.counts[v];
        }
      }
      if (all_blocks) {
        SearchLimits pinned_limits = limits;
        pinned_limits.max_nodes = std::max<int64_t>(1, limits.max_nodes / 20);
        sol = SolveFeasible(PinToBlockSolutions(p, hist), pinned_limits, tseed);
      }
      if (sol.status != SolveStatus::kFeasible) sol = SolveFeasible(p, limits, tseed);
    } else {
      sol = SolveFeasible(p, limits, tseed);
    }
    reps[t] = ReportOf(tract, sol, p.note);
    if (sol.status == SolveStatus::kFeasible) recs[t] = ExpandSolution(p, sol.counts);
  });
  for (size_t t = 0; t < tracts.size(); ++t) {
    out.records.insert(out.records.end(), recs[t].begin(), recs[t].end());
    out.report.push_back(std::move(reps[t]));
  }
  return out;
}

void WriteSolverReport(const std::vector<GeoReport>& report, const std::filesystem::path& path,
                       bool timings) {
  CsvWriter w(path);
  w.Row({"geocode", "status", "nodes", "millis"});
  for (const auto& r : report) {
    std::string millis;
    if (timings) {
      std::ostringstream s;
      s.precision(3);
      s << std::fixed << r.millis;
      millis = s.str();
    }
    w.Row({r.geocode, std::string(SolveStatusName(r.status)), std::to_string(r.nodes), millis});
  }
}

}  // namespace reconlab
