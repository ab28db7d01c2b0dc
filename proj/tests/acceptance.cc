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

// Acceptance harness: one PASS/FAIL line per criterion. Exits non-zero
// when the failing criteria differ from those named with --expect-fail.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "reconlab/defenses.h"
#include "reconlab/linkage.h"
#include "reconlab/pipeline.h"
#include "reconlab/reconstruction.h"
#include "reconlab/rng.h"
#include "reconlab/solvar.h"

namespace reconlab {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

GeoUniverse UniverseOf(const std::vector<PersonRecord>& pop) {
  std::map<Geocode, int64_t> sizes;
  for (const auto& r : pop) ++sizes[r.block];
  std::vector<BlockEntry> blocks;
  for (const auto& [g, n] : sizes) blocks.push_back({g, n});
  return GeoUniverse(blocks);
}

using BinKey = std::tuple<Geocode, int, int, int>;  // block, sex, agebin, race-eth

std::vector<BinKey> BinKeys(const std::vector<PersonRecord>& recs) {
  std::vector<BinKey> out;
  out.reserve(recs.size());
  for (const auto& r : recs) out.emplace_back(r.block, int(r.sex), r.agebin, r.race_eth());
  std::sort(out.begin(), out.end());
  return out;
}

PopulationSpec Spec(const GeoUniverse& u, uint64_t seed) {
  PopulationSpec spec;
  spec.universe = u;
  spec.mixture = DefaultMixture();
  spec.age_weights = DefaultAgeWeights();
  spec.seed = seed;
  return spec;
}

// --- 1 ---------------------------------------------------------------------

Outcome Jefferson() {
  const auto pop = ReadMicrodata(std::string(RECONLAB_FIXTURES) + "/jefferson_block_1001.csv");
  const auto bundle = Tabulate(pop, UniverseOf(pop), AllTableNames());
  const auto p = BuildProblemB(bundle, "010730051031001");
  const auto sol = SolveFeasible(p, {}, 0);
  if (sol.status != SolveStatus::kFeasible) return {false, "solver status " + std::string(SolveStatusName(sol.status))};
  const auto rows = ExpandSolution(p, sol.counts);
  const auto sv = ComputeSolvar(p);
  const bool same = BinKeys(rows) == BinKeys(pop);
  return {same && rows.size() == 16 && sv.dstar == 0 && sv.status == SolvarStatus::kExact,
          std::to_string(rows.size()) + " rows, " + (same ? "exact match" : "mismatch") +
              ", solvar " + Fmt("%.1f", sv.solvar)};
}

// --- 2 ---------------------------------------------------------------------

Outcome Singletons() {
  UniverseShape shape;
  shape.tracts = 1000;
  shape.blocks_per_tract = 1;
  shape.block_sizes = {1};
  shape.size_weights = {1};
  const GeoUniverse u = MakeSyntheticUniverse(shape, 101);
  auto spec = Spec(u, 102);
  spec.mixture.assign(kNumRaceEth, 1.0 / kNumRaceEth);
  const auto pop = GeneratePopulation(spec);
  const auto bundle = Tabulate(pop, u, AllTableNames());
  const auto b = AssembleRhdf(bundle, u, ReconMode::kBlock, {}, 1);
  const auto bt = AssembleRhdf(bundle, u, ReconMode::kBlockTract, {}, 1);
  const auto& t103 = AgeSchema::Get(AgeSchemaName::kTract103);
  std::map<Geocode, PersonRecord> truth, rb, rbt;
  for (const auto& r : pop) truth[r.block] = r;
  for (const auto& r : b.records) rb[r.block] = r;
  for (const auto& r : bt.records) rbt[r.block] = r;
  int exact = 0, topcoded = 0;
  for (const auto& [g, t] : truth) {
    if (!rb.count(g) || !rbt.count(g) || b.records.size() != pop.size() || bt.records.size() != pop.size()) continue;
    const auto& x = rb[g];
    const auto& y = rbt[g];
    const bool bin_ok = x.sex == t.sex && x.agebin == t.agebin && x.race == t.race && x.eth == t.eth;
    // Ages above 99 are published only as five-year and open bins.
    const bool age_ok = t.age < 100 ? y.age == t.age : t103.BinOf(y.age) == t103.BinOf(t.age);
    topcoded += t.age >= 100;
    const bool tract_ok = y.sex == t.sex && y.race == t.race && y.eth == t.eth && age_ok;
    exact += bin_ok && tract_ok;
  }
  return {exact == 1000 && pop.size() == 1000,
          std::to_string(exact) + "/1000 singleton blocks exact on sex, age, race and ethnicity (" +
              std::to_string(topcoded) + " aged 100+ checked on the published age bin)"};
}

// --- 3 ---------------------------------------------------------------------

Outcome SaturatedFrame() {
  Rng rng(303);
  const std::vector<int64_t> sizes = {0, 1, 2, 4, 7, 12, 25, 60};
  int universes = 0, bad = 0;
  int64_t persons = 0;
  std::string first_bad;
  for (int i = 0; i < 200; ++i) {
    UniverseShape shape;
    shape.tracts = 1 + static_cast<int>(rng.UniformInt(2));
    shape.blocks_per_tract = 1 + static_cast<int>(rng.UniformInt(6));
    shape.block_sizes = sizes;
    shape.size_weights.clear();
    for (size_t k = 0; k < sizes.size(); ++k) shape.size_weights.push_back(0.2 + rng.Uniform01());
    shape.state = static_cast<uint16_t>(1 + rng.UniformInt(56));
    const GeoUniverse u = MakeSyntheticUniverse(shape, rng.NextU64());
    auto spec = Spec(u, rng.NextU64());
    spec.male_share = 0.2 + 0.6 * rng.Uniform01();
    const auto pop = GeneratePopulation(spec);
    const auto bundle = Tabulate(pop, u, AllTableNames());
    std::vector<FrameRow> want;
    for (const auto& r : pop) want.push_back({r.block, r.sex, r.agebin});
    std::sort(want.begin(), want.end());
    const auto frame = ExpandSexAgebinFrame(bundle);
    const auto rec = AssembleRhdf(bundle, u, ReconMode::kBlock, {}, rng.NextU64());
    std::vector<FrameRow> got;
    for (const auto& r : rec.records) got.push_back({r.block, r.sex, r.agebin});
    std::sort(got.begin(), got.end());
    ++universes;
    persons += static_cast<int64_t>(pop.size());
    if (frame != want || got != want) {
      ++bad;
      if (first_bad.empty()) first_bad = " (first failure: universe " + std::to_string(i) + ")";
    }
  }
  return {bad == 0, std::to_string(universes - bad) + "/" + std::to_string(universes) +
                        " universes exact on {block, sex, agebin}, " + std::to_string(persons) +
                        " persons" + first_bad};
}

// --- 4 ---------------------------------------------------------------------

// Exhaustive reference over multisets of (sex, BIN38 bin, race-eth) keys.
// Counts are evaluated with the schema predicates directly.
class BlockOracle {
 public:
  BlockOracle() : schema_(Schema::Default()) {
    const auto& bins = AgeSchema::Get(AgeSchemaName::kBin38).bins();
    for (size_t t : schema_.TablesAt(GeoLevel::kBlock)) {
      offset_[t] = num_cells_;
      num_cells_ += static_cast<int>(schema_.table(t).cells.size());
    }
    cover_.resize(kKeys);
    for (int key = 0; key < kKeys; ++key) {
      const Sex sex = static_cast<Sex>(key / (38 * kNumRaceEth));
      const AgeRange& ages = bins[(key / kNumRaceEth) % 38];
      const int cell = key % kNumRaceEth;
      for (const auto& [t, off] : offset_) {
        const TableDef& def = schema_.table(t);
        for (size_t c = 0; c < def.cells.size(); ++c) {
          const Tri h = def.Effective(c).Holds(sex, ages, RaceOfCell(cell), EthOfCell(cell));
          if (h == Tri::kPartial) throw std::logic_error("predicate not constant on an age bin");
          if (h == Tri::kYes) cover_[key].push_back(off + static_cast<int>(c));
        }
      }
    }
  }

  static int KeyOf(int sex, int bin, int race_eth) { return (sex * 38 + bin) * kNumRaceEth + race_eth; }

  // Every feasible multiset, each as a sorted key list.
  std::vector<std::vector<int>> Solve(const TableBundle& bundle, const std::string& block) {
    published_.assign(num_cells_, 0);
    for (const auto& [t, off] : offset_) {
      const auto* counts = bundle.Find(block, t);
      if (counts == nullptr) throw std::logic_error("missing table");
      for (size_t c = 0; c < counts->size(); ++c) published_[off + c] = (*counts)[c];
    }
    candidates_.clear();
    for (int key = 0; key < kKeys; ++key) {
      bool ok = true;
      for (int c : cover_[key]) ok &= published_[c] >= 1;
      if (ok) candidates_.push_back(key);
    }
    running_.assign(num_cells_, 0);
    current_.clear();
    solutions_.clear();
    population_ = published_[offset_.at(schema_.IndexOf("P1"))];
    Dfs(0);
    return solutions_;
  }

  size_t candidates() const { return candidates_.size(); }

 private:
  static constexpr int kKeys = 2 * 38 * kNumRaceEth;

  void Dfs(size_t from) {
    if (static_cast<int64_t>(current_.size()) == population_) {
      if (running_ == published_) solutions_.push_back(current_);
      return;
    }
    for (size_t i = from; i < candidates_.size(); ++i) {
      const int key = candidates_[i];
      bool ok = true;
      for (int c : cover_[key]) ok &= ++running_[c] <= published_[c];
      current_.push_back(key);
      if (ok) Dfs(i);
      current_.pop_back();
      for (int c : cover_[key]) --running_[c];
    }
  }

  const Schema& schema_;
  std::map<size_t, int> offset_;
  int num_cells_ = 0;
  std::vector<std::vector<int>> cover_;
  std::vector<int64_t> published_, running_;
  std::vector<int> candidates_, current_;
  std::vector<std::vector<int>> solutions_;
  int64_t population_ = 0;
};

int64_t MultisetDistance(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return static_cast<int64_t>(a.size() - common.size());
}

Outcome OracleEquivalence() {
  BlockOracle oracle;
  Rng rng(404);
  const Geocode g = ParseGeocode("010010000011000");
  const GeoUniverse u({{g, 0}});
  int blocks = 0, agree = 0, infeasible = 0, multi = 0;
  std::string first_bad;
  for (int i = 0; i < 500; ++i) {
    const int n = 1 + static_cast<int>(rng.UniformInt(6));
    std::vector<int> cells;
    const int k = 1 + static_cast<int>(rng.UniformInt(4));
    for (int j = 0; j < k; ++j) {
      cells.push_back(RaceEthCell(static_cast<RaceMask>(1 + rng.UniformInt(63)),
                                  rng.Bernoulli(0.3) ? Ethnicity::kHispanic : Ethnicity::kNotHispanic));
    }
    std::vector<int> ages;
    for (int j = 0; j < 3; ++j) ages.push_back(static_cast<int>(rng.UniformInt(kNumAges)));
    std::vector<PersonRecord> pop;
    for (int j = 0; j < n; ++j) {
      const int cell = cells[rng.UniformInt(cells.size())];
      pop.push_back(PersonRecord::Make(j + 1, j + 1, g, rng.Bernoulli(0.5) ? Sex::kFemale : Sex::kMale,
                                       ages[rng.UniformInt(ages.size())], RaceOfCell(cell), EthOfCell(cell)));
    }
    TableBundle bundle = Tabulate(pop, GeoUniverse({{g, n}}), AllTableNames());
    if (i % 5 == 4) {
      // Move one P8 count to another leaf: sometimes infeasible.
      auto& p8 = bundle.Mutable(g.str(), bundle.schema().IndexOf("P8"));
      const int from = RaceIndex(pop[0].race);
      const int to = static_cast<int>(rng.UniformInt(63));
      p8[from] -= 1;
      p8[to] += 1;
    }
    const auto solutions = oracle.Solve(bundle, g.str());
    const auto p = BuildProblemB(bundle, g.str());
    const bool built = p.status == BuildStatus::kOk;
    const auto sol = built ? SolveFeasible(p, {}, rng.NextU64()) : ReconSolution{};
    const bool feasible = built && sol.status == SolveStatus::kFeasible;
    bool ok = feasible == !solutions.empty();
    if (ok && feasible) {
      std::vector<int> got;
      for (const auto& r : ExpandSolution(p, sol.counts)) got.push_back(BlockOracle::KeyOf(int(r.sex), r.agebin, r.race_eth()));
      std::sort(got.begin(), got.end());
      ok = std::find(solutions.begin(), solutions.end(), got) != solutions.end();
      int64_t dstar = 0;
      for (size_t a = 0; a < solutions.size(); ++a) {
        for (size_t b = a + 1; b < solutions.size(); ++b) dstar = std::max(dstar, MultisetDistance(solutions[a], solutions[b]));
      }
      const auto sv = ComputeSolvar(p);
      ok = ok && sv.status == SolvarStatus::kExact && sv.dstar == dstar;
      multi += solutions.size() > 1;
    }
    infeasible += solutions.empty();
    ++blocks;
    agree += ok;
    if (!ok && first_bad.empty()) first_bad = " (first disagreement: block " + std::to_string(i) + ")";
  }
  return {agree == blocks && blocks >= 500,
          std::to_string(agree) + "/" + std::to_string(blocks) + " blocks agree on feasibility, membership and d* (" +
              std::to_string(infeasible) + " infeasible, " + std::to_string(multi) + " with several solutions)" + first_bad};
}

// --- 5 ---------------------------------------------------------------------

Outcome SolvarMonotone() {
  Rng rng(505);
  BuildOptions reduced;
  reduced.exclude_tables = {"P8", "P10"};
  int compared = 0, violations = 0, strict = 0, skipped = 0;
  for (int i = 0; i < 400 && compared < 100; ++i) {
    const Geocode g = ParseGeocode("010010000011000");
    const int n = 3 + static_cast<int>(rng.UniformInt(10));
    std::vector<int> cells;
    const int k = 2 + static_cast<int>(rng.UniformInt(4));
    for (int j = 0; j < k; ++j) {
      cells.push_back(RaceEthCell(static_cast<RaceMask>(1 + rng.UniformInt(63)),
                                  rng.Bernoulli(0.5) ? Ethnicity::kHispanic : Ethnicity::kNotHispanic));
    }
    std::vector<PersonRecord> pop;
    for (int j = 0; j < n; ++j) {
      const int cell = cells[rng.UniformInt(cells.size())];
      pop.push_back(PersonRecord::Make(j + 1, j + 1, g, rng.Bernoulli(0.5) ? Sex::kFemale : Sex::kMale,
                                       static_cast<int>(rng.UniformInt(90)), RaceOfCell(cell), EthOfCell(cell)));
    }
    const auto bundle = Tabulate(pop, GeoUniverse({{g, n}}), BlockTableNames());
    const auto full = ComputeSolvar(BuildProblemB(bundle, g.str()));
    const auto less = ComputeSolvar(BuildProblemB(bundle, g.str(), reduced));
    if (full.status != SolvarStatus::kExact || less.status != SolvarStatus::kExact) {
      // A lower bound on the reduced problem at or above the exact full value still decides.
      if (full.status == SolvarStatus::kExact && less.dstar >= full.dstar) {
        ++compared;
        strict += less.dstar > full.dstar;
      } else {
        ++skipped;
      }
      continue;
    }
    ++compared;
    violations += less.dstar < full.dstar;
    strict += less.dstar > full.dstar;
  }
  return {compared >= 100 && violations == 0 && strict >= 1,
          std::to_string(compared) + " blocks compared, " + std::to_string(violations) + " violations, " +
              std::to_string(strict) + " strictly less variable with full tables, " + std::to_string(skipped) +
              " undecided"};
}

// --- 6 ---------------------------------------------------------------------

ExperimentConfig SmallConfig(const std::string& mode) {
  return ParseConfig("seed = 61\nuniverse.tracts = 2\nuniverse.blocks_per_tract = 12\n"
                     "universe.block_sizes = 1,3,8,20,45\nuniverse.size_weights = 2,3,4,3,2\n"
                     "reconstruct.mode = " + mode + "\n");
}

Outcome MetricIdentities() {
  const fs::path root = fs::temp_directory_path() / "reconlab_acceptance_6";
  fs::remove_all(root);
  std::map<std::string, std::vector<ReidRow>> by_data;
  int rows = 0, identity_bad = 0;
  for (const char* mode : {"b", "bt"}) {
    const auto dir = root / mode;
    RunExperiment(SmallConfig(mode), dir, 2);
    for (const auto& r : ReadReidReport(dir / "reid_counts.csv")) {
      ++rows;
      const auto p = r.Precision();
      const bool ok = r.putative == 0
                          ? !p.has_value()
                          : p && std::abs(*p - 100.0 * static_cast<double>(r.confirmed) / static_cast<double>(r.putative)) < 5e-5;
      identity_bad += !ok || r.confirmed > r.putative || r.putative > r.population;
      if (std::string(mode) == "b" || r.data == "rhdf_bt") by_data[r.data].push_back(r);
    }
    // The stored precision column itself, rounded to four decimals.
    std::ifstream in(dir / "reid_counts.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::vector<std::string> f;
      std::stringstream ss(line);
      for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
      const double put = std::stod(f[4]), conf = std::stod(f[5]);
      if (put == 0) {
        identity_bad += f[6] != "NA";
      } else {
        identity_bad += std::abs(std::stod(f[6]) - 100.0 * conf / put) > 5e-5;
      }
    }
  }
  const std::vector<std::string> sources = {"rhdf_b", "rhdf_bt", "mdg", "prg"};
  int frames_bad = 0, compared = 0;
  for (const auto& s : sources) {
    if (by_data[s].size() != by_data["rhdf_b"].size() || by_data[s].empty()) return {false, "missing source " + s};
  }
  for (size_t i = 0; i < by_data["rhdf_b"].size(); ++i) {
    const auto& ref = by_data["rhdf_b"][i];
    for (const auto& s : sources) {
      const auto& r = by_data[s][i];
      ++compared;
      frames_bad += r.attacker != ref.attacker || r.StratumLabel() != ref.StratumLabel() || r.putative != ref.putative;
    }
  }
  fs::remove_all(root);
  return {identity_bad == 0 && frames_bad == 0,
          std::to_string(rows) + " stratum rows checked for precision = 100*confirmed/putative (" +
              std::to_string(identity_bad) + " bad); putative counts equal across rhdf_b, rhdf_bt, mdg, prg in " +
              std::to_string(compared - frames_bad) + "/" + std::to_string(compared) + " comparisons"};
}

// --- 7 and 8 ---------------------------------------------------------------

struct Lab {
  GeoUniverse universe;
  std::vector<PersonRecord> pop, dd;
  TableBundle bundle;
  std::vector<SolvarResult> solvar;
  std::unique_ptr<Strata> strata;
  AttackerFile attacker;

  Lab() {
    UniverseShape shape;
    shape.tracts = 84;
    shape.blocks_per_tract = 40;
    shape.block_sizes = {1, 3, 8, 20, 45, 90, 180};
    shape.size_weights = {2, 3, 4, 4, 3, 2, 1};
    universe = MakeSyntheticUniverse(shape, 7);
    pop = GeneratePopulation(Spec(universe, 3));
    dd = DataDefinedFilter(pop, 5);
    bundle = Tabulate(pop, universe, AllTableNames());
    for (const auto& e : universe.blocks()) solvar.push_back(ComputeSolvar(BuildProblemB(bundle, e.geocode.str())));
    strata = std::make_unique<Strata>(pop, universe, solvar);
    attacker = MakeAttackerFile(dd, universe, PerfectDegradation(), 9);
  }

  std::vector<ReidRow> Score(const std::string& name, const std::vector<PersonRecord>& l) const {
    const auto put = PutativeMatch(l, attacker);
    return ReidMetrics(name, "perfect", attacker, put, ConfirmMatch(put, dd), *strata);
  }
  std::vector<PersonRecord> Reconstruct(const TableBundle& b) const {
    return AssembleRhdf(b, universe, ReconMode::kBlock, {}, 11, 1).records;
  }
};

const ReidRow& Row(const std::vector<ReidRow>& rows, ModalStratum m, SolvarStratum s) {
  for (const auto& r : rows) {
    if (r.size_class == -1 && r.modal == m && r.solvar == s) return r;
  }
  throw std::logic_error("stratum missing");
}

double Prec(const std::vector<ReidRow>& rows, ModalStratum m, SolvarStratum s) {
  return Row(rows, m, s).Precision().value_or(-1.0);
}

Outcome Baselines(const Lab& lab) {
  const auto recon = lab.Score("rhdf_b", lab.Reconstruct(lab.bundle));
  const auto mdg = lab.Score("mdg", MdgBaseline(lab.pop, lab.universe));
  const auto prg = lab.Score("prg", PrgBaseline(lab.pop, lab.universe, 4));

  // Expected proportional-guess accuracy over nonmodal data-defined persons.
  const auto hist = RaceEthByBlock(lab.pop);
  double e_full = 0, e_loo = 0;
  int64_t n = 0;
  for (const auto& p : lab.dd) {
    const auto& h = hist.at(p.block);
    int64_t total = 0, mx = 0;
    for (int64_t c : h) {
      total += c;
      mx = std::max(mx, c);
    }
    if (h[p.race_eth()] >= mx) continue;
    ++n;
    e_full += static_cast<double>(h[p.race_eth()]) / static_cast<double>(total);
    e_loo += static_cast<double>(h[p.race_eth()] - 1) / static_cast<double>(total - 1);
  }
  e_full *= 100.0 / static_cast<double>(n);
  e_loo *= 100.0 / static_cast<double>(n);

  const double mdg_nm = Prec(mdg, ModalStratum::kNonmodal, SolvarStratum::kAny);
  const double prg_nm = Prec(prg, ModalStratum::kNonmodal, SolvarStratum::kAny);
  const double rec_nzu = Prec(recon, ModalStratum::kNonmodal, SolvarStratum::kZeroUnique);
  const bool pass = lab.pop.size() >= 100000 && mdg_nm >= 0 && mdg_nm <= 5.0 &&
                    std::abs(prg_nm - e_full) <= 5.0 && rec_nzu >= 90.0;
  return {pass, std::to_string(lab.pop.size()) + " persons; nonmodal precision MDG " + Fmt("%.2f", mdg_nm) +
                    ", PRG " + Fmt("%.2f", prg_nm) + " vs expectation " + Fmt("%.2f", e_full) +
                    " (leave-one-out " + Fmt("%.2f", e_loo) + "); reconstruction on nonmodal zero-solvar uniques " +
                    Fmt("%.2f", rec_nzu)};
}

Outcome DefenseOrdering(const Lab& lab) {
  auto put_rate = [](const std::vector<ReidRow>& rows) {
    return Row(rows, ModalStratum::kAll, SolvarStratum::kAny).PutativeRate();
  };
  auto nzu = [](const std::vector<ReidRow>& rows) {
    return Prec(rows, ModalStratum::kNonmodal, SolvarStratum::kZeroUnique);
  };
  const auto undefended = lab.Score("rhdf_b", lab.Reconstruct(lab.bundle));
  const auto prg = lab.Score("prg", PrgBaseline(lab.pop, lab.universe, 4));
  std::vector<std::vector<ReidRow>> swaps;
  for (double rate : {0.05, 0.5}) {
    SwapConfig sc;
    sc.rate = rate;
    sc.seed = 17;
    const auto sw = SwapDefense(lab.pop, sc);
    swaps.push_back(lab.Score("rhdf_b", lab.Reconstruct(Tabulate(sw.records, lab.universe, AllTableNames()))));
  }
  const auto noisy = NoiseDefense(lab.pop, lab.universe, NoiseConfig{}, 21, 1);
  const auto noise = lab.Score("rhdf_b", lab.Reconstruct(noisy.bundle));

  const double base = put_rate(undefended);
  auto drop = [&](const std::vector<ReidRow>& rows) { return 100.0 * (base - put_rate(rows)) / base; };
  const double p_noise = nzu(noise), p_prg = nzu(prg), p_lo = nzu(swaps[0]), p_hi = nzu(swaps[1]),
               p_undef = nzu(undefended);
  const double d_noise = drop(noise), d_lo = drop(swaps[0]), d_hi = drop(swaps[1]);

  const bool precision_order = std::abs(p_noise - p_prg) <= 5.0 && p_noise < p_hi && p_hi < p_lo && p_lo <= p_undef;
  const bool putative_rule = d_noise >= 30.0 && d_lo < 30.0 && d_hi < 30.0;
  std::string detail = "nonmodal zero-solvar-unique precision noise " + Fmt("%.2f", p_noise) + " (PRG " +
                       Fmt("%.2f", p_prg) + ") < swap@0.5 " + Fmt("%.2f", p_hi) + " < swap@0.05 " +
                       Fmt("%.2f", p_lo) + " <= undefended " + Fmt("%.2f", p_undef) +
                       (precision_order ? " holds" : " violated") + "; putative-rate reduction noise " +
                       Fmt("%.1f%%", d_noise) + ", swap@0.05 " + Fmt("%.1f%%", d_lo) + ", swap@0.5 " +
                       Fmt("%.1f%%", d_hi) + " (swaps required < 30%)";
  return {precision_order && putative_rule, detail};
}

// --- 9 ---------------------------------------------------------------------

Outcome Suppression() {
  UniverseShape shape;
  shape.tracts = 10;
  shape.blocks_per_tract = 30;
  shape.block_sizes = {0, 1, 2, 3, 5, 8, 20};
  shape.size_weights = {1, 5, 4, 3, 2, 2, 1};
  const GeoUniverse u = MakeSyntheticUniverse(shape, 909);
  const auto pop = GeneratePopulation(Spec(u, 910));
  const auto sup = SuppressDefense(Tabulate(pop, u, AllTableNames()), SuppressConfig{3, true});
  int64_t total = 0, whole = 0;
  for (const auto& row : sup.report) {
    if (row.geo_level != "block") continue;
    total += row.tables_total;
    whole += row.tables_suppressed;
  }
  const auto rec = AssembleRhdf(sup.bundle, u, ReconMode::kBlock, {}, 3, 1);
  std::map<std::string, SolveStatus> status;
  for (const auto& g : rec.report) status[g.geocode] = g.status;
  const size_t p1 = sup.bundle.schema().IndexOf("P1");
  int64_t hidden = 0, flagged = 0;
  for (const auto& e : u.blocks()) {
    const auto* t = sup.bundle.Find(e.geocode.str(), p1);
    if (t == nullptr || (*t)[0] != kSuppressed) continue;
    ++hidden;
    flagged += status[e.geocode.str()] == SolveStatus::kUnreconstructable;
  }
  const double share = 100.0 * static_cast<double>(whole) / static_cast<double>(total);
  return {share >= 50.0 && hidden > 0 && flagged == hidden,
          Fmt("%.1f%%", share) + " of block-level tables whole-suppressed; " + std::to_string(flagged) + "/" +
              std::to_string(hidden) + " fully suppressed blocks reported unreconstructable"};
}

// --- 10 --------------------------------------------------------------------

Outcome Determinism() {
  const fs::path root = fs::temp_directory_path() / "reconlab_acceptance_10";
  fs::remove_all(root);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  int same = 0, runs = 0;
  for (const char* defense : {"none", "swap", "noise"}) {
    auto cfg = SmallConfig("b");
    cfg.defense = defense;
    cfg.swap.rate = 0.2;
    RunExperiment(cfg, root / (std::string(defense) + "_1"), 1);
    RunExperiment(cfg, root / (std::string(defense) + "_4"), 4);
    RunExperiment(cfg, root / (std::string(defense) + "_1b"), 1);
    const auto a = slurp(root / (std::string(defense) + "_1") / "manifest.json");
    same += !a.empty() && a == slurp(root / (std::string(defense) + "_4") / "manifest.json") &&
            a == slurp(root / (std::string(defense) + "_1b") / "manifest.json");
    ++runs;
  }
  fs::remove_all(root);
  return {same == runs, std::to_string(same) + "/" + std::to_string(runs) +
                            " configurations give identical manifests over three runs with 1 and 4 jobs"};
}

}  // namespace
}  // namespace reconlab

int main(int argc, char** argv) {
  using namespace reconlab;
  using Clock = std::chrono::steady_clock;
  CLI::App app{"Acceptance criteria"};
  std::set<int> expected;
  app.add_option("--expect-fail", expected, "Criteria known to fail");
  CLI11_PARSE(app, argc, argv);
  int failures = 0;
  std::set<int> failed;
  std::unique_ptr<Lab> lab;
  auto run = [&](int id, double limit_s, const std::function<Outcome()>& fn) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool in_time = s < limit_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    if (!pass) failed.insert(id);
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail << " ["
              << Fmt("%.2f", s) << " s, limit " << Fmt("%.0f", limit_s) << " s"
              << (in_time ? "" : ", over time") << "]" << std::endl;
  };
  run(1, 1, Jefferson);
  run(2, 10, Singletons);
  run(3, 120, SaturatedFrame);
  run(4, 300, OracleEquivalence);
  run(5, 300, SolvarMonotone);
  run(6, 60, MetricIdentities);
  const auto t0 = Clock::now();
  lab = std::make_unique<Lab>();
  const double setup = std::chrono::duration<double>(Clock::now() - t0).count();
  run(7, 600 - setup, [&] { return Baselines(*lab); });
  run(8, 1200 - setup, [&] { return DefenseOrdering(*lab); });
  run(9, 300, Suppression);
  run(10, 300, Determinism);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed");
  if (!expected.empty()) {
    std::cout << "; expected failures:";
    for (int id : expected) std::cout << " " << id;
  }
  std::cout << std::endl;
  return failed == expected ? 0 : 1;
}
