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

#include "reconlab/defenses.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "reconlab/reconstruction.h"
#include "reconlab/solvar.h"
#include "test_support.h"

namespace reconlab {
namespace {

using testing::Fixture;
using testing::UniverseOf;

struct World {
  GeoUniverse universe;
  std::vector<PersonRecord> pop;
};

World MakeWorld(UniverseShape shape, uint64_t seed) {
  World w;
  w.universe = MakeSyntheticUniverse(shape, seed);
  w.pop = GeneratePopulation(testing::DefaultSpec(w.universe, seed + 1));
  return w;
}

std::map<std::tuple<int, int, int>, int64_t> National(const std::vector<PersonRecord>& pop) {
  std::map<std::tuple<int, int, int>, int64_t> h;
  for (const auto& r : pop) ++h[{int(r.sex), r.age, r.race_eth()}];
  return h;
}

TEST(Swap, RateZeroIsIdentity) {
  const World w = MakeWorld(UniverseShape{2, 5, {5, 20}, {1, 1}}, 3);
  SwapConfig cfg;
  cfg.rate = 0.0;
  const auto out = SwapDefense(w.pop, cfg);
  EXPECT_EQ(out.records, w.pop);
  EXPECT_EQ(out.report.pairs_swapped, 0);
}

TEST(Swap, RateOneForcesPairing) {
  const Geocode b1 = ParseGeocode("010010000011000");
  const Geocode b2 = ParseGeocode("010010000011001");
  const std::vector<PersonRecord> pop = {
      PersonRecord::Make(1, 10, b1, Sex::kMale, 40, kWhiteAlone, Ethnicity::kNotHispanic),
      PersonRecord::Make(2, 10, b1, Sex::kFemale, 38, kWhiteAlone, Ethnicity::kNotHispanic),
      PersonRecord::Make(3, 20, b2, Sex::kMale, 70, GroupBit(1), Ethnicity::kNotHispanic),
      PersonRecord::Make(4, 20, b2, Sex::kFemale, 69, GroupBit(1), Ethnicity::kNotHispanic)};
  SwapConfig cfg;
  cfg.rate = 1.0;
  const auto out = SwapDefense(pop, cfg);
  ASSERT_EQ(out.report.pairs_swapped, 1);
  EXPECT_EQ(out.report.households_moved, 2);
  EXPECT_EQ(out.records[0].block, b2);
  EXPECT_EQ(out.records[1].block, b2);
  EXPECT_EQ(out.records[2].block, b1);
  EXPECT_EQ(out.records[3].block, b1);
}

TEST(Swap, PreservesNationalHistogramAndHouseholds) {
  const World w = MakeWorld(UniverseShape{4, 10, {5, 20, 60}, {1, 1, 1}}, 5);
  for (auto sel : {SwapSelection::kUniform, SwapSelection::kTargetUnique}) {
    SwapConfig cfg;
    cfg.rate = 0.3;
    cfg.selection = sel;
    cfg.seed = 9;
    const auto out = SwapDefense(w.pop, cfg);
    EXPECT_EQ(National(out.records), National(w.pop));
    std::map<uint64_t, Geocode> home;
    for (const auto& r : out.records) {
      auto [it, fresh] = home.emplace(r.hid, r.block);
      if (!fresh) EXPECT_EQ(it->second, r.block);
    }
    EXPECT_EQ(out.report.pairs_swapped + out.report.unpaired, out.report.pairs_requested);
  }
}

TEST(Swap, UntouchedFractionTracksRate) {
  const World w = MakeWorld(UniverseShape{10, 40, {20, 60, 120}, {1, 1, 1}}, 7);
  std::map<uint64_t, std::pair<Geocode, Geocode>> moved;
  SwapConfig cfg;
  cfg.rate = 0.2;
  cfg.seed = 4;
  const auto out = SwapDefense(w.pop, cfg);
  for (size_t i = 0; i < w.pop.size(); ++i) moved[w.pop[i].hid] = {w.pop[i].block, out.records[i].block};
  ASSERT_GE(moved.size(), 10000u);
  int64_t untouched = 0;
  for (const auto& [hid, blocks] : moved) untouched += blocks.first == blocks.second;
  EXPECT_NEAR(static_cast<double>(untouched) / static_cast<double>(moved.size()), 1.0 - cfg.rate, 0.02);
}

TEST(Swap, ConfigValidation) {
  SwapConfig cfg;
  cfg.rate = 1.5;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  EXPECT_EQ(ParseSwapScope("county"), SwapScope::kCounty);
  EXPECT_THROW(ParseSwapScope("planet"), std::invalid_argument);
  EXPECT_EQ(SwapSelectionName(ParseSwapSelection("target-unique")), "target-unique");
}

TEST(Noise, ZeroScalesReproduceExactTables) {
  const World w = MakeWorld(UniverseShape{2, 5, {5, 20, 60}, {1, 1, 1}}, 3);
  NoiseConfig cfg;
  cfg.sex_age_scale = cfg.race_eth_scale = cfg.detail_scale = 0.0;
  const auto out = NoiseDefense(w.pop, w.universe, cfg, 1);
  EXPECT_TRUE(out.bundle == Tabulate(w.pop, w.universe, AllTableNames()));
}

TEST(Noise, BlockTotalsInvariantAndDeterministic) {
  const World w = MakeWorld(UniverseShape{3, 8, {1, 5, 20, 60}, {1, 1, 1, 1}}, 8);
  for (auto family : {NoiseFamily::kGeometric, NoiseFamily::kDiscreteGaussian}) {
    NoiseConfig cfg;
    cfg.family = family;
    const auto out = NoiseDefense(w.pop, w.universe, cfg, 12, 1);
    std::map<Geocode, int64_t> n;
    for (const auto& r : out.records) ++n[r.block];
    for (const auto& e : w.universe.blocks()) {
      EXPECT_EQ(n[e.geocode], e.population);
      EXPECT_EQ((*out.bundle.Find(e.geocode.str(), "P1"))[0], e.population);
    }
    EXPECT_TRUE(CheckAdditivity(out.bundle).empty());
    EXPECT_EQ(NoiseDefense(w.pop, w.universe, cfg, 12, 3).records, out.records);
    EXPECT_NE(National(out.records), National(w.pop));
  }
}

TEST(Noise, ProjectionAndRounding) {
  const auto p = ProjectToSimplex({3.0, -1.0, 0.5}, 2.0);
  EXPECT_NEAR(p[0], 2.0, 1e-12);
  EXPECT_NEAR(p[1], 0.0, 1e-12);
  EXPECT_NEAR(p[2], 0.0, 1e-12);
  const auto even = ProjectToSimplex({1.0, 1.0, 1.0, 1.0}, 2.0);
  for (double x : even) EXPECT_NEAR(x, 0.5, 1e-12);
  const auto r = RoundToTotal({1.5, 1.5, 1.0}, 4);
  EXPECT_EQ(r, (std::vector<int64_t>{2, 1, 1}));
  const auto q = RoundToTotal(ProjectToSimplex({0.2, 0.2, 0.2, 0.2, 0.2}, 3), 3);
  EXPECT_EQ(q, (std::vector<int64_t>{1, 1, 1, 0, 0}));
}

TEST(Noise, ConfigValidation) {
  NoiseConfig cfg;
  cfg.detail_scale = -1;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  EXPECT_EQ(ParseNoiseFamily("discrete-gaussian"), NoiseFamily::kDiscreteGaussian);
}

TEST(Suppress, LargeCellsUntouched) {
  const Geocode b = ParseGeocode("010010000011000");
  std::vector<PersonRecord> pop;
  for (int i = 1; i <= 3; ++i) {
    pop.push_back(PersonRecord::Make(i, i, b, Sex::kMale, 30, kWhiteAlone, Ethnicity::kNotHispanic));
  }
  // Every published cell is >= t.
  const auto small = Tabulate(pop, UniverseOf(pop), {"P1"});
  EXPECT_TRUE(SuppressDefense(small, SuppressConfig{}).bundle == small);

  // Full schema: no cell lies in 1..t-1, so primary suppression alone is a no-op.
  const auto exact = Tabulate(pop, UniverseOf(pop), AllTableNames());
  SuppressConfig primary;
  primary.whole_table = false;
  const auto out = SuppressDefense(exact, primary);
  EXPECT_TRUE(out.bundle == exact);
  for (const auto& row : out.report) EXPECT_EQ(row.cells_suppressed, 0) << row.table;
}

TEST(Suppress, SinglePersonBlockWholeSuppressed) {
  const auto pop = ReadMicrodata(Fixture("yankton_block_5122.csv"));
  const auto out = SuppressDefense(Tabulate(pop, UniverseOf(pop), AllTableNames()), SuppressConfig{});
  const auto& tables = out.bundle.geos().at("461359664005122");
  for (size_t t = 0; t < tables.size(); ++t) {
    if (tables[t].empty()) continue;
    for (int64_t v : tables[t]) EXPECT_EQ(v, kSuppressed) << out.bundle.schema().table(t).name;
  }
}

TEST(Suppress, UnsuppressedCellsKeepValues) {
  const World w = MakeWorld(UniverseShape{2, 10, {1, 3, 8, 20}, {2, 3, 3, 2}}, 4);
  const auto exact = Tabulate(w.pop, w.universe, AllTableNames());
  SuppressConfig cfg;
  cfg.whole_table = false;
  const auto out = SuppressDefense(exact, cfg);
  int64_t suppressed = 0;
  for (const auto& [geo, tables] : exact.geos()) {
    const auto& got = out.bundle.geos().at(geo);
    for (size_t t = 0; t < tables.size(); ++t) {
      for (size_t c = 0; c < tables[t].size(); ++c) {
        if (got[t][c] == kSuppressed) {
          ++suppressed;
          EXPECT_GE(tables[t][c], 1);
          EXPECT_LT(tables[t][c], cfg.threshold);
        } else {
          EXPECT_EQ(got[t][c], tables[t][c]);
        }
      }
    }
  }
  int64_t reported = 0;
  for (const auto& row : out.report) reported += row.cells_suppressed;
  EXPECT_EQ(reported, suppressed);
  EXPECT_GT(suppressed, 0);
  EXPECT_TRUE(CheckAdditivity(out.bundle).empty());
}

TEST(Suppress, SolvarNeverDrops) {
  const World w = MakeWorld(UniverseShape{1, 8, {4, 8}, {1, 1}}, 6);
  const auto exact = Tabulate(w.pop, w.universe, AllTableNames());
  SuppressConfig cfg;
  cfg.whole_table = false;
  const auto sup = SuppressDefense(exact, cfg).bundle;
  for (const auto& e : w.universe.blocks()) {
    const auto before = ComputeSolvar(BuildProblemB(exact, e.geocode.str()));
    const auto p = BuildProblemB(sup, e.geocode.str());
    if (p.status != BuildStatus::kOk) continue;
    const auto after = ComputeSolvar(p);
    if (after.status == SolvarStatus::kExact) EXPECT_GE(after.dstar, before.dstar) << e.geocode.str();
  }
}

TEST(Suppress, ConfigValidation) {
  SuppressConfig cfg;
  cfg.threshold = 1;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
}

}  // namespace
}  // namespace reconlab
