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

#include "reconlab/solvar.h"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "reconlab/pipeline.h"
#include "test_support.h"

namespace reconlab {
namespace {

using testing::Fixture;
using testing::UniverseOf;

SolvarResult SolvarOf(const std::vector<PersonRecord>& pop, const std::string& block,
                      const BuildOptions& build = {}) {
  const auto bundle = Tabulate(pop, UniverseOf(pop), AllTableNames());
  return ComputeSolvar(BuildProblemB(bundle, block, build));
}

TEST(HistogramDistance, CountsUnmatchedRecords) {
  EXPECT_EQ(HistogramDistance({2, 0, 1}, {2, 0, 1}), 0);
  EXPECT_EQ(HistogramDistance({1, 1, 0}, {0, 1, 1}), 1);
  EXPECT_EQ(HistogramDistance({2, 0}, {0, 2}), 2);
}

TEST(Solvar, SinglePersonBlockIsZero) {
  const auto r = SolvarOf(ReadMicrodata(Fixture("yankton_block_5122.csv")), "461359664005122");
  EXPECT_EQ(r.dstar, 0);
  EXPECT_EQ(r.solvar, 0.0);
  EXPECT_EQ(r.status, SolvarStatus::kExact);
}

TEST(Solvar, JeffersonIsZero) {
  const auto r = SolvarOf(ReadMicrodata(Fixture("jefferson_block_1001.csv")), "010730051031001");
  EXPECT_EQ(r.population, 16);
  EXPECT_EQ(r.dstar, 0);
  EXPECT_EQ(r.status, SolvarStatus::kExact);
}

TEST(Solvar, WithheldIteratedTablesGiveFullVariability) {
  // Two men in different age bins, one White and one Black. Without the
  // race-iterated age tables either race can go with either age.
  const Geocode b = ParseGeocode("010010000011000");
  const std::vector<PersonRecord> pop = {
      PersonRecord::Make(1, 1, b, Sex::kMale, 32, kWhiteAlone, Ethnicity::kNotHispanic),
      PersonRecord::Make(2, 2, b, Sex::kMale, 47, GroupBit(1), Ethnicity::kNotHispanic)};
  BuildOptions build;
  for (char c = 'A'; c <= 'I'; ++c) build.exclude_tables.insert(std::string("P12") + c);
  const auto r = SolvarOf(pop, b.str(), build);
  EXPECT_EQ(r.dstar, 2);
  EXPECT_DOUBLE_EQ(r.solvar, 100.0);
  EXPECT_EQ(r.solutions_seen, 2);
  EXPECT_EQ(SolvarOf(pop, b.str()).dstar, 0);
}

TEST(Solvar, RejectsInfeasibleProblem) {
  const auto pop = ReadMicrodata(Fixture("jefferson_block_1001.csv"));
  auto bundle = Tabulate(pop, UniverseOf(pop), AllTableNames());
  bundle.Mutable("010730051031001", bundle.schema().IndexOf("P8"))[0] += 1;
  bundle.Mutable("010730051031001", bundle.schema().IndexOf("P8"))[1] -= 1;
  EXPECT_THROW(ComputeSolvar(BuildProblemB(bundle, "010730051031001")), InfeasibleProblem);
}

SolvarResult Block(const std::string& g, int64_t n, int64_t d) {
  SolvarResult r;
  r.block = g;
  r.population = n;
  r.dstar = d;
  r.solvar = 100.0 * static_cast<double>(d) / static_cast<double>(n);
  r.max_solvar = std::min(100.0, 2 * r.solvar);
  return r;
}

TEST(CumSolvar, TwoEqualBlocks) {
  const auto rows = CumSolvar({Block("b1", 10, 1), Block("b0", 10, 0)}, {50, 100}, 7);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_DOUBLE_EQ(rows[0].cum_solvar, 0.0);
  EXPECT_EQ(rows[0].cum_population, 10);
  EXPECT_DOUBLE_EQ(rows[1].cum_solvar, 5.0);
  EXPECT_DOUBLE_EQ(rows[1].max_cum_solvar, 10.0);
}

TEST(CumSolvar, AllZeroInputs) {
  std::vector<SolvarResult> in;
  for (int i = 0; i < 9; ++i) in.push_back(Block("b" + std::to_string(i), 3 + i, 0));
  for (const auto& row : CumSolvar(in, DefaultPercentGrid(), 1)) {
    EXPECT_EQ(row.solvar, 0.0);
    EXPECT_EQ(row.cum_solvar, 0.0);
    EXPECT_EQ(row.max_cum_solvar, 0.0);
  }
}

TEST(CumSolvar, NondecreasingAlongSortedOrder) {
  std::vector<SolvarResult> in;
  for (int i = 0; i < 40; ++i) in.push_back(Block("b" + std::to_string(i), 5 + i % 7, (i * 7) % 5));
  const auto rows = CumSolvar(in, DefaultPercentGrid(), 3);
  ASSERT_EQ(rows.size(), 20u);
  for (size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GE(rows[i].solvar, rows[i - 1].solvar);
    EXPECT_GE(rows[i].cum_solvar, rows[i - 1].cum_solvar);
    EXPECT_GE(rows[i].cum_population, rows[i - 1].cum_population);
  }
}

TEST(CumSolvar, FileRoundTrip) {
  const std::vector<SolvarResult> in = {Block("010010000011000", 8, 2), Block("010010000011001", 3, 0)};
  const auto path = testing::ScratchDir("solvar_io") / "solvar.csv";
  WriteSolvar(in, path);
  const auto back = ReadSolvar(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].block, in[0].block);
  EXPECT_EQ(back[0].dstar, 2);
  EXPECT_EQ(back[1].population, 3);
}

TEST(CumSolvar, FrozenSyntheticRegression) {
  const auto cfg = LoadConfig(Fixture("solvar_regression.cfg"));
  const auto dir = testing::ScratchDir("solvar_regression");
  for (const char* stage : {"generate", "defend", "tabulate", "solvar"}) RunStage(cfg, stage, dir, 2);
  std::ifstream got(dir / "cumsolvar.csv"), want(Fixture("solvar_regression.cumsolvar.csv"));
  std::stringstream g, w;
  g << got.rdbuf();
  w << want.rdbuf();
  EXPECT_EQ(g.str(), w.str());
}

}  // namespace
}  // namespace reconlab
