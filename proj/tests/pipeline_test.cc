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

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "reconlab/linkage.h"
#include "test_support.h"

namespace reconlab {
namespace {

namespace fs = std::filesystem;

ExperimentConfig Minimal() {
  return ParseConfig(R"(
seed = 5
universe.tracts = 1
universe.blocks_per_tract = 5
universe.block_sizes = 1,5,20,60
universe.size_weights = 1,1,1,1
attack.attackers = perfect
)");
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string ConfigErrorOf(std::string_view text) {
  try {
    ParseConfig(text).Validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, RoundTripsThroughText) {
  const auto cfg = Minimal();
  const auto again = ParseConfig(ConfigToText(cfg));
  EXPECT_EQ(ConfigToText(again), ConfigToText(cfg));
  EXPECT_EQ(again.shape.block_sizes, (std::vector<int64_t>{1, 5, 20, 60}));
  EXPECT_EQ(again.attackers, std::vector<std::string>{"perfect"});
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(ConfigErrorOf("defense.name = bogus").find("defense.name"), std::string::npos);
  EXPECT_NE(ConfigErrorOf("universe.tracts = many").find("universe.tracts"), std::string::npos);
  EXPECT_NE(ConfigErrorOf("no.such.key = 1").find("no.such.key"), std::string::npos);
  EXPECT_NE(ConfigErrorOf("defense.swap.rate = 2").find("defense.swap.rate"), std::string::npos);
  EXPECT_NE(ConfigErrorOf("reconstruct.mode = x").find("reconstruct.mode"), std::string::npos);
  EXPECT_NE(ConfigErrorOf("attack.attackers = perfect,psychic").find("attack.attackers"),
            std::string::npos);
  EXPECT_EQ(ConfigErrorOf("# comment only\n"), "");
}

TEST(StageSeeds, DifferPerStage) {
  EXPECT_NE(StageSeed(1, "generate"), StageSeed(1, "defend"));
  EXPECT_NE(StageSeed(1, "generate"), StageSeed(2, "generate"));
  EXPECT_EQ(StageSeed(1, "generate"), StageSeed(1, "generate"));
}

class PipelineRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(testing::ScratchDir("pipeline_a"));
    RunExperiment(Minimal(), *dir_, 1);
  }
  static void TearDownTestSuite() { delete dir_; }
  static fs::path* dir_;
};
fs::path* PipelineRun::dir_ = nullptr;

TEST_F(PipelineRun, ManifestListsEveryArtifact) {
  const auto manifest = nlohmann::json::parse(Slurp(*dir_ / "manifest.json"));
  const auto outputs = StageOutputs(Minimal());
  for (const auto& stage : StageNames()) {
    ASSERT_TRUE(manifest["stages"].contains(stage)) << stage;
    const auto& entry = manifest["stages"][stage];
    EXPECT_TRUE(entry["inputs"].contains("config.txt"));
    for (const auto& f : outputs.at(stage)) {
      ASSERT_TRUE(entry["outputs"].contains(f)) << stage << " " << f;
      EXPECT_EQ(entry["outputs"][f].get<std::string>(), Sha256File(*dir_ / f));
    }
  }
  EXPECT_TRUE(VerifyArtifacts(*dir_).empty());
}

TEST_F(PipelineRun, NonmodalZeroSolvarUniquesAllConfirmed) {
  int checked = 0;
  for (const auto& row : ReadReidReport(*dir_ / "reid_counts.csv")) {
    if (row.data != "rhdf_b" || row.size_class != -1 || row.modal != ModalStratum::kNonmodal ||
        row.solvar != SolvarStratum::kZeroUnique) {
      continue;
    }
    ASSERT_GT(row.putative, 0);
    EXPECT_DOUBLE_EQ(*row.Precision(), 100.0);
    ++checked;
  }
  EXPECT_EQ(checked, 1);
}

TEST_F(PipelineRun, DeterministicAcrossJobs) {
  const auto other = testing::ScratchDir("pipeline_b");
  RunExperiment(Minimal(), other, 4);
  EXPECT_EQ(Slurp(other / "manifest.json"), Slurp(*dir_ / "manifest.json"));
}

TEST_F(PipelineRun, DownstreamStagesReproduce) {
  const auto copy = testing::ScratchDir("pipeline_c");
  fs::copy(*dir_, copy, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  const auto outputs = StageOutputs(Minimal());
  for (const char* stage : {"reconstruct", "solvar", "attack", "report"}) {
    for (const auto& f : outputs.at(stage)) fs::remove(copy / f);
  }
  for (const char* stage : {"reconstruct", "solvar", "attack", "report"}) RunStage(Minimal(), stage, copy, 2);
  EXPECT_EQ(Slurp(copy / "manifest.json"), Slurp(*dir_ / "manifest.json"));
}

TEST_F(PipelineRun, ReportIsPureFormatting) {
  const auto copy = testing::ScratchDir("pipeline_d");
  for (const char* f : {"config.txt", "reid_counts.csv"}) fs::copy_file(*dir_ / f, copy / f);
  RunStage(Minimal(), "report", copy, 1);
  for (const char* f : {"table5.csv", "table6.csv", "figures.csv"}) {
    EXPECT_EQ(Slurp(copy / f), Slurp(*dir_ / f)) << f;
  }
}

TEST_F(PipelineRun, VerifyDetectsEditedCount) {
  const auto copy = testing::ScratchDir("pipeline_e");
  fs::copy(*dir_, copy, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  std::string tables = Slurp(copy / "tables.csv");
  const auto line = tables.find(",P1,0,");
  ASSERT_NE(line, std::string::npos);
  const auto eol = tables.find('\n', line);
  tables.replace(line, eol - line, ",P1,0,999");
  std::ofstream(copy / "tables.csv", std::ios::binary) << tables;
  const auto problems = VerifyArtifacts(copy);
  ASSERT_FALSE(problems.empty());
  bool names_hash = false, names_table = false;
  for (const auto& p : problems) {
    names_hash |= p.find("tables.csv") != std::string::npos;
    names_table |= p.find("P1") != std::string::npos;
  }
  EXPECT_TRUE(names_hash);
  EXPECT_TRUE(names_table);
}

int Cli(const std::string& args) {
  const int status = std::system((std::string(RECONLAB_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

TEST(Cli, ExitCodes) {
  const auto dir = testing::ScratchDir("cli");
  std::ofstream(dir / "bad.cfg") << "defense.name = bogus\n";
  std::ofstream(dir / "ok.cfg") << ConfigToText(Minimal());
  EXPECT_EQ(Cli("run --config " + (dir / "bad.cfg").string() + " --out " + (dir / "o1").string()), 2);
  EXPECT_EQ(Cli("run --no-such-flag"), 2);
  EXPECT_EQ(Cli("verify --out " + (dir / "missing").string()), 1);
  EXPECT_EQ(Cli("run --config " + (dir / "ok.cfg").string() + " --out " + (dir / "o2").string()), 0);
  EXPECT_EQ(Cli("verify --out " + (dir / "o2").string()), 0);
  EXPECT_EQ(Cli("tabulate --input " + testing::Fixture("jefferson_block_1001.csv") + " --output " +
                (dir / "j.csv").string()),
            0);
  EXPECT_EQ(Slurp(dir / "j.csv"), Slurp(testing::Fixture("jefferson_block_1001.tables.csv")));
}

}  // namespace
}  // namespace reconlab
