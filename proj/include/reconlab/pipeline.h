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

// Experiment orchestration: configuration, stage runners writing artifact
// files into one directory, a content-hash manifest, and artifact checks.

#ifndef RECONLAB_PIPELINE_H_
#define RECONLAB_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "reconlab/defenses.h"
#include "reconlab/geography.h"
#include "reconlab/reconstruction.h"
#include "reconlab/solvar.h"

namespace reconlab {

// Invalid configuration; the message names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A stage failed; completed artifacts are left in place.
class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct ExperimentConfig {
  uint64_t seed = 1;

  // Synthetic universe, unless `geography` names a manifest file.
  UniverseShape shape;
  std::string geography;

  double male_share = 0.49;
  double missing_pid_rate = 0.02;
  double duplicate_pid_rate = 0.01;

  std::string defense = "none";  // none | swap | noise | suppress
  SwapConfig swap;               // seed is derived, not configured
  NoiseConfig noise;
  SuppressConfig suppress;

  ReconMode mode = ReconMode::kBlock;
  SearchLimits limits;
  SolvarOptions solvar;

  std::vector<std::string> attackers = {"perfect", "comrcl"};
  bool baselines = true;
  std::string mdg_frame = "truth";  // truth | tables

  void Validate() const;
};

// Flat `key = value` text; '#' starts a comment. Unknown keys and bad
// values throw ConfigError naming the key.
ExperimentConfig ParseConfig(std::string_view text);
ExperimentConfig LoadConfig(const std::filesystem::path& path);
// Canonical text listing every key, parseable by ParseConfig.
std::string ConfigToText(const ExperimentConfig& cfg);

// Stage seed: DeriveSeed(master, stage name).
uint64_t StageSeed(uint64_t master, std::string_view stage);

// Lowercase hex SHA-256 of a file's bytes. Throws IoError.
std::string Sha256File(const std::filesystem::path& path);

inline const std::vector<std::string>& StageNames() {
  static const std::vector<std::string> kNames = {"generate", "defend",  "tabulate", "reconstruct",
                                                  "solvar",   "attack",  "report"};
  return kNames;
}

// Runs one stage in `dir`, reading earlier artifacts from it, and records
// its inputs and outputs in `dir/manifest.json`. `jobs` never changes the
// outputs. Throws StageError.
void RunStage(const ExperimentConfig& cfg, const std::string& stage,
              const std::filesystem::path& dir, int jobs);
// Every stage in order.
void RunExperiment(const ExperimentConfig& cfg, const std::filesystem::path& dir, int jobs);

// Names of the artifacts produced for a configuration, keyed by stage.
std::map<std::string, std::vector<std::string>> StageOutputs(const ExperimentConfig& cfg);

// Re-checks an artifact directory: table additivity, reconstruction
// constraints, matching without replacement, metric identities, solution
// variability ranges and manifest hashes. Returns one line per violation.
std::vector<std::string> VerifyArtifacts(const std::filesystem::path& dir);

// Standalone tabulation of a microdata file over the blocks it mentions.
TableBundle TabulateMicrodataFile(const std::filesystem::path& input);

}  // namespace reconlab

#endif  // RECONLAB_PIPELINE_H_
