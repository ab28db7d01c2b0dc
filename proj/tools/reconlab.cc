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

// reconlab: command-line front end for the experiment pipeline.
//
// Exit codes: 0 success, 1 invariant violation or stage failure, 2 usage
// or configuration error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "reconlab/parallel.h"
#include "reconlab/pipeline.h"
#include "reconlab/tabulation.h"

namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<uint64_t> seed;
  int jobs = reconlab::DefaultJobs();
};

void AddCommon(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "Experiment configuration file");
  cmd->add_option("--out", f.out, "Artifact directory (default: $RECONLAB_OUT or ./reconlab_out)");
  cmd->add_option("--seed", f.seed, "Master seed, overrides the configuration");
  cmd->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

std::string OutDir(const CommonFlags& f) {
  if (!f.out.empty()) return f.out;
  if (const char* env = std::getenv("RECONLAB_OUT"); env != nullptr && *env != '\0') return env;
  return "reconlab_out";
}

reconlab::ExperimentConfig Config(const CommonFlags& f) {
  reconlab::ExperimentConfig cfg =
      f.config.empty() ? reconlab::ExperimentConfig{} : reconlab::LoadConfig(f.config);
  if (f.seed) cfg.seed = *f.seed;
  cfg.Validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reconstruction and reidentification attack laboratory"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string stage;
  std::string tab_input, tab_output;

  auto* run = app.add_subcommand("run", "Run every stage, or one with --stage");
  AddCommon(run, flags);
  run->add_option("--stage", stage, "Run only this stage");

  std::vector<CLI::App*> stage_cmds;
  for (const auto& name : reconlab::StageNames()) {
    auto* cmd = app.add_subcommand(name, "Run the " + name + " stage");
    AddCommon(cmd, flags);
    stage_cmds.push_back(cmd);
    if (name == "tabulate") {
      cmd->add_option("--input", tab_input, "Tabulate this microdata file instead");
      cmd->add_option("--output", tab_output, "Bundle path for --input");
    }
  }
  auto* verify = app.add_subcommand("verify", "Re-check invariants of an artifact directory");
  AddCommon(verify, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (verify->parsed()) {
      const auto problems = reconlab::VerifyArtifacts(OutDir(flags));
      for (const auto& p : problems) std::cout << "VIOLATION " << p << "\n";
      if (!problems.empty()) return kViolation;
      std::cout << "ok\n";
      return kOk;
    }
    for (auto* cmd : stage_cmds) {
      if (!cmd->parsed()) continue;
      if (cmd->get_name() == "tabulate" && !tab_input.empty()) {
        if (tab_output.empty()) {
          std::cerr << "tabulate: --output is required with --input\n";
          return kUsage;
        }
        reconlab::WriteBundle(reconlab::TabulateMicrodataFile(tab_input), tab_output);
        return kOk;
      }
      reconlab::RunStage(Config(flags), cmd->get_name(), OutDir(flags), flags.jobs);
      return kOk;
    }
    const auto cfg = Config(flags);
    if (stage.empty()) {
      reconlab::RunExperiment(cfg, OutDir(flags), flags.jobs);
    } else {
      reconlab::RunStage(cfg, stage, OutDir(flags), flags.jobs);
    }
    return kOk;
  } catch (const reconlab::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kUsage;
  } catch (const reconlab::StageError& e) {
    std::cerr << "stage failed: " << e.what() << "\n";
    return kViolation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kViolation;
  }
}
