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

// Solution variability: the largest share of a block's records that can
// differ between two reconstructions consistent with the same tables.

#ifndef RECONLAB_SOLVAR_H_
#define RECONLAB_SOLVAR_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "reconlab/reconstruction.h"

namespace reconlab {

class InfeasibleProblem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SolvarStatus { kExact, kLowerBound };
std::string_view SolvarStatusName(SolvarStatus s);

struct SolvarResult {
  std::string block;
  int64_t population = 0;
  int64_t dstar = 0;          // max records differing between two solutions
  double solvar = 0.0;        // 100 * dstar / population
  double max_solvar = 0.0;    // min(100, 2 * solvar)
  SolvarStatus status = SolvarStatus::kExact;
  int64_t solutions_seen = 0;
};

struct SolvarOptions {
  // Solutions enumerated before falling back to the two-copy program.
  int enumerate_limit = 512;
  SearchLimits enumerate_limits{200'000, 30.0, 0, false, 0};
  // Branch-and-bound nodes of the two-copy program, and the largest number
  // of free cells it is attempted on.
  int64_t milp_nodes = 400;
  int milp_max_free = 80;
};

// N - sum_c min(x_c, y_c) for two histograms of equal total N.
int64_t HistogramDistance(const std::vector<int64_t>& x, const std::vector<int64_t>& y);

// Throws InfeasibleProblem when the problem has no solution, and
// std::invalid_argument for non-block or unreconstructable problems.
SolvarResult ComputeSolvar(const ReconProblem& p, const SolvarOptions& options = {});

struct CumSolvarRow {
  double percentile = 0.0;
  double solvar = 0.0;       // of the last block in the prefix
  double max_solvar = 0.0;
  int64_t population = 0;    // blocks added since the previous row
  int64_t cum_population = 0;
  double cum_solvar = 0.0;   // 100 * sum dstar / sum N over the prefix
  double max_cum_solvar = 0.0;
};

std::vector<double> DefaultPercentGrid();  // 5, 10, ..., 100

// Blocks sorted by solvar ascending, ties broken randomly under `seed`; row
// p covers the first ceil(p/100 * n) blocks.
std::vector<CumSolvarRow> CumSolvar(const std::vector<SolvarResult>& results,
                                    const std::vector<double>& percent_grid, uint64_t seed);

// `geocode,population,dstar,solvar,max_solvar,status`
void WriteSolvar(const std::vector<SolvarResult>& results, const std::filesystem::path& path);
std::vector<SolvarResult> ReadSolvar(const std::filesystem::path& path);
void WriteCumSolvar(const std::vector<CumSolvarRow>& rows, const std::filesystem::path& path);

}  // namespace reconlab

#endif  // RECONLAB_SOLVAR_H_
