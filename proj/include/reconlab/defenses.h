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

// Disclosure limitation applied before publication: household swapping,
// a noisy-measurement mechanism that emits protected microdata, and
// primary plus whole-table cell suppression.

#ifndef RECONLAB_DEFENSES_H_
#define RECONLAB_DEFENSES_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "reconlab/geography.h"
#include "reconlab/population.h"
#include "reconlab/tabulation.h"

namespace reconlab {

// --- Swapping ---

enum class SwapScope { kTract, kCounty, kState };
enum class SwapSelection { kUniform, kTargetUnique };
std::string_view SwapScopeName(SwapScope s);
SwapScope ParseSwapScope(std::string_view s);
std::string_view SwapSelectionName(SwapSelection s);
SwapSelection ParseSwapSelection(std::string_view s);

struct SwapConfig {
  // Fraction of households moved to another block.
  double rate = 0.0;
  SwapScope scope = SwapScope::kTract;
  SwapSelection selection = SwapSelection::kUniform;
  uint64_t seed = 1;

  void Validate() const;
};

struct SwapReport {
  int64_t households = 0;
  int64_t pairs_requested = 0;  // round(rate * households / 2)
  int64_t pairs_swapped = 0;
  int64_t cross_size_pairs = 0;  // pairs of unequal household size
  int64_t unpaired = 0;          // requested pairs that could not be formed
  int64_t households_moved = 0;
};

struct SwapResult {
  std::vector<PersonRecord> records;  // input order, only blocks changed
  SwapReport report;
};

// Households are visited in a seeded random order (households holding a
// person unique on {block, sex, agebin} first under kTargetUnique) and
// paired with an earlier waiting household of the same size in the same
// scope but a different block. When the visit ends short of the requested
// pairs, leftover waiting households of unequal size are paired.
SwapResult SwapDefense(const std::vector<PersonRecord>& pop, const SwapConfig& cfg);

// --- Noise ---

enum class NoiseFamily { kGeometric, kDiscreteGaussian };
std::string_view NoiseFamilyName(NoiseFamily f);
NoiseFamily ParseNoiseFamily(std::string_view s);

struct NoiseConfig {
  NoiseFamily family = NoiseFamily::kGeometric;
  // Per-query scales: the geometric law uses alpha = exp(-1 / scale), the
  // discrete Gaussian uses sigma = scale. Zero turns a query exact.
  double sex_age_scale = 2.0;    // sex x single-year age
  double race_eth_scale = 0.25;  // race x ethnicity
  double detail_scale = 0.5;     // sex x age x race x ethnicity
  // The block total is always held exact.

  void Validate() const;
  bool exact() const { return sex_age_scale == 0 && race_eth_scale == 0 && detail_scale == 0; }
};

struct NoiseResult {
  std::vector<PersonRecord> records;  // no identifiers
  TableBundle bundle;
};

// Per block: noisy sex x age and race x ethnicity marginals are projected
// onto {x >= 0, sum x = N} and rounded to integers with total N; the noisy
// detail counts seed an iterative proportional fit to both marginals,
// which is rounded to an integer table with those margins and expanded to
// records. All-zero scales reproduce the input histogram.
NoiseResult NoiseDefense(const std::vector<PersonRecord>& pop, const GeoUniverse& universe,
                         const NoiseConfig& cfg, uint64_t seed, int jobs = 1);

// Euclidean projection onto {x >= 0, sum x = total}.
std::vector<double> ProjectToSimplex(const std::vector<double>& v, double total);
// Integers with the given total, each within 1 of its input; ties go to the
// lower index.
std::vector<int64_t> RoundToTotal(const std::vector<double>& v, int64_t total);

// --- Suppression ---

struct SuppressConfig {
  // Cells with 1 <= count < threshold are suppressed.
  int64_t threshold = 3;
  // Suppress every cell of a table whose universe count is below threshold.
  bool whole_table = true;

  void Validate() const;
};

struct SuppressionRow {
  std::string table;
  std::string geo_level;  // "block" or "tract"
  int64_t cells_total = 0;
  int64_t cells_suppressed = 0;
  int64_t tables_total = 0;
  int64_t tables_suppressed = 0;
};

struct SuppressResult {
  TableBundle bundle;
  std::vector<SuppressionRow> report;  // schema table order
};

SuppressResult SuppressDefense(const TableBundle& bundle, const SuppressConfig& cfg);

// `table,geo_level,cells_total,cells_suppressed,tables_suppressed`
void WriteSuppressionReport(const std::vector<SuppressionRow>& rows,
                            const std::filesystem::path& path);

}  // namespace reconlab

#endif  // RECONLAB_DEFENSES_H_
