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

#ifndef RECONLAB_POPULATION_H_
#define RECONLAB_POPULATION_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "reconlab/coding.h"
#include "reconlab/geography.h"

namespace reconlab {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One person. `pid == 0` marks a record without a person identifier.
// `age < 0` marks a record known only to its BIN38 age bin (block-only
// reconstructions); otherwise `agebin == AgeBin38(age)`.
struct PersonRecord {
  uint64_t pid = 0;
  uint64_t hid = 0;
  Geocode block;
  Sex sex = Sex::kMale;
  int16_t age = -1;
  uint8_t agebin = 0;
  RaceMask race = kWhiteAlone;
  Ethnicity eth = Ethnicity::kNotHispanic;

  bool has_age() const { return age >= 0; }
  int race_eth() const { return RaceEthCell(race, eth); }

  static PersonRecord Make(uint64_t pid, uint64_t hid, const Geocode& block, Sex sex, int age,
                           RaceMask race, Ethnicity eth);
  bool operator==(const PersonRecord&) const = default;
};

struct PopulationSpec {
  GeoUniverse universe;
  // Household size weights for sizes 1, 2, ...
  std::vector<double> household_sizes = {0.27, 0.34, 0.16, 0.13, 0.06, 0.025, 0.015};
  // Default race x ethnicity mixture (126 weights, indexed by RaceEthCell).
  std::vector<double> mixture;
  // Tract-specific overrides keyed by 11-digit tract code.
  std::map<std::string, std::vector<double>> tract_mixture;
  // Age weights for ages 0..115.
  std::vector<double> age_weights;
  double male_share = 0.49;
  // Fraction of records left without a person identifier.
  double missing_pid_rate = 0.0;
  // Fraction of records that reuse the identifier of a prior record in the
  // same block.
  double duplicate_pid_rate = 0.0;
  uint64_t seed = 1;

  // Throws std::invalid_argument on negative weights or a mixture that does
  // not sum to 1 within 1e-9.
  void Validate() const;
};

// Mixture helpers. `MixtureFromShares` takes {cell, share} pairs.
std::vector<double> MixtureFromShares(const std::vector<std::pair<int, double>>& shares);
std::vector<double> DefaultMixture();
std::vector<double> DefaultAgeWeights();

// Deterministic for a fixed spec; block populations match the universe
// exactly and every household lies in one block.
std::vector<PersonRecord> GeneratePopulation(const PopulationSpec& spec);

// Drops records without an identifier and keeps one record (chosen under
// `seed`) per (pid, block).
std::vector<PersonRecord> DataDefinedFilter(const std::vector<PersonRecord>& pop, uint64_t seed);

struct AttackerRow {
  uint64_t pid = 0;
  Geocode block;
  Sex sex = Sex::kMale;
  int16_t age = 0;
  bool operator==(const AttackerRow&) const = default;
};

struct Degradation {
  double coverage = 1.0;
  double geocode_error = 0.0;
  double sex_error = 0.0;
  // Probability that a row's age is moved into a different BIN38 bin within
  // `age_error_max_shift` years.
  double age_error = 0.0;
  int age_error_max_shift = 5;
  // Fraction of output rows that are spurious (identifier not in the source).
  double spurious = 0.0;

  bool perfect() const;
  void Validate() const;
};

// All-zero degradation.
Degradation PerfectDegradation();
// Preset whose rows match the source on {pid, block, sex, agebin} about
// 37.1% of the time; the error mass is split evenly over the four error
// channels.
Degradation CommercialDegradation();

struct AttackerFile {
  std::string provenance;  // "perfect" or "degraded"
  Degradation degradation;
  std::vector<AttackerRow> rows;
};

AttackerFile MakeAttackerFile(const std::vector<PersonRecord>& pop, const GeoUniverse& universe,
                              const Degradation& deg, uint64_t seed);

// Microdata CSV: `pid,hid,block,sex,age,race,ethnicity`. Empty pid/hid mean
// 0; an age of the form "lo-hi" is a BIN38 bin.
void WriteMicrodata(const std::vector<PersonRecord>& records, const std::filesystem::path& path);
std::vector<PersonRecord> ReadMicrodata(const std::filesystem::path& path);
void WriteAttackerFile(const AttackerFile& file, const std::filesystem::path& path);
AttackerFile ReadAttackerFile(const std::filesystem::path& path);

// Canonical ordering: block, then sex, agebin, age, race-eth cell, pid.
void SortRecords(std::vector<PersonRecord>& records);

}  // namespace reconlab

#endif  // RECONLAB_POPULATION_H_
