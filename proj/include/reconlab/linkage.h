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

// Record linkage of reconstructed microdata against attacker files, the
// statistical guessing baselines, and stratified reidentification metrics.

#ifndef RECONLAB_LINKAGE_H_
#define RECONLAB_LINKAGE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reconlab/geography.h"
#include "reconlab/population.h"
#include "reconlab/solvar.h"
#include "reconlab/tabulation.h"

namespace reconlab {

enum class AgeSelector { kExactAge, kAgebin38 };

// Matching key; race_eth is -1 when the key does not include it.
struct MatchKey {
  Geocode block;
  Sex sex = Sex::kMale;
  AgeSelector selector = AgeSelector::kExactAge;
  int16_t age_value = 0;  // single year or BIN38 index
  int16_t race_eth = -1;
  auto operator<=>(const MatchKey&) const = default;
};

struct AgreementResult {
  std::vector<std::pair<size_t, size_t>> exact_age;  // (L index, R index)
  std::vector<std::pair<size_t, size_t>> agebin;
  std::vector<size_t> unmatched_l;
  std::vector<size_t> unmatched_r;
};

// Two passes on {block, sex, age, race, ethnicity} and then
// {block, sex, agebin, race, ethnicity}, each record used at most once.
// Records without a single-year age only take part in the second pass.
AgreementResult AgreementMatch(const std::vector<PersonRecord>& l,
                               const std::vector<PersonRecord>& r);

// An attacker row that received race and ethnicity from a linked record.
struct EnhancedRow {
  size_t attacker_index = 0;
  size_t source_index = 0;
  int pass = 1;  // 1 exact age, 2 agebin
  AttackerRow row;
  RaceMask race = kWhiteAlone;
  Ethnicity eth = Ethnicity::kNotHispanic;
};

// Putative reidentification: links on {block, sex, age} and then
// {block, sex, agebin}; the identifier is never consulted. The set of
// linked attacker rows depends only on the {block, sex, agebin} counts of
// `l`, so sources sharing that frame link the same rows. Output is in
// attacker row order.
std::vector<EnhancedRow> PutativeMatch(const std::vector<PersonRecord>& l,
                                       const AttackerFile& attacker);

// Flags, one per enhanced row, set when the row's identifier and keys
// locate a truth record (exact age first, then agebin) whose race and
// ethnicity equal the attached values. Each truth record confirms at most
// one row.
std::vector<char> ConfirmMatch(const std::vector<EnhancedRow>& rows,
                               const std::vector<PersonRecord>& truth);

// Race x ethnicity counts per block geocode.
using RaceEthHistogram = std::array<int64_t, kNumRaceEth>;
std::map<Geocode, RaceEthHistogram> RaceEthByBlock(const std::vector<PersonRecord>& records);
// The same counts derived from published P8 and P9. Blocks whose tables are
// missing or suppressed are skipped.
std::map<Geocode, RaceEthHistogram> RaceEthByBlock(const TableBundle& bundle);

// Unique maximum cell, or nullopt on a tie or an empty histogram.
std::optional<int> UniqueMode(const RaceEthHistogram& h);

enum class ModalSource { kBlock, kBlockGroup, kNational };

struct ModalAssignment {
  int cell = 0;
  ModalSource source = ModalSource::kBlock;
};

// The block mode when unique and the block has more than one person, then
// the block-group mode under the same rule, then White alone not Hispanic.
std::map<Geocode, ModalAssignment> AssignModalCells(
    const std::map<Geocode, RaceEthHistogram>& by_block, const GeoUniverse& universe);

// Modal guesser. Frame rows {block, sex, agebin} come from `frame`, the
// guessed race and ethnicity from the block's modal assignment.
std::vector<PersonRecord> MdgBaseline(const std::vector<PersonRecord>& frame,
                                      const GeoUniverse& universe);
// The same guesser built only from published tables.
std::vector<PersonRecord> MdgBaselineFromTables(const TableBundle& bundle,
                                                const GeoUniverse& universe);

// Proportional guesser: every frame row draws independently from its
// block's race x ethnicity distribution.
std::vector<PersonRecord> PrgBaseline(const std::vector<PersonRecord>& frame,
                                      const GeoUniverse& universe, uint64_t seed);
std::vector<PersonRecord> PrgBaselineFromTables(const TableBundle& bundle,
                                                const GeoUniverse& universe, uint64_t seed);

// sum_c p_c^2: accuracy bound of the proportional guesser on a block.
double PrgAccuracyBound(const RaceEthHistogram& h);
// Expected accuracy when every person is guessed from the block with that
// person removed: sum_c n_c (n_c - 1) / (N (N - 1)).
double PrgLeaveOneOutAccuracy(const RaceEthHistogram& h);
// sum_c p_c q_c where q is the distribution with one modal person removed.
double PrgModalRemovedAccuracy(const RaceEthHistogram& h);

// --- Stratified metrics ---

inline constexpr int kNumSizeClasses = 7;
// Block-size class 0..6 for 1-9, 10-49, 50-99, 100-249, 250-499, 500-999,
// 1000+; -1 for an empty block.
int SizeClassOf(int64_t population);
std::string_view SizeClassLabel(int size_class);  // -1 gives "all"

enum class ModalStratum { kAll, kModal, kNonmodal };
enum class SolvarStratum { kAny, kZero, kZeroUnique };
std::string_view ModalStratumName(ModalStratum m);
std::string_view SolvarStratumName(SolvarStratum s);

// Per-person classification fixed by the truth population and the
// undefended solution variability.
struct PersonClass {
  int size_class = -1;
  bool nonmodal = false;
  bool zero_solvar = false;
  bool unique = false;  // alone on {block, sex, agebin} in the truth
};

class Strata {
 public:
  // Modal cells and uniqueness come from `truth`; a person is modal when
  // their cell attains the block maximum. Blocks missing from `solvar`
  // count as nonzero.
  Strata(const std::vector<PersonRecord>& truth, const GeoUniverse& universe,
         const std::vector<SolvarResult>& solvar);

  // Class of the truth person with this identifier, preferring `block`.
  const PersonClass* Find(uint64_t pid, const Geocode& block) const;
  int SizeClassOfBlock(const Geocode& block) const;

 private:
  std::map<std::pair<uint64_t, Geocode>, PersonClass> by_pid_block_;
  std::map<uint64_t, Geocode> first_block_;
  std::map<Geocode, int> size_class_;
};

struct ReidRow {
  std::string data;
  std::string attacker;
  int size_class = -1;
  ModalStratum modal = ModalStratum::kAll;
  SolvarStratum solvar = SolvarStratum::kAny;
  int64_t population = 0;
  int64_t putative = 0;
  int64_t confirmed = 0;

  std::string StratumLabel() const;  // e.g. "all/nonmodal/zero-solvar-unique"
  double PutativeRate() const;
  double ConfirmedRate() const;
  std::optional<double> Precision() const;  // nullopt when putative == 0
};

// Counts attacker rows, putative rows and confirmed rows for every stratum
// (8 size classes x 3 modal x 3 solvar). Rows whose identifier is not in
// the truth only enter the {all, any} strata of their block's size class.
std::vector<ReidRow> ReidMetrics(const std::string& data, const std::string& attacker_name,
                                 const AttackerFile& attacker,
                                 const std::vector<EnhancedRow>& putative,
                                 const std::vector<char>& confirmed, const Strata& strata);

// `data,attacker,stratum,population,putative,confirmed,precision`;
// precision has four decimals and is "NA" when undefined.
void WriteReidReport(const std::vector<ReidRow>& rows, const std::filesystem::path& path);
std::vector<ReidRow> ReadReidReport(const std::filesystem::path& path);
// Long format for rate plots: `data,attacker,size_class,modal,metric,value`.
void WriteFigureData(const std::vector<ReidRow>& rows, const std::filesystem::path& path);
// Selections of the report in the same columns: every size class with
// {all, any} (overall results), and {nonmodal, zero-solvar-unique}.
std::vector<ReidRow> SelectOverall(const std::vector<ReidRow>& rows);
std::vector<ReidRow> SelectNonmodalZeroUnique(const std::vector<ReidRow>& rows);

}  // namespace reconlab

#endif  // RECONLAB_LINKAGE_H_
