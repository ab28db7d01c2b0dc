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

// Counting-query schemas for the 34 person tables: 18 block-level tables
// (P1, P6-P12, P12A-I, P14) and 16 tract-level tables (PCT12, PCT12A-O).
//
// Each cell is a conjunction of terms over (sex, age, race, ethnicity).
// Subtotal cells list the contiguous range of leaf cells they sum. The whole
// schema round-trips through a line-oriented text form:
//
//   table=P12A; level=block; universe=race==W_alone; cell[3]=sex==M && age in 15..17
//   table=P12A; level=block; universe=race==W_alone; cell[46]=sex==M; sum=0..22

#ifndef RECONLAB_SCHEMA_H_
#define RECONLAB_SCHEMA_H_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "reconlab/coding.h"

namespace reconlab {

class UnknownTable : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SchemaParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class GeoLevel { kBlock, kTract };
std::string_view GeoLevelName(GeoLevel level);

enum class Tri { kNo, kYes, kPartial };

struct Term {
  enum class Kind { kSexEq, kAgeIn, kEthEq, kRaceEq, kRaceHas, kRacesEq, kRacesGe };
  Kind kind;
  int a = 0;
  int b = 0;

  bool Holds(Sex sex, int age, RaceMask race, Ethnicity eth) const;
  // Evaluation against a whole age range.
  Tri Holds(Sex sex, const AgeRange& ages, RaceMask race, Ethnicity eth) const;
  std::string ToString() const;
  bool operator==(const Term&) const = default;
};

// Conjunction of terms; empty means "all".
struct Predicate {
  std::vector<Term> terms;

  bool Holds(Sex sex, int age, RaceMask race, Ethnicity eth) const;
  Tri Holds(Sex sex, const AgeRange& ages, RaceMask race, Ethnicity eth) const;
  Predicate And(const Predicate& other) const;
  std::string ToString() const;
  bool operator==(const Predicate&) const = default;

  static Predicate Parse(std::string_view text);
};

Predicate SexIs(Sex s);
Predicate AgeIn(int lo, int hi);
Predicate EthIs(Ethnicity e);
Predicate RaceIs(RaceMask m);
Predicate RaceHas(int group);
Predicate RacesEq(int k);
Predicate RacesGe(int k);

struct CellDef {
  // Cell-only predicate; the effective predicate is universe AND pred.
  Predicate pred;
  // Leaf range [sum_lo, sum_hi] for subtotal cells; leaves have sum_lo < 0.
  int sum_lo = -1;
  int sum_hi = -1;
  bool is_subtotal() const { return sum_lo >= 0; }
};

struct TableDef {
  std::string name;
  GeoLevel level = GeoLevel::kBlock;
  Predicate universe;
  std::vector<CellDef> cells;
  // Cell holding the universe count, or -1 (universe count is then P1).
  int total_cell = -1;
  // Leaf cells are pairwise disjoint (false for the race tallies of P6/P7).
  bool disjoint_leaves = true;

  Predicate Effective(size_t cell) const { return universe.And(cells[cell].pred); }
};

class Schema {
 public:
  // The built-in 34-table schema.
  static const Schema& Default();
  static Schema Parse(std::string_view dsl);

  const std::string& version() const { return version_; }
  const std::vector<TableDef>& tables() const { return tables_; }
  const TableDef& table(size_t i) const { return tables_[i]; }
  // Throws UnknownTable.
  size_t IndexOf(std::string_view name) const;
  std::optional<size_t> Find(std::string_view name) const;
  std::vector<size_t> TablesAt(GeoLevel level) const;
  std::string ToDsl() const;

  Schema(std::string version, std::vector<TableDef> tables);

 private:
  std::string version_;
  std::vector<TableDef> tables_;
  std::map<std::string, size_t, std::less<>> index_;
};

inline constexpr std::string_view kSchemaVersion = "reconlab-sf1-v1";

// Table names of Panel A (block) and Panel B (tract).
std::vector<std::string> BlockTableNames();
std::vector<std::string> TractTableNames();

struct CellRef {
  uint16_t table;
  uint16_t cell;
  bool operator==(const CellRef&) const = default;
};

// Grid over (sex, age bin, race, ethnicity) with the list of cells of a
// geography level that cover each grid point. Every cell predicate must be
// constant on each age bin of the grid.
class CellIndex {
 public:
  CellIndex(const Schema& schema, GeoLevel level, std::vector<AgeRange> age_grid);

  size_t num_ages() const { return age_grid_.size(); }
  size_t num_keys() const { return 2 * age_grid_.size() * kNumRaceEth; }
  const std::vector<AgeRange>& age_grid() const { return age_grid_; }

  size_t Key(Sex sex, size_t age_idx, int race_eth) const {
    return (static_cast<size_t>(sex) * age_grid_.size() + age_idx) * kNumRaceEth +
           static_cast<size_t>(race_eth);
  }
  Sex SexOf(size_t key) const { return key / (age_grid_.size() * kNumRaceEth) ? Sex::kFemale : Sex::kMale; }
  size_t AgeOf(size_t key) const { return (key / kNumRaceEth) % age_grid_.size(); }
  int RaceEthOf(size_t key) const { return static_cast<int>(key % kNumRaceEth); }

  const std::vector<CellRef>& CellsOf(size_t key) const { return cells_[key]; }

 private:
  std::vector<AgeRange> age_grid_;
  std::vector<std::vector<CellRef>> cells_;
};

// Shared indexes for the default schema.
const CellIndex& SingleYearBlockIndex();   // ages 0..115, block tables
const CellIndex& SingleYearTractIndex();   // ages 0..115, tract tables
const CellIndex& Bin38BlockIndex();        // BIN38 grid, block tables
const CellIndex& Tract103BlockIndex();     // TRACT103 grid, block tables
const CellIndex& Tract103TractIndex();     // TRACT103 grid, tract tables

}  // namespace reconlab

#endif  // RECONLAB_SCHEMA_H_
