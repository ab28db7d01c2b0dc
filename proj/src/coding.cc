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

#include "reconlab/coding.h"

#include <stdexcept>

namespace reconlab {
namespace {

struct RaceOrder {
  std::array<RaceMask, kNumRaces> by_index{};
  std::array<int, 64> index_of{};

  RaceOrder() {
    index_of.fill(-1);
    int next = 0;
    // Combinations of k groups, lexicographic in group position.
    for (int k = 1; k <= kNumRaceGroups; ++k) {
      std::vector<int> pick(k);
      for (int i = 0; i < k; ++i) pick[i] = i;
      while (true) {
        RaceMask m = 0;
        for (int g : pick) m |= GroupBit(g);
        by_index[next] = m;
        index_of[m] = next;
        ++next;
        int i = k - 1;
        while (i >= 0 && pick[i] == kNumRaceGroups - k + i) --i;
        if (i < 0) break;
        ++pick[i];
        for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
      }
    }
  }
};

const RaceOrder& Order() {
  static const RaceOrder order;
  return order;
}

std::vector<AgeRange> Singles(int lo, int hi) {
  std::vector<AgeRange> out;
  for (int a = lo; a <= hi; ++a) out.push_back({a, a});
  return out;
}

std::vector<AgeRange> Bins23() {
  return {{0, 4},   {5, 9},   {10, 14}, {15, 17}, {18, 19}, {20, 20}, {21, 21}, {22, 24},
          {25, 29}, {30, 34}, {35, 39}, {40, 44}, {45, 49}, {50, 54}, {55, 59}, {60, 61},
          {62, 64}, {65, 66}, {67, 69}, {70, 74}, {75, 79}, {80, 84}, {85, kMaxAge}};
}

std::vector<AgeRange> Bins38() {
  std::vector<AgeRange> out = Singles(0, 21);
  const std::vector<AgeRange> tail = {{22, 24}, {25, 29}, {30, 34}, {35, 39}, {40, 44}, {45, 49},
                                      {50, 54}, {55, 59}, {60, 61}, {62, 64}, {65, 66}, {67, 69},
                                      {70, 74}, {75, 79}, {80, 84}, {85, kMaxAge}};
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

std::vector<AgeRange> Tract103() {
  std::vector<AgeRange> out = Singles(0, 99);
  out.push_back({100, 104});
  out.push_back({105, 109});
  out.push_back({110, kMaxAge});
  return out;
}

}  // namespace

char SexCode(Sex s) { return s == Sex::kMale ? 'M' : 'F'; }

Sex ParseSex(std::string_view s) {
  if (s == "M") return Sex::kMale;
  if (s == "F") return Sex::kFemale;
  throw std::invalid_argument("bad sex code '" + std::string(s) + "'");
}

char EthnicityCode(Ethnicity e) { return e == Ethnicity::kHispanic ? 'H' : 'N'; }

Ethnicity ParseEthnicity(std::string_view s) {
  if (s == "H") return Ethnicity::kHispanic;
  if (s == "N") return Ethnicity::kNotHispanic;
  throw std::invalid_argument("bad ethnicity code '" + std::string(s) + "'");
}

int RaceIndex(RaceMask m) {
  if (!IsValidRace(m)) throw std::invalid_argument("race mask out of range");
  return Order().index_of[m];
}

RaceMask RaceFromIndex(int index) {
  if (index < 0 || index >= kNumRaces) throw std::invalid_argument("race index out of range");
  return Order().by_index[index];
}

std::string RaceFlags(RaceMask m) {
  std::string s(kNumRaceGroups, '.');
  for (int g = 0; g < kNumRaceGroups; ++g) {
    if (m & GroupBit(g)) s[g] = kRaceGroupLetters[g];
  }
  return s;
}

RaceMask ParseRaceFlags(std::string_view flags) {
  if (flags.size() != kNumRaceGroups) {
    throw std::invalid_argument("race flags must have 6 characters: '" + std::string(flags) + "'");
  }
  RaceMask m = 0;
  for (int g = 0; g < kNumRaceGroups; ++g) {
    if (flags[g] == kRaceGroupLetters[g]) {
      m |= GroupBit(g);
    } else if (flags[g] != '.') {
      throw std::invalid_argument("bad race flags '" + std::string(flags) + "'");
    }
  }
  if (!IsValidRace(m)) throw std::invalid_argument("race must include at least one group");
  return m;
}

int RaceEthCell(RaceMask race, Ethnicity eth) {
  return static_cast<int>(eth) * kNumRaces + RaceIndex(race);
}

RaceMask RaceOfCell(int cell) { return RaceFromIndex(cell % kNumRaces); }

Ethnicity EthOfCell(int cell) {
  return cell >= kNumRaces ? Ethnicity::kHispanic : Ethnicity::kNotHispanic;
}

std::string RaceEthLabel(int cell) {
  return RaceFlags(RaceOfCell(cell)) + EthnicityCode(EthOfCell(cell));
}

AgeSchema::AgeSchema(AgeSchemaName name, std::vector<AgeRange> bins)
    : name_(name), bins_(std::move(bins)) {
  lookup_.fill(-1);
  for (size_t i = 0; i < bins_.size(); ++i) {
    for (int a = bins_[i].lo; a <= bins_[i].hi; ++a) lookup_[a] = static_cast<int>(i);
  }
}

const AgeSchema& AgeSchema::Get(AgeSchemaName name) {
  static const AgeSchema b23(AgeSchemaName::kBin23, Bins23());
  static const AgeSchema b38(AgeSchemaName::kBin38, Bins38());
  static const AgeSchema t103(AgeSchemaName::kTract103, Tract103());
  static const AgeSchema s20(AgeSchemaName::kSingle0To19, Singles(0, 19));
  switch (name) {
    case AgeSchemaName::kBin23:
      return b23;
    case AgeSchemaName::kBin38:
      return b38;
    case AgeSchemaName::kTract103:
      return t103;
    case AgeSchemaName::kSingle0To19:
      return s20;
  }
  throw std::logic_error("unknown age schema");
}

std::string_view AgeSchema::label() const {
  switch (name_) {
    case AgeSchemaName::kBin23:
      return "BIN23";
    case AgeSchemaName::kBin38:
      return "BIN38";
    case AgeSchemaName::kTract103:
      return "TRACT103";
    case AgeSchemaName::kSingle0To19:
      return "SINGLE_0_19";
  }
  return "?";
}

std::string AgeRangeLabel(const AgeRange& r) {
  return std::to_string(r.lo) + "-" + std::to_string(r.hi);
}

}  // namespace reconlab
