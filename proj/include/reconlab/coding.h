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

// Feature codings shared by every module: sex, the 63-category race
// feature, ethnicity, and the age-bin schemas used by block and tract tables.

#ifndef RECONLAB_CODING_H_
#define RECONLAB_CODING_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace reconlab {

inline constexpr int kMaxAge = 115;
inline constexpr int kNumAges = kMaxAge + 1;
inline constexpr int kNumRaceGroups = 6;
inline constexpr int kNumRaces = 63;
inline constexpr int kNumRaceEth = 2 * kNumRaces;

enum class Sex : uint8_t { kMale = 0, kFemale = 1 };
enum class Ethnicity : uint8_t { kNotHispanic = 0, kHispanic = 1 };

char SexCode(Sex s);
Sex ParseSex(std::string_view s);
char EthnicityCode(Ethnicity e);
Ethnicity ParseEthnicity(std::string_view s);

// Race groups in WBAINS order: White, Black, AIAN, Asian, NHPI, Some Other
// Race. A race value is a nonempty subset, stored as a 6-bit mask.
using RaceMask = uint8_t;
inline constexpr RaceMask kWhiteAlone = 1;
inline constexpr std::string_view kRaceGroupLetters = "WBAINS";

constexpr RaceMask GroupBit(int group) { return static_cast<RaceMask>(1u << group); }
constexpr int NumRacesIn(RaceMask m) { return __builtin_popcount(m); }
constexpr bool IsValidRace(RaceMask m) { return m >= 1 && m <= 63; }

// Index 0..62 in table order: one-race categories first, then each
// combination size in lexicographic group order.
int RaceIndex(RaceMask m);
RaceMask RaceFromIndex(int index);

// 6-character flag string, e.g. "W.....", "WB....".
std::string RaceFlags(RaceMask m);
RaceMask ParseRaceFlags(std::string_view flags);

// race x ethnicity cell in 0..125; cell 0 is White alone, not Hispanic.
int RaceEthCell(RaceMask race, Ethnicity eth);
RaceMask RaceOfCell(int cell);
Ethnicity EthOfCell(int cell);
std::string RaceEthLabel(int cell);  // e.g. "W.....N"

struct AgeRange {
  int lo = 0;
  int hi = kMaxAge;
  bool Contains(int age) const { return age >= lo && age <= hi; }
  bool Contains(const AgeRange& r) const { return r.lo >= lo && r.hi <= hi; }
  bool Disjoint(const AgeRange& r) const { return r.hi < lo || r.lo > hi; }
  bool operator==(const AgeRange&) const = default;
};

enum class AgeSchemaName { kBin23, kBin38, kTract103, kSingle0To19 };

// Ordered bins. Every schema except kSingle0To19 partitions 0..115.
class AgeSchema {
 public:
  static const AgeSchema& Get(AgeSchemaName name);

  AgeSchemaName name() const { return name_; }
  std::string_view label() const;
  const std::vector<AgeRange>& bins() const { return bins_; }
  size_t size() const { return bins_.size(); }
  // Bin index of an age, or -1 when the schema does not cover it.
  int BinOf(int age) const { return age >= 0 && age <= kMaxAge ? lookup_[age] : -1; }

 private:
  AgeSchema(AgeSchemaName name, std::vector<AgeRange> bins);
  AgeSchemaName name_;
  std::vector<AgeRange> bins_;
  std::array<int, kNumAges> lookup_{};
};

inline int AgeBin38(int age) { return AgeSchema::Get(AgeSchemaName::kBin38).BinOf(age); }
inline const AgeRange& Bin38Range(int bin) {
  return AgeSchema::Get(AgeSchemaName::kBin38).bins()[bin];
}
// "25-29", "7-7", "85-115".
std::string AgeRangeLabel(const AgeRange& r);

}  // namespace reconlab

#endif  // RECONLAB_CODING_H_
