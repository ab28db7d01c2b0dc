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

#include "reconlab/population.h"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "reconlab/csv.h"
#include "reconlab/rng.h"

namespace reconlab {
namespace {

void CheckWeights(const std::vector<double>& w, const char* what, bool must_sum_to_one) {
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw std::invalid_argument(std::string(what) + ": negative weight");
    total += x;
  }
  if (total <= 0.0) throw std::invalid_argument(std::string(what) + ": weights sum to zero");
  if (must_sum_to_one && std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument(std::string(what) + ": mixture must sum to 1");
  }
}

void CheckRate(double r, const char* what) {
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument(std::string(what) + " not in [0,1]");
}

int ShiftAge(int age, int max_shift, Rng& rng) {
  const int bin = AgeBin38(age);
  std::vector<int> candidates;
  for (int a = std::max(0, age - max_shift); a <= std::min(kMaxAge, age + max_shift); ++a) {
    if (AgeBin38(a) != bin) candidates.push_back(a);
  }
  if (candidates.empty()) {
    // Wide bins (85+): fall back to the adjacent bin.
    const int other = bin > 0 ? bin - 1 : bin + 1;
    const AgeRange r = Bin38Range(other);
    for (int a = r.lo; a <= r.hi; ++a) candidates.push_back(a);
  }
  return candidates[rng.UniformInt(candidates.size())];
}

}  // namespace

PersonRecord PersonRecord::Make(uint64_t pid, uint64_t hid, const Geocode& block, Sex sex, int age,
                                RaceMask race, Ethnicity eth) {
  if (age < 0 || age > kMaxAge) throw std::invalid_argument("age out of range");
  if (!IsValidRace(race)) throw std::invalid_argument("race out of range");
  PersonRecord r;
  r.pid = pid;
  r.hid = hid;
  r.block = block;
  r.sex = sex;
  r.age = static_cast<int16_t>(age);
  r.agebin = static_cast<uint8_t>(AgeBin38(age));
  r.race = race;
  r.eth = eth;
  return r;
}

void PopulationSpec::Validate() const {
  CheckWeights(household_sizes, "household size distribution", false);
  CheckWeights(mixture, "race x ethnicity mixture", true);
  if (mixture.size() != kNumRaceEth) throw std::invalid_argument("mixture must have 126 cells");
  for (const auto& [tract, m] : tract_mixture) {
    if (m.size() != kNumRaceEth) throw std::invalid_argument("mixture must have 126 cells");
    CheckWeights(m, "tract mixture", true);
  }
  if (age_weights.size() != kNumAges) throw std::invalid_argument("age weights must have 116 cells");
  CheckWeights(age_weights, "age distribution", false);
  CheckRate(male_share, "male share");
  CheckRate(missing_pid_rate, "missing pid rate");
  CheckRate(duplicate_pid_rate, "duplicate pid rate");
}

std::vector<double> MixtureFromShares(const std::vector<std::pair<int, double>>& shares) {
  std::vector<double> m(kNumRaceEth, 0.0);
  for (const auto& [cell, share] : shares) {
    if (cell < 0 || cell >= kNumRaceEth) throw std::invalid_argument("mixture cell out of range");
    m[cell] += share;
  }
  return m;
}

std::vector<double> DefaultMixture() {
  using E = Ethnicity;
  auto c = [](const char* flags, E e) { return RaceEthCell(ParseRaceFlags(flags), e); };
  return MixtureFromShares({{c("W.....", E::kNotHispanic), 0.82},
                            {c(".B....", E::kNotHispanic), 0.06},
                            {c("...I..", E::kNotHispanic), 0.03},
                            {c("W.....", E::kHispanic), 0.04},
                            {c(".....S", E::kHispanic), 0.02},
                            {c("..A...", E::kNotHispanic), 0.01},
                            {c("WB....", E::kNotHispanic), 0.008},
                            {c("W.A...", E::kNotHispanic), 0.005},
                            {c("....N.", E::kNotHispanic), 0.004},
                            {c("W..I..", E::kNotHispanic), 0.003}});
}

std::vector<double> DefaultAgeWeights() {
  std::vector<double> w(kNumAges, 0.0);
  for (int a = 0; a <= kMaxAge; ++a) {
    if (a < 65) {
      w[a] = 1.0;
    } else if (a <= 104) {
      w[a] = std::max(0.02, 1.0 - (a - 65) / 40.0);
    } else {
      w[a] = 0.001;
    }
  }
  return w;
}

std::vector<PersonRecord> GeneratePopulation(const PopulationSpec& spec) {
  spec.Validate();
  Rng rng(spec.seed);
  std::vector<PersonRecord> out;
  out.reserve(static_cast<size_t>(spec.universe.TotalPopulation()));
  uint64_t next_pid = 1;
  uint64_t next_hid = 1;
  std::vector<double> sizes(spec.household_sizes.size());
  for (const auto& entry : spec.universe.blocks()) {
    const auto tm = spec.tract_mixture.find(entry.geocode.tract_code());
    const std::vector<double>& mixture =
        tm == spec.tract_mixture.end() ? spec.mixture : tm->second;
    const size_t block_start = out.size();
    int64_t remaining = entry.population;
    while (remaining > 0) {
      bool any = false;
      for (size_t i = 0; i < sizes.size(); ++i) {
        sizes[i] = static_cast<int64_t>(i + 1) <= remaining ? spec.household_sizes[i] : 0.0;
        any = any || sizes[i] > 0.0;
      }
      if (!any) {
        throw GenerationError("cannot pack households into block " + entry.geocode.str() +
                              ": " + std::to_string(remaining) + " persons left over");
      }
      const int64_t size = static_cast<int64_t>(rng.Categorical(sizes)) + 1;
      const uint64_t hid = next_hid++;
      for (int64_t k = 0; k < size; ++k) {
        const Sex sex = rng.Bernoulli(spec.male_share) ? Sex::kMale : Sex::kFemale;
        const int age = static_cast<int>(rng.Categorical(spec.age_weights));
        const int cell = static_cast<int>(rng.Categorical(mixture));
        uint64_t pid = next_pid++;
        if (rng.Bernoulli(spec.missing_pid_rate)) {
          pid = 0;
        } else if (rng.Bernoulli(spec.duplicate_pid_rate) && out.size() > block_start) {
          const auto& prior = out[block_start + rng.UniformInt(out.size() - block_start)];
          if (prior.pid != 0) pid = prior.pid;
        }
        out.push_back(PersonRecord::Make(pid, hid, entry.geocode, sex, age, RaceOfCell(cell),
                                         EthOfCell(cell)));
      }
      remaining -= size;
    }
  }
  return out;
}

std::vector<PersonRecord> DataDefinedFilter(const std::vector<PersonRecord>& pop, uint64_t seed) {
  std::map<std::pair<Geocode, uint64_t>, std::vector<size_t>> groups;
  for (size_t i = 0; i < pop.size(); ++i) {
    if (pop[i].pid != 0) groups[{pop[i].block, pop[i].pid}].push_back(i);
  }
  std::vector<char> keep(pop.size(), 0);
  for (const auto& [key, idx] : groups) {
    if (idx.size() == 1) {
      keep[idx[0]] = 1;
      continue;
    }
    Rng rng(DeriveSeed(DeriveSeed(seed, key.second), HashLabel(key.first.str())));
    keep[idx[rng.UniformInt(idx.size())]] = 1;
  }
  std::vector<PersonRecord> out;
  out.reserve(pop.size());
  for (size_t i = 0; i < pop.size(); ++i) {
    if (keep[i]) out.push_back(pop[i]);
  }
  return out;
}

bool Degradation::perfect() const {
  return coverage == 1.0 && geocode_error == 0.0 && sex_error == 0.0 && age_error == 0.0 &&
         spurious == 0.0;
}

void Degradation::Validate() const {
  CheckRate(coverage, "coverage");
  CheckRate(geocode_error, "geocode error rate");
  CheckRate(sex_error, "sex error rate");
  CheckRate(age_error, "age error rate");
  if (!(spurious >= 0.0 && spurious < 1.0)) throw std::invalid_argument("spurious rate not in [0,1)");
  if (age_error_max_shift < 1) throw std::invalid_argument("age error shift must be >= 1");
}

Degradation PerfectDegradation() { return Degradation{}; }

Degradation CommercialDegradation() {
  // (1 - e)^4 = 0.371 over spurious, geocode, sex and age-bin errors.
  const double e = 1.0 - std::pow(0.371, 0.25);
  Degradation d;
  d.coverage = 1.0;
  d.geocode_error = e;
  d.sex_error = e;
  d.age_error = e;
  d.spurious = e;
  return d;
}

AttackerFile MakeAttackerFile(const std::vector<PersonRecord>& pop, const GeoUniverse& universe,
                              const Degradation& deg, uint64_t seed) {
  deg.Validate();
  Rng rng(seed);
  AttackerFile file;
  file.degradation = deg;
  file.provenance = deg.perfect() ? "perfect" : "degraded";
  uint64_t max_pid = 0;
  for (const auto& p : pop) max_pid = std::max(max_pid, p.pid);

  for (const auto& p : pop) {
    if (p.pid == 0) continue;
    if (!rng.Bernoulli(deg.coverage)) continue;
    AttackerRow row{p.pid, p.block, p.sex, static_cast<int16_t>(p.has_age() ? p.age : Bin38Range(p.agebin).lo)};
    if (rng.Bernoulli(deg.geocode_error) && universe.size() > 1) {
      const int64_t bi = universe.IndexOf(p.block);
      std::vector<size_t> others;
      if (bi >= 0) {
        for (size_t j : universe.BlocksInTract(p.block.tract_code())) {
          if (static_cast<int64_t>(j) != bi) others.push_back(j);
        }
      }
      if (others.empty()) {
        for (size_t j = 0; j < universe.size(); ++j) {
          if (static_cast<int64_t>(j) != bi) others.push_back(j);
        }
      }
      row.block = universe.block(others[rng.UniformInt(others.size())]);
    }
    if (rng.Bernoulli(deg.sex_error)) {
      row.sex = row.sex == Sex::kMale ? Sex::kFemale : Sex::kMale;
    }
    if (rng.Bernoulli(deg.age_error)) {
      row.age = static_cast<int16_t>(ShiftAge(row.age, deg.age_error_max_shift, rng));
    }
    file.rows.push_back(row);
  }

  if (deg.spurious > 0.0 && universe.size() > 0) {
    const auto n = static_cast<size_t>(
        std::llround(deg.spurious / (1.0 - deg.spurious) * static_cast<double>(file.rows.size())));
    for (size_t i = 0; i < n; ++i) {
      AttackerRow row;
      row.pid = max_pid + 1 + i;
      row.block = universe.block(rng.UniformInt(universe.size()));
      row.sex = rng.Bernoulli(0.5) ? Sex::kMale : Sex::kFemale;
      row.age = static_cast<int16_t>(rng.UniformInt(91));
      file.rows.push_back(row);
    }
  }
  if (!deg.perfect()) {
    rng.Shuffle(file.rows);
    std::stable_sort(file.rows.begin(), file.rows.end(),
                     [](const AttackerRow& a, const AttackerRow& b) { return a.block < b.block; });
  }
  return file;
}

namespace {

std::string AgeField(const PersonRecord& r) {
  return r.has_age() ? std::to_string(r.age) : AgeRangeLabel(Bin38Range(r.agebin));
}

std::string IdField(uint64_t id) { return id == 0 ? std::string() : std::to_string(id); }

uint64_t ParseId(const std::string& s) {
  return s.empty() ? 0 : static_cast<uint64_t>(ParseInt(s));
}

}  // namespace

void WriteMicrodata(const std::vector<PersonRecord>& records, const std::filesystem::path& path) {
  CsvWriter w(path);
  w.Row({"pid", "hid", "block", "sex", "age", "race", "ethnicity"});
  for (const auto& r : records) {
    w.Row({IdField(r.pid), IdField(r.hid), r.block.str(), std::string(1, SexCode(r.sex)),
           AgeField(r), RaceFlags(r.race), std::string(1, EthnicityCode(r.eth))});
  }
}

std::vector<PersonRecord> ReadMicrodata(const std::filesystem::path& path) {
  const CsvTable t = ReadCsv(path);
  const size_t c_pid = t.Column("pid"), c_hid = t.Column("hid"), c_block = t.Column("block"),
               c_sex = t.Column("sex"), c_age = t.Column("age"), c_race = t.Column("race"),
               c_eth = t.Column("ethnicity");
  std::vector<PersonRecord> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    PersonRecord r;
    r.pid = ParseId(row[c_pid]);
    r.hid = ParseId(row[c_hid]);
    r.block = ParseGeocode(row[c_block]);
    r.sex = ParseSex(row[c_sex]);
    r.race = ParseRaceFlags(row[c_race]);
    r.eth = ParseEthnicity(row[c_eth]);
    const std::string& age = row[c_age];
    const size_t dash = age.find('-');
    if (dash == std::string::npos) {
      const int64_t a = ParseInt(age);
      if (a < 0 || a > kMaxAge) throw IoError("age out of range: " + age);
      r.age = static_cast<int16_t>(a);
      r.agebin = static_cast<uint8_t>(AgeBin38(static_cast<int>(a)));
    } else {
      const AgeRange range{static_cast<int>(ParseInt(age.substr(0, dash))),
                           static_cast<int>(ParseInt(age.substr(dash + 1)))};
      const int bin = AgeBin38(range.lo);
      if (bin < 0 || !(Bin38Range(bin) == range)) throw IoError("not a BIN38 age bin: " + age);
      r.age = -1;
      r.agebin = static_cast<uint8_t>(bin);
    }
    out.push_back(r);
  }
  return out;
}

void WriteAttackerFile(const AttackerFile& file, const std::filesystem::path& path) {
  CsvWriter w(path);
  w.Row({"pid", "block", "sex", "age"});
  for (const auto& r : file.rows) {
    w.Row({std::to_string(r.pid), r.block.str(), std::string(1, SexCode(r.sex)),
           std::to_string(r.age)});
  }
}

AttackerFile ReadAttackerFile(const std::filesystem::path& path) {
  const CsvTable t = ReadCsv(path);
  const size_t c_pid = t.Column("pid"), c_block = t.Column("block"), c_sex = t.Column("sex"),
               c_age = t.Column("age");
  AttackerFile f;
  f.provenance = "file";
  for (const auto& row : t.rows) {
    AttackerRow r;
    r.pid = static_cast<uint64_t>(ParseInt(row[c_pid]));
    r.block = ParseGeocode(row[c_block]);
    r.sex = ParseSex(row[c_sex]);
    r.age = static_cast<int16_t>(ParseInt(row[c_age]));
    f.rows.push_back(r);
  }
  return f;
}

void SortRecords(std::vector<PersonRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const PersonRecord& a, const PersonRecord& b) {
    return std::make_tuple(a.block, a.sex, a.agebin, a.age, a.race_eth(), a.pid) <
           std::make_tuple(b.block, b.sex, b.agebin, b.age, b.race_eth(), b.pid);
  });
}

}  // namespace reconlab
