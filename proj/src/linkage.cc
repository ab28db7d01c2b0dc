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

#include "reconlab/linkage.h"

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

#include "reconlab/csv.h"
#include "reconlab/rng.h"

namespace reconlab {
namespace {

using Bucket = std::map<MatchKey, std::deque<size_t>>;

MatchKey KeyOf(const Geocode& block, Sex sex, AgeSelector sel, int age_value, int race_eth) {
  return MatchKey{block, sex, sel, static_cast<int16_t>(age_value),
                  static_cast<int16_t>(race_eth)};
}

// One matching pass. `lkey`/`rkey` return nullopt for records that cannot
// take part. R rows are visited in ascending order and take the earliest
// unused L record of their bucket.
template <typename LKey, typename RKey>
std::vector<std::pair<size_t, size_t>> MatchPass(size_t nl, size_t nr, std::vector<char>& l_used,
                                                 std::vector<char>& r_used, LKey lkey, RKey rkey) {
  Bucket buckets;
  for (size_t i = 0; i < nl; ++i) {
    if (l_used[i]) continue;
    if (auto k = lkey(i)) buckets[*k].push_back(i);
  }
  std::vector<std::pair<size_t, size_t>> out;
  for (size_t j = 0; j < nr; ++j) {
    if (r_used[j]) continue;
    auto k = rkey(j);
    if (!k) continue;
    auto it = buckets.find(*k);
    if (it == buckets.end() || it->second.empty()) continue;
    const size_t i = it->second.front();
    it->second.pop_front();
    l_used[i] = 1;
    r_used[j] = 1;
    out.emplace_back(i, j);
  }
  return out;
}

std::optional<MatchKey> ExactKey(const PersonRecord& p, bool with_race) {
  if (!p.has_age()) return std::nullopt;
  return KeyOf(p.block, p.sex, AgeSelector::kExactAge, p.age, with_race ? p.race_eth() : -1);
}

MatchKey BinKey(const PersonRecord& p, bool with_race) {
  return KeyOf(p.block, p.sex, AgeSelector::kAgebin38, p.agebin, with_race ? p.race_eth() : -1);
}

int ClampedBin(int age) { return AgeBin38(std::clamp(age, 0, kMaxAge)); }

RaceEthHistogram Zero() {
  RaceEthHistogram h;
  h.fill(0);
  return h;
}

int64_t Total(const RaceEthHistogram& h) {
  int64_t n = 0;
  for (int64_t c : h) n += c;
  return n;
}

std::vector<PersonRecord> FrameFromTables(const TableBundle& bundle) {
  std::vector<PersonRecord> out;
  for (const FrameRow& f : ExpandSexAgebinFrame(bundle)) {
    PersonRecord r;
    r.block = f.block;
    r.sex = f.sex;
    r.agebin = f.agebin;
    out.push_back(r);
  }
  return out;
}

std::vector<PersonRecord> GuessModal(std::vector<PersonRecord> frame,
                                     const std::map<Geocode, RaceEthHistogram>& by_block,
                                     const GeoUniverse& universe) {
  const auto modal = AssignModalCells(by_block, universe);
  const int national = RaceEthCell(kWhiteAlone, Ethnicity::kNotHispanic);
  for (PersonRecord& r : frame) {
    auto it = modal.find(r.block);
    const int cell = it == modal.end() ? national : it->second.cell;
    r.race = RaceOfCell(cell);
    r.eth = EthOfCell(cell);
  }
  return frame;
}

std::vector<PersonRecord> GuessProportional(std::vector<PersonRecord> frame,
                                            const std::map<Geocode, RaceEthHistogram>& by_block,
                                            const GeoUniverse& universe, uint64_t seed) {
  // Each block draws from its own stream so results do not depend on the
  // order of frame rows across blocks.
  std::map<Geocode, Rng> streams;
  for (PersonRecord& r : frame) {
    auto hit = by_block.find(r.block);
    if (hit == by_block.end() || Total(hit->second) == 0) {
      r.race = kWhiteAlone;
      r.eth = Ethnicity::kNotHispanic;
      continue;
    }
    auto sit = streams.find(r.block);
    if (sit == streams.end()) {
      const int64_t idx = universe.IndexOf(r.block);
      const uint64_t label = idx >= 0 ? static_cast<uint64_t>(idx) : HashLabel(r.block.str());
      sit = streams.emplace(r.block, Rng(DeriveSeed(seed, label))).first;
    }
    std::array<double, kNumRaceEth> w;
    for (int c = 0; c < kNumRaceEth; ++c) w[c] = static_cast<double>(hit->second[c]);
    const int cell = static_cast<int>(sit->second.Categorical(w));
    r.race = RaceOfCell(cell);
    r.eth = EthOfCell(cell);
  }
  return frame;
}

std::string FormatFixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

constexpr int kStrataPerSize = 9;

size_t StratumIndex(int size_class, ModalStratum m, SolvarStratum s) {
  return static_cast<size_t>(size_class + 1) * kStrataPerSize + static_cast<size_t>(m) * 3 +
         static_cast<size_t>(s);
}

}  // namespace

AgreementResult AgreementMatch(const std::vector<PersonRecord>& l,
                               const std::vector<PersonRecord>& r) {
  std::vector<char> lu(l.size(), 0), ru(r.size(), 0);
  AgreementResult out;
  out.exact_age = MatchPass(
      l.size(), r.size(), lu, ru, [&](size_t i) { return ExactKey(l[i], true); },
      [&](size_t j) { return ExactKey(r[j], true); });
  out.agebin = MatchPass(
      l.size(), r.size(), lu, ru, [&](size_t i) { return std::optional(BinKey(l[i], true)); },
      [&](size_t j) { return std::optional(BinKey(r[j], true)); });
  for (size_t i = 0; i < l.size(); ++i)
    if (!lu[i]) out.unmatched_l.push_back(i);
  for (size_t j = 0; j < r.size(); ++j)
    if (!ru[j]) out.unmatched_r.push_back(j);
  return out;
}

std::vector<EnhancedRow> PutativeMatch(const std::vector<PersonRecord>& l,
                                       const AttackerFile& attacker) {
  const auto& rows = attacker.rows;
  std::vector<char> lu(l.size(), 0), ru(rows.size(), 0);
  auto row_bin = [&](size_t j) {
    const AttackerRow& a = rows[j];
    return KeyOf(a.block, a.sex, AgeSelector::kAgebin38, ClampedBin(a.age), -1);
  };
  // Which rows link is fixed by the {block, sex, agebin} frame alone: the
  // earliest rows of each group, up to the number of records there. The
  // exact-age pass then only decides which record each of them receives.
  std::map<MatchKey, int64_t> room;
  for (const PersonRecord& p : l) ++room[BinKey(p, false)];
  for (size_t j = 0; j < rows.size(); ++j) {
    auto it = room.find(row_bin(j));
    if (it == room.end() || it->second == 0) {
      ru[j] = 1;
    } else {
      --it->second;
    }
  }
  auto pass1 = MatchPass(
      l.size(), rows.size(), lu, ru, [&](size_t i) { return ExactKey(l[i], false); },
      [&](size_t j) {
        const AttackerRow& a = rows[j];
        return std::optional(KeyOf(a.block, a.sex, AgeSelector::kExactAge, a.age, -1));
      });
  auto pass2 = MatchPass(
      l.size(), rows.size(), lu, ru, [&](size_t i) { return std::optional(BinKey(l[i], false)); },
      [&](size_t j) { return std::optional(row_bin(j)); });
  std::vector<EnhancedRow> out;
  out.reserve(pass1.size() + pass2.size());
  auto add = [&](const std::vector<std::pair<size_t, size_t>>& pairs, int pass) {
    for (auto [i, j] : pairs) {
      EnhancedRow e;
      e.attacker_index = j;
      e.source_index = i;
      e.pass = pass;
      e.row = rows[j];
      e.race = l[i].race;
      e.eth = l[i].eth;
      out.push_back(e);
    }
  };
  add(pass1, 1);
  add(pass2, 2);
  std::sort(out.begin(), out.end(), [](const EnhancedRow& a, const EnhancedRow& b) {
    return a.attacker_index < b.attacker_index;
  });
  return out;
}

std::vector<char> ConfirmMatch(const std::vector<EnhancedRow>& rows,
                               const std::vector<PersonRecord>& truth) {
  std::map<std::pair<uint64_t, Geocode>, std::vector<size_t>> index;
  for (size_t i = 0; i < truth.size(); ++i) {
    if (truth[i].pid == 0) continue;
    index[{truth[i].pid, truth[i].block}].push_back(i);
  }
  std::vector<char> confirmed(rows.size(), 0);
  std::vector<char> used(truth.size(), 0);
  for (int pass = 1; pass <= 2; ++pass) {
    for (size_t k = 0; k < rows.size(); ++k) {
      if (confirmed[k]) continue;
      const EnhancedRow& e = rows[k];
      auto it = index.find({e.row.pid, e.row.block});
      if (it == index.end()) continue;
      for (size_t t : it->second) {
        const PersonRecord& p = truth[t];
        if (used[t] || p.sex != e.row.sex) continue;
        const bool age_ok = pass == 1 ? (p.has_age() && p.age == e.row.age)
                                      : p.agebin == ClampedBin(e.row.age);
        if (!age_ok || p.race != e.race || p.eth != e.eth) continue;
        used[t] = 1;
        confirmed[k] = 1;
        break;
      }
    }
  }
  return confirmed;
}

std::map<Geocode, RaceEthHistogram> RaceEthByBlock(const std::vector<PersonRecord>& records) {
  std::map<Geocode, RaceEthHistogram> out;
  for (const PersonRecord& r : records) {
    auto [it, inserted] = out.try_emplace(r.block, Zero());
    ++it->second[r.race_eth()];
  }
  return out;
}

std::map<Geocode, RaceEthHistogram> RaceEthByBlock(const TableBundle& bundle) {
  std::map<Geocode, RaceEthHistogram> out;
  for (const auto& [geo, tables] : bundle.geos()) {
    if (geo.size() != 15) continue;
    const auto* p8 = bundle.Find(geo, "P8");
    const auto* p9 = bundle.Find(geo, "P9");
    if (p8 == nullptr || p9 == nullptr) continue;
    RaceEthHistogram h = Zero();
    bool ok = true;
    for (int r = 0; r < kNumRaces && ok; ++r) {
      const int64_t all = (*p8)[r];
      const int64_t nh = (*p9)[1 + r];
      if (all == kSuppressed || nh == kSuppressed || nh > all) {
        ok = false;
        break;
      }
      const RaceMask m = RaceFromIndex(r);
      h[RaceEthCell(m, Ethnicity::kNotHispanic)] = nh;
      h[RaceEthCell(m, Ethnicity::kHispanic)] = all - nh;
    }
    if (ok) out.emplace(ParseGeocode(geo), h);
  }
  return out;
}

std::optional<int> UniqueMode(const RaceEthHistogram& h) {
  int best = -1;
  int64_t best_count = 0;
  bool tie = false;
  for (int c = 0; c < kNumRaceEth; ++c) {
    if (h[c] > best_count) {
      best = c;
      best_count = h[c];
      tie = false;
    } else if (h[c] == best_count && best_count > 0) {
      tie = true;
    }
  }
  if (best < 0 || tie) return std::nullopt;
  return best;
}

std::map<Geocode, ModalAssignment> AssignModalCells(
    const std::map<Geocode, RaceEthHistogram>& by_block, const GeoUniverse& universe) {
  std::map<std::string, RaceEthHistogram> by_bg;
  for (const auto& [block, h] : by_block) {
    auto [it, inserted] = by_bg.try_emplace(block.block_group_code(), Zero());
    for (int c = 0; c < kNumRaceEth; ++c) it->second[c] += h[c];
  }
  auto pick = [&](const Geocode& block, const RaceEthHistogram* h) {
    if (h != nullptr && Total(*h) > 1) {
      if (auto m = UniqueMode(*h)) return ModalAssignment{*m, ModalSource::kBlock};
    }
    auto bg = by_bg.find(block.block_group_code());
    if (bg != by_bg.end() && Total(bg->second) > 1) {
      if (auto m = UniqueMode(bg->second)) return ModalAssignment{*m, ModalSource::kBlockGroup};
    }
    return ModalAssignment{RaceEthCell(kWhiteAlone, Ethnicity::kNotHispanic),
                           ModalSource::kNational};
  };
  std::map<Geocode, ModalAssignment> out;
  for (const BlockEntry& b : universe.blocks()) {
    auto it = by_block.find(b.geocode);
    out.emplace(b.geocode, pick(b.geocode, it == by_block.end() ? nullptr : &it->second));
  }
  for (const auto& [block, h] : by_block) {
    if (!out.count(block)) out.emplace(block, pick(block, &h));
  }
  return out;
}

std::vector<PersonRecord> MdgBaseline(const std::vector<PersonRecord>& frame,
                                      const GeoUniverse& universe) {
  std::vector<PersonRecord> rows;
  rows.reserve(frame.size());
  for (const PersonRecord& p : frame) {
    PersonRecord r;
    r.block = p.block;
    r.sex = p.sex;
    r.agebin = p.agebin;
    rows.push_back(r);
  }
  return GuessModal(std::move(rows), RaceEthByBlock(frame), universe);
}

std::vector<PersonRecord> MdgBaselineFromTables(const TableBundle& bundle,
                                                const GeoUniverse& universe) {
  return GuessModal(FrameFromTables(bundle), RaceEthByBlock(bundle), universe);
}

std::vector<PersonRecord> PrgBaseline(const std::vector<PersonRecord>& frame,
                                      const GeoUniverse& universe, uint64_t seed) {
  std::vector<PersonRecord> rows;
  rows.reserve(frame.size());
  for (const PersonRecord& p : frame) {
    PersonRecord r;
    r.block = p.block;
    r.sex = p.sex;
    r.agebin = p.agebin;
    rows.push_back(r);
  }
  return GuessProportional(std::move(rows), RaceEthByBlock(frame), universe, seed);
}

std::vector<PersonRecord> PrgBaselineFromTables(const TableBundle& bundle,
                                                const GeoUniverse& universe, uint64_t seed) {
  return GuessProportional(FrameFromTables(bundle), RaceEthByBlock(bundle), universe, seed);
}

double PrgAccuracyBound(const RaceEthHistogram& h) {
  const double n = static_cast<double>(Total(h));
  if (n == 0) return 0.0;
  double s = 0.0;
  for (int64_t c : h) s += (c / n) * (c / n);
  return s;
}

double PrgLeaveOneOutAccuracy(const RaceEthHistogram& h) {
  const double n = static_cast<double>(Total(h));
  if (n < 2) return 0.0;
  double s = 0.0;
  for (int64_t c : h) s += static_cast<double>(c) * static_cast<double>(c - 1);
  return s / (n * (n - 1));
}

double PrgModalRemovedAccuracy(const RaceEthHistogram& h) {
  const int64_t n = Total(h);
  if (n < 2) return 0.0;
  const int mode = static_cast<int>(std::max_element(h.begin(), h.end()) - h.begin());
  double s = 0.0;
  for (int c = 0; c < kNumRaceEth; ++c) {
    const double p = static_cast<double>(h[c]) / n;
    const double q = static_cast<double>(h[c] - (c == mode ? 1 : 0)) / (n - 1);
    s += p * q;
  }
  return s;
}

int SizeClassOf(int64_t population) {
  if (population <= 0) return -1;
  static constexpr int64_t kUpper[] = {9, 49, 99, 249, 499, 999};
  for (int i = 0; i < 6; ++i)
    if (population <= kUpper[i]) return i;
  return 6;
}

std::string_view SizeClassLabel(int size_class) {
  static constexpr std::string_view kLabels[] = {"1-9",     "10-49",   "50-99", "100-249",
                                                 "250-499", "500-999", "1000+"};
  if (size_class < 0 || size_class >= kNumSizeClasses) return "all";
  return kLabels[size_class];
}

std::string_view ModalStratumName(ModalStratum m) {
  switch (m) {
    case ModalStratum::kAll: return "all";
    case ModalStratum::kModal: return "modal";
    case ModalStratum::kNonmodal: return "nonmodal";
  }
  return "all";
}

std::string_view SolvarStratumName(SolvarStratum s) {
  switch (s) {
    case SolvarStratum::kAny: return "any";
    case SolvarStratum::kZero: return "zero-solvar";
    case SolvarStratum::kZeroUnique: return "zero-solvar-unique";
  }
  return "any";
}

Strata::Strata(const std::vector<PersonRecord>& truth, const GeoUniverse& universe,
               const std::vector<SolvarResult>& solvar) {
  const auto hist = RaceEthByBlock(truth);
  std::map<Geocode, int64_t> maxima;
  for (const auto& [block, h] : hist) {
    maxima[block] = *std::max_element(h.begin(), h.end());
    size_class_[block] = SizeClassOf(Total(h));
  }
  for (const BlockEntry& b : universe.blocks()) size_class_.try_emplace(b.geocode, -1);

  std::set<Geocode> zero;
  for (const SolvarResult& s : solvar) {
    if (s.dstar == 0 && s.status == SolvarStatus::kExact) zero.insert(ParseGeocode(s.block));
  }
  std::map<std::tuple<Geocode, Sex, uint8_t>, int> frame_counts;
  for (const PersonRecord& p : truth) ++frame_counts[{p.block, p.sex, p.agebin}];

  for (const PersonRecord& p : truth) {
    if (p.pid == 0) continue;
    PersonClass c;
    c.size_class = size_class_[p.block];
    c.nonmodal = hist.at(p.block)[p.race_eth()] < maxima[p.block];
    c.zero_solvar = zero.count(p.block) > 0;
    c.unique = frame_counts[{p.block, p.sex, p.agebin}] == 1;
    by_pid_block_.try_emplace({p.pid, p.block}, c);
    first_block_.try_emplace(p.pid, p.block);
  }
}

const PersonClass* Strata::Find(uint64_t pid, const Geocode& block) const {
  auto it = by_pid_block_.find({pid, block});
  if (it != by_pid_block_.end()) return &it->second;
  auto fb = first_block_.find(pid);
  if (fb == first_block_.end()) return nullptr;
  return &by_pid_block_.at({pid, fb->second});
}

int Strata::SizeClassOfBlock(const Geocode& block) const {
  auto it = size_class_.find(block);
  return it == size_class_.end() ? -1 : it->second;
}

std::string ReidRow::StratumLabel() const {
  std::string s(SizeClassLabel(size_class));
  s += '/';
  s += ModalStratumName(modal);
  s += '/';
  s += SolvarStratumName(solvar);
  return s;
}

double ReidRow::PutativeRate() const {
  return population == 0 ? 0.0 : 100.0 * static_cast<double>(putative) / population;
}

double ReidRow::ConfirmedRate() const {
  return population == 0 ? 0.0 : 100.0 * static_cast<double>(confirmed) / population;
}

std::optional<double> ReidRow::Precision() const {
  if (putative == 0) return std::nullopt;
  return 100.0 * static_cast<double>(confirmed) / putative;
}

std::vector<ReidRow> ReidMetrics(const std::string& data, const std::string& attacker_name,
                                 const AttackerFile& attacker,
                                 const std::vector<EnhancedRow>& putative,
                                 const std::vector<char>& confirmed, const Strata& strata) {
  if (confirmed.size() != putative.size())
    throw std::invalid_argument("confirmation flags do not match putative rows");
  std::vector<ReidRow> rows;
  for (int sc = -1; sc < kNumSizeClasses; ++sc) {
    for (auto m : {ModalStratum::kAll, ModalStratum::kModal, ModalStratum::kNonmodal}) {
      for (auto s : {SolvarStratum::kAny, SolvarStratum::kZero, SolvarStratum::kZeroUnique}) {
        rows.push_back(ReidRow{data, attacker_name, sc, m, s});
      }
    }
  }
  std::vector<int8_t> status(attacker.rows.size(), 0);  // 1 putative, 2 confirmed
  for (size_t k = 0; k < putative.size(); ++k) {
    int8_t& st = status.at(putative[k].attacker_index);
    if (st != 0) throw std::invalid_argument("attacker row matched twice");
    st = confirmed[k] ? 2 : 1;
  }
  std::vector<size_t> targets;
  for (size_t i = 0; i < attacker.rows.size(); ++i) {
    const AttackerRow& a = attacker.rows[i];
    targets.clear();
    const PersonClass* c = strata.Find(a.pid, a.block);
    const int own = c != nullptr ? c->size_class : strata.SizeClassOfBlock(a.block);
    std::vector<int> sizes = {-1};
    if (own >= 0) sizes.push_back(own);
    for (int sc : sizes) {
      targets.push_back(StratumIndex(sc, ModalStratum::kAll, SolvarStratum::kAny));
      if (c == nullptr) continue;
      const ModalStratum m = c->nonmodal ? ModalStratum::kNonmodal : ModalStratum::kModal;
      for (ModalStratum mm : {ModalStratum::kAll, m}) {
        if (mm != ModalStratum::kAll) targets.push_back(StratumIndex(sc, mm, SolvarStratum::kAny));
        if (c->zero_solvar) targets.push_back(StratumIndex(sc, mm, SolvarStratum::kZero));
        if (c->zero_solvar && c->unique)
          targets.push_back(StratumIndex(sc, mm, SolvarStratum::kZeroUnique));
      }
    }
    for (size_t t : targets) {
      ++rows[t].population;
      if (status[i] >= 1) ++rows[t].putative;
      if (status[i] == 2) ++rows[t].confirmed;
    }
  }
  return rows;
}

void WriteReidReport(const std::vector<ReidRow>& rows, const std::filesystem::path& path) {
  CsvWriter w(path);
  w.Row({"data", "attacker", "stratum", "population", "putative", "confirmed", "precision"});
  for (const ReidRow& r : rows) {
    const auto p = r.Precision();
    w.Row({r.data, r.attacker, r.StratumLabel(), std::to_string(r.population),
           std::to_string(r.putative), std::to_string(r.confirmed),
           p ? FormatFixed(*p, 4) : std::string("NA")});
  }
}

std::vector<ReidRow> ReadReidReport(const std::filesystem::path& path) {
  const CsvTable t = ReadCsv(path);
  const size_t cd = t.Column("data"), ca = t.Column("attacker"), cs = t.Column("stratum"),
               cp = t.Column("population"), cu = t.Column("putative"),
               cc = t.Column("confirmed");
  std::vector<ReidRow> out;
  for (const auto& row : t.rows) {
    ReidRow r;
    r.data = row.at(cd);
    r.attacker = row.at(ca);
    const std::string& label = row.at(cs);
    const size_t a = label.find('/'), b = label.rfind('/');
    if (a == std::string::npos || a == b) throw IoError("malformed stratum: " + label);
    const std::string size = label.substr(0, a), modal = label.substr(a + 1, b - a - 1),
                      sv = label.substr(b + 1);
    r.size_class = -2;
    for (int sc = -1; sc < kNumSizeClasses; ++sc)
      if (SizeClassLabel(sc) == size) r.size_class = sc;
    bool modal_ok = false, sv_ok = false;
    for (auto m : {ModalStratum::kAll, ModalStratum::kModal, ModalStratum::kNonmodal})
      if (ModalStratumName(m) == modal) r.modal = m, modal_ok = true;
    for (auto s : {SolvarStratum::kAny, SolvarStratum::kZero, SolvarStratum::kZeroUnique})
      if (SolvarStratumName(s) == sv) r.solvar = s, sv_ok = true;
    if (r.size_class == -2 || !modal_ok || !sv_ok) throw IoError("malformed stratum: " + label);
    r.population = ParseInt(row.at(cp));
    r.putative = ParseInt(row.at(cu));
    r.confirmed = ParseInt(row.at(cc));
    out.push_back(r);
  }
  return out;
}

void WriteFigureData(const std::vector<ReidRow>& rows, const std::filesystem::path& path) {
  CsvWriter w(path);
  w.Row({"data", "attacker", "size_class", "modal", "metric", "value"});
  for (const ReidRow& r : rows) {
    if (r.solvar != SolvarStratum::kAny) continue;
    const std::string size(SizeClassLabel(r.size_class)), modal(ModalStratumName(r.modal));
    const auto p = r.Precision();
    w.Row({r.data, r.attacker, size, modal, "putative_rate", FormatFixed(r.PutativeRate(), 4)});
    w.Row({r.data, r.attacker, size, modal, "confirmed_rate", FormatFixed(r.ConfirmedRate(), 4)});
    w.Row({r.data, r.attacker, size, modal, "precision", p ? FormatFixed(*p, 4) : "NA"});
  }
}

std::vector<ReidRow> SelectOverall(const std::vector<ReidRow>& rows) {
  std::vector<ReidRow> out;
  for (const ReidRow& r : rows)
    if (r.modal == ModalStratum::kAll && r.solvar == SolvarStratum::kAny) out.push_back(r);
  return out;
}

std::vector<ReidRow> SelectNonmodalZeroUnique(const std::vector<ReidRow>& rows) {
  std::vector<ReidRow> out;
  for (const ReidRow& r : rows)
    if (r.modal == ModalStratum::kNonmodal && r.solvar == SolvarStratum::kZeroUnique)
      out.push_back(r);
  return out;
}

}  // namespace reconlab
