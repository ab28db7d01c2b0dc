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

#include "reconlab/schema.h"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace reconlab {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

int ParseSmallInt(std::string_view s) {
  s = Trim(s);
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw SchemaParseError("expected integer, got '" + std::string(s) + "'");
  }
  return v;
}

std::pair<int, int> ParseRange(std::string_view s) {
  const size_t dots = s.find("..");
  if (dots == std::string_view::npos) throw SchemaParseError("expected a..b in '" + std::string(s) + "'");
  return {ParseSmallInt(s.substr(0, dots)), ParseSmallInt(s.substr(dots + 2))};
}

int GroupOfLetter(char c) {
  const size_t g = kRaceGroupLetters.find(c);
  if (g == std::string_view::npos) throw SchemaParseError(std::string("unknown race group ") + c);
  return static_cast<int>(g);
}

Tri FromBool(bool b) { return b ? Tri::kYes : Tri::kNo; }

Predicate Single(Term t) { return Predicate{{t}}; }

}  // namespace

std::string_view GeoLevelName(GeoLevel level) {
  return level == GeoLevel::kBlock ? "block" : "tract";
}

bool Term::Holds(Sex sex, int age, RaceMask race, Ethnicity eth) const {
  switch (kind) {
    case Kind::kSexEq:
      return static_cast<int>(sex) == a;
    case Kind::kAgeIn:
      return age >= a && age <= b;
    case Kind::kEthEq:
      return static_cast<int>(eth) == a;
    case Kind::kRaceEq:
      return race == a;
    case Kind::kRaceHas:
      return (race & GroupBit(a)) != 0;
    case Kind::kRacesEq:
      return NumRacesIn(race) == a;
    case Kind::kRacesGe:
      return NumRacesIn(race) >= a;
  }
  return false;
}

Tri Term::Holds(Sex sex, const AgeRange& ages, RaceMask race, Ethnicity eth) const {
  if (kind == Kind::kAgeIn) {
    const AgeRange mine{a, b};
    if (mine.Contains(ages)) return Tri::kYes;
    if (mine.Disjoint(ages)) return Tri::kNo;
    return Tri::kPartial;
  }
  return FromBool(Holds(sex, ages.lo, race, eth));
}

std::string Term::ToString() const {
  switch (kind) {
    case Kind::kSexEq:
      return std::string("sex==") + SexCode(static_cast<Sex>(a));
    case Kind::kAgeIn:
      return "age in " + std::to_string(a) + ".." + std::to_string(b);
    case Kind::kEthEq:
      return std::string("eth==") + EthnicityCode(static_cast<Ethnicity>(a));
    case Kind::kRaceEq: {
      const auto m = static_cast<RaceMask>(a);
      if (NumRacesIn(m) == 1) {
        return std::string("race==") + kRaceGroupLetters[__builtin_ctz(m)] + "_alone";
      }
      return "race==" + RaceFlags(m);
    }
    case Kind::kRaceHas:
      return std::string("race has ") + kRaceGroupLetters[a];
    case Kind::kRacesEq:
      return "races==" + std::to_string(a);
    case Kind::kRacesGe:
      return "races>=" + std::to_string(a);
  }
  return "?";
}

bool Predicate::Holds(Sex sex, int age, RaceMask race, Ethnicity eth) const {
  for (const auto& t : terms) {
    if (!t.Holds(sex, age, race, eth)) return false;
  }
  return true;
}

Tri Predicate::Holds(Sex sex, const AgeRange& ages, RaceMask race, Ethnicity eth) const {
  Tri result = Tri::kYes;
  for (const auto& t : terms) {
    const Tri r = t.Holds(sex, ages, race, eth);
    if (r == Tri::kNo) return Tri::kNo;
    if (r == Tri::kPartial) result = Tri::kPartial;
  }
  return result;
}

Predicate Predicate::And(const Predicate& other) const {
  Predicate p = *this;
  p.terms.insert(p.terms.end(), other.terms.begin(), other.terms.end());
  return p;
}

std::string Predicate::ToString() const {
  if (terms.empty()) return "all";
  std::string s;
  for (size_t i = 0; i < terms.size(); ++i) {
    if (i) s += " && ";
    s += terms[i].ToString();
  }
  return s;
}

Predicate Predicate::Parse(std::string_view text) {
  text = Trim(text);
  Predicate p;
  if (text == "all") return p;
  while (!text.empty()) {
    const size_t amp = text.find("&&");
    std::string_view tok = Trim(text.substr(0, amp));
    text = amp == std::string_view::npos ? std::string_view() : Trim(text.substr(amp + 2));
    Term t{Term::Kind::kSexEq};
    if (tok.starts_with("sex==")) {
      t = {Term::Kind::kSexEq, static_cast<int>(ParseSex(tok.substr(5)))};
    } else if (tok.starts_with("age in ")) {
      const auto [lo, hi] = ParseRange(tok.substr(7));
      t = {Term::Kind::kAgeIn, lo, hi};
    } else if (tok.starts_with("eth==")) {
      t = {Term::Kind::kEthEq, static_cast<int>(ParseEthnicity(tok.substr(5)))};
    } else if (tok.starts_with("race has ")) {
      const auto g = Trim(tok.substr(9));
      if (g.size() != 1) throw SchemaParseError("bad race group in '" + std::string(tok) + "'");
      t = {Term::Kind::kRaceHas, GroupOfLetter(g[0])};
    } else if (tok.starts_with("race==")) {
      const auto v = tok.substr(6);
      if (v.size() == 7 && v.substr(1) == "_alone") {
        t = {Term::Kind::kRaceEq, GroupBit(GroupOfLetter(v[0]))};
      } else {
        try {
          t = {Term::Kind::kRaceEq, ParseRaceFlags(v)};
        } catch (const std::invalid_argument& e) {
          throw SchemaParseError(e.what());
        }
      }
    } else if (tok.starts_with("races==")) {
      t = {Term::Kind::kRacesEq, ParseSmallInt(tok.substr(7))};
    } else if (tok.starts_with("races>=")) {
      t = {Term::Kind::kRacesGe, ParseSmallInt(tok.substr(7))};
    } else {
      throw SchemaParseError("unknown predicate term '" + std::string(tok) + "'");
    }
    p.terms.push_back(t);
  }
  return p;
}

Predicate SexIs(Sex s) { return Single({Term::Kind::kSexEq, static_cast<int>(s)}); }
Predicate AgeIn(int lo, int hi) { return Single({Term::Kind::kAgeIn, lo, hi}); }
Predicate EthIs(Ethnicity e) { return Single({Term::Kind::kEthEq, static_cast<int>(e)}); }
Predicate RaceIs(RaceMask m) { return Single({Term::Kind::kRaceEq, m}); }
Predicate RaceHas(int group) { return Single({Term::Kind::kRaceHas, group}); }
Predicate RacesEq(int k) { return Single({Term::Kind::kRacesEq, k}); }
Predicate RacesGe(int k) { return Single({Term::Kind::kRacesGe, k}); }

namespace {

CellDef Leaf(Predicate p) { return CellDef{std::move(p)}; }
CellDef Sum(Predicate p, int lo, int hi) { return CellDef{std::move(p), lo, hi}; }

// Race x n-races breakdown shared by P8/P10 and the not-Hispanic half of
// P9/P11: 63 leaves starting at `offset`, plus the size subtotals.
void RaceBreakdown(const Predicate& prefix, int offset, std::vector<CellDef>& leaves,
                   std::vector<CellDef>& subtotals) {
  for (int i = 0; i < kNumRaces; ++i) leaves.push_back(Leaf(prefix.And(RaceIs(RaceFromIndex(i)))));
  // Index boundaries by number of races: 1:[0,5] 2:[6,20] 3:[21,40] 4:[41,55] 5:[56,61] 6:[62]
  subtotals.push_back(Sum(prefix.And(RacesEq(1)), offset + 0, offset + 5));
  subtotals.push_back(Sum(prefix.And(RacesGe(2)), offset + 6, offset + 62));
  subtotals.push_back(Sum(prefix.And(RacesEq(2)), offset + 6, offset + 20));
  subtotals.push_back(Sum(prefix.And(RacesEq(3)), offset + 21, offset + 40));
  subtotals.push_back(Sum(prefix.And(RacesEq(4)), offset + 41, offset + 55));
  subtotals.push_back(Sum(prefix.And(RacesEq(5)), offset + 56, offset + 61));
}

TableDef RaceTable(std::string name, Predicate universe) {
  TableDef t{std::move(name), GeoLevel::kBlock, std::move(universe)};
  std::vector<CellDef> subtotals;
  RaceBreakdown(Predicate{}, 0, t.cells, subtotals);
  t.cells.push_back(Sum(Predicate{}, 0, kNumRaces - 1));
  t.total_cell = static_cast<int>(t.cells.size()) - 1;
  t.cells.insert(t.cells.end(), subtotals.begin(), subtotals.end());
  return t;
}

TableDef HispanicRaceTable(std::string name, Predicate universe) {
  TableDef t{std::move(name), GeoLevel::kBlock, std::move(universe)};
  t.cells.push_back(Leaf(EthIs(Ethnicity::kHispanic)));
  std::vector<CellDef> subtotals;
  const Predicate nh = EthIs(Ethnicity::kNotHispanic);
  RaceBreakdown(nh, 1, t.cells, subtotals);
  t.cells.push_back(Sum(Predicate{}, 0, kNumRaces));
  t.total_cell = static_cast<int>(t.cells.size()) - 1;
  t.cells.push_back(Sum(nh, 1, kNumRaces));
  t.cells.insert(t.cells.end(), subtotals.begin(), subtotals.end());
  return t;
}

TableDef SexByAge(std::string name, GeoLevel level, Predicate universe, AgeSchemaName schema) {
  TableDef t{std::move(name), level, std::move(universe)};
  const auto& bins = AgeSchema::Get(schema).bins();
  const int n = static_cast<int>(bins.size());
  for (Sex s : {Sex::kMale, Sex::kFemale}) {
    for (const auto& b : bins) t.cells.push_back(Leaf(SexIs(s).And(AgeIn(b.lo, b.hi))));
  }
  t.cells.push_back(Sum(SexIs(Sex::kMale), 0, n - 1));
  t.cells.push_back(Sum(SexIs(Sex::kFemale), n, 2 * n - 1));
  t.cells.push_back(Sum(Predicate{}, 0, 2 * n - 1));
  t.total_cell = 2 * n + 2;
  return t;
}

struct Iteration {
  char letter;
  Predicate universe;
};

std::vector<Iteration> Iterations() {
  const Predicate nh = EthIs(Ethnicity::kNotHispanic);
  std::vector<Iteration> it;
  for (int g = 0; g < kNumRaceGroups; ++g) {
    it.push_back({static_cast<char>('A' + g), RaceIs(GroupBit(g))});
  }
  it.push_back({'G', RacesGe(2)});
  it.push_back({'H', EthIs(Ethnicity::kHispanic)});
  it.push_back({'I', RaceIs(kWhiteAlone).And(nh)});
  // Tract-only iterations: the non-White alone groups and two-or-more,
  // restricted to not Hispanic.
  for (int g = 1; g < kNumRaceGroups; ++g) {
    it.push_back({static_cast<char>('J' + g - 1), RaceIs(GroupBit(g)).And(nh)});
  }
  it.push_back({'O', RacesGe(2).And(nh)});
  return it;
}

std::vector<TableDef> BuildDefaultTables() {
  std::vector<TableDef> tables;
  {
    TableDef p1{"P1", GeoLevel::kBlock, {}};
    p1.cells.push_back(Leaf({}));
    p1.total_cell = 0;
    tables.push_back(std::move(p1));
  }
  {
    TableDef p6{"P6", GeoLevel::kBlock, {}};
    for (int g = 0; g < kNumRaceGroups; ++g) p6.cells.push_back(Leaf(RaceHas(g)));
    p6.disjoint_leaves = false;
    tables.push_back(std::move(p6));
  }
  {
    TableDef p7{"P7", GeoLevel::kBlock, {}};
    for (Ethnicity e : {Ethnicity::kNotHispanic, Ethnicity::kHispanic}) {
      for (int g = 0; g < kNumRaceGroups; ++g) p7.cells.push_back(Leaf(EthIs(e).And(RaceHas(g))));
    }
    p7.disjoint_leaves = false;
    tables.push_back(std::move(p7));
  }
  const Predicate adult = AgeIn(18, kMaxAge);
  tables.push_back(RaceTable("P8", {}));
  tables.push_back(HispanicRaceTable("P9", {}));
  tables.push_back(RaceTable("P10", adult));
  tables.push_back(HispanicRaceTable("P11", adult));
  tables.push_back(SexByAge("P12", GeoLevel::kBlock, {}, AgeSchemaName::kBin23));
  const auto iterations = Iterations();
  for (const auto& it : iterations) {
    if (it.letter > 'I') break;
    tables.push_back(SexByAge(std::string("P12") + it.letter, GeoLevel::kBlock, it.universe,
                              AgeSchemaName::kBin23));
  }
  tables.push_back(
      SexByAge("P14", GeoLevel::kBlock, AgeIn(0, 19), AgeSchemaName::kSingle0To19));
  tables.push_back(SexByAge("PCT12", GeoLevel::kTract, {}, AgeSchemaName::kTract103));
  for (const auto& it : iterations) {
    tables.push_back(SexByAge(std::string("PCT12") + it.letter, GeoLevel::kTract, it.universe,
                              AgeSchemaName::kTract103));
  }
  return tables;
}

std::vector<AgeRange> SingleYears() {
  std::vector<AgeRange> g;
  for (int a = 0; a <= kMaxAge; ++a) g.push_back({a, a});
  return g;
}

}  // namespace

Schema::Schema(std::string version, std::vector<TableDef> tables)
    : version_(std::move(version)), tables_(std::move(tables)) {
  for (size_t i = 0; i < tables_.size(); ++i) {
    if (!index_.emplace(tables_[i].name, i).second) {
      throw SchemaParseError("duplicate table " + tables_[i].name);
    }
  }
}

const Schema& Schema::Default() {
  static const Schema schema(std::string(kSchemaVersion), BuildDefaultTables());
  return schema;
}

size_t Schema::IndexOf(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw UnknownTable("unknown table '" + std::string(name) + "'");
  return it->second;
}

std::optional<size_t> Schema::Find(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<size_t> Schema::TablesAt(GeoLevel level) const {
  std::vector<size_t> out;
  for (size_t i = 0; i < tables_.size(); ++i) {
    if (tables_[i].level == level) out.push_back(i);
  }
  return out;
}

std::string Schema::ToDsl() const {
  std::ostringstream out;
  out << "# schema=" << version_ << "\n";
  for (const auto& t : tables_) {
    const std::string head = "table=" + t.name + "; level=" + std::string(GeoLevelName(t.level)) +
                             "; universe=" + t.universe.ToString() + "; ";
    for (size_t c = 0; c < t.cells.size(); ++c) {
      out << head << "cell[" << c << "]=" << t.cells[c].pred.ToString();
      if (t.cells[c].is_subtotal()) out << "; sum=" << t.cells[c].sum_lo << ".." << t.cells[c].sum_hi;
      if (static_cast<int>(c) == t.total_cell) out << "; total";
      if (!t.disjoint_leaves && !t.cells[c].is_subtotal()) out << "; tally";
      out << "\n";
    }
  }
  return out.str();
}

Schema Schema::Parse(std::string_view dsl) {
  std::string version;
  std::vector<TableDef> tables;
  std::map<std::string, size_t> pos;
  size_t line_no = 0;
  while (!dsl.empty()) {
    const size_t nl = dsl.find('\n');
    std::string_view line = Trim(dsl.substr(0, nl));
    dsl = nl == std::string_view::npos ? std::string_view() : dsl.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (line.starts_with("#")) {
      const size_t eq = line.find("schema=");
      if (eq != std::string_view::npos) version = std::string(Trim(line.substr(eq + 7)));
      continue;
    }
    std::string name, universe, cell_pred;
    GeoLevel level = GeoLevel::kBlock;
    int cell = -1, sum_lo = -1, sum_hi = -1;
    bool total = false, tally = false;
    while (!line.empty()) {
      const size_t semi = line.find(';');
      std::string_view field = Trim(line.substr(0, semi));
      line = semi == std::string_view::npos ? std::string_view() : line.substr(semi + 1);
      if (field.starts_with("table=")) {
        name = std::string(field.substr(6));
      } else if (field.starts_with("level=")) {
        const auto v = field.substr(6);
        if (v == "block") {
          level = GeoLevel::kBlock;
        } else if (v == "tract") {
          level = GeoLevel::kTract;
        } else {
          throw SchemaParseError("line " + std::to_string(line_no) + ": bad level");
        }
      } else if (field.starts_with("universe=")) {
        universe = std::string(field.substr(9));
      } else if (field.starts_with("cell[")) {
        const size_t close = field.find("]=");
        if (close == std::string_view::npos) {
          throw SchemaParseError("line " + std::to_string(line_no) + ": bad cell field");
        }
        cell = ParseSmallInt(field.substr(5, close - 5));
        cell_pred = std::string(field.substr(close + 2));
      } else if (field.starts_with("sum=")) {
        std::tie(sum_lo, sum_hi) = ParseRange(field.substr(4));
      } else if (field == "total") {
        total = true;
      } else if (field == "tally") {
        tally = true;
      } else if (!field.empty()) {
        throw SchemaParseError("line " + std::to_string(line_no) + ": unknown field '" +
                               std::string(field) + "'");
      }
    }
    if (name.empty() || cell < 0) {
      throw SchemaParseError("line " + std::to_string(line_no) + ": missing table or cell");
    }
    auto [it, inserted] = pos.try_emplace(name, tables.size());
    if (inserted) {
      tables.push_back(TableDef{name, level, Predicate::Parse(universe)});
    }
    TableDef& t = tables[it->second];
    if (cell != static_cast<int>(t.cells.size())) {
      throw SchemaParseError("line " + std::to_string(line_no) + ": cells out of order");
    }
    t.cells.push_back(CellDef{Predicate::Parse(cell_pred), sum_lo, sum_hi});
    if (total) t.total_cell = cell;
    if (tally) t.disjoint_leaves = false;
  }
  if (version.empty()) version = "unversioned";
  return Schema(std::move(version), std::move(tables));
}

std::vector<std::string> BlockTableNames() {
  std::vector<std::string> out;
  for (size_t i : Schema::Default().TablesAt(GeoLevel::kBlock)) {
    out.push_back(Schema::Default().table(i).name);
  }
  return out;
}

std::vector<std::string> TractTableNames() {
  std::vector<std::string> out;
  for (size_t i : Schema::Default().TablesAt(GeoLevel::kTract)) {
    out.push_back(Schema::Default().table(i).name);
  }
  return out;
}

CellIndex::CellIndex(const Schema& schema, GeoLevel level, std::vector<AgeRange> age_grid)
    : age_grid_(std::move(age_grid)) {
  cells_.resize(num_keys());
  const auto tables = schema.TablesAt(level);
  for (int s = 0; s < 2; ++s) {
    const Sex sex = static_cast<Sex>(s);
    for (size_t a = 0; a < age_grid_.size(); ++a) {
      const AgeRange& ages = age_grid_[a];
      for (int re = 0; re < kNumRaceEth; ++re) {
        const RaceMask race = RaceOfCell(re);
        const Ethnicity eth = EthOfCell(re);
        auto& out = cells_[Key(sex, a, re)];
        for (size_t ti : tables) {
          const TableDef& t = schema.table(ti);
          const Tri u = t.universe.Holds(sex, ages, race, eth);
          if (u == Tri::kNo) continue;
          for (size_t c = 0; c < t.cells.size(); ++c) {
            Tri r = t.cells[c].pred.Holds(sex, ages, race, eth);
            if (r == Tri::kNo) continue;
            if (u == Tri::kPartial) r = Tri::kPartial;
            if (r == Tri::kPartial) {
              throw std::logic_error("table " + t.name + " cell " + std::to_string(c) +
                                     " is not constant on age range " + AgeRangeLabel(ages));
            }
            out.push_back({static_cast<uint16_t>(ti), static_cast<uint16_t>(c)});
          }
        }
      }
    }
  }
}

const CellIndex& SingleYearBlockIndex() {
  static const CellIndex idx(Schema::Default(), GeoLevel::kBlock, SingleYears());
  return idx;
}

const CellIndex& SingleYearTractIndex() {
  static const CellIndex idx(Schema::Default(), GeoLevel::kTract, SingleYears());
  return idx;
}

const CellIndex& Bin38BlockIndex() {
  static const CellIndex idx(Schema::Default(), GeoLevel::kBlock,
                             AgeSchema::Get(AgeSchemaName::kBin38).bins());
  return idx;
}

const CellIndex& Tract103BlockIndex() {
  static const CellIndex idx(Schema::Default(), GeoLevel::kBlock,
                             AgeSchema::Get(AgeSchemaName::kTract103).bins());
  return idx;
}

const CellIndex& Tract103TractIndex() {
  static const CellIndex idx(Schema::Default(), GeoLevel::kTract,
                             AgeSchema::Get(AgeSchemaName::kTract103).bins());
  return idx;
}

}  // namespace reconlab
