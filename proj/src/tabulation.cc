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

#include "reconlab/tabulation.h"

#include <algorithm>
#include <set>

#include "reconlab/csv.h"

namespace reconlab {
namespace {

std::shared_ptr<const Schema> DefaultSchemaPtr() {
  static const std::shared_ptr<const Schema> p(&Schema::Default(), [](const Schema*) {});
  return p;
}

// Indexes for a schema: the shared ones for the default schema, freshly
// built otherwise.
struct Indexes {
  std::unique_ptr<CellIndex> owned_single_block, owned_single_tract, owned_bin_block;
  const CellIndex* single_block;
  const CellIndex* single_tract;
  const CellIndex* bin_block;

  explicit Indexes(const Schema& schema) {
    if (&schema == &Schema::Default()) {
      single_block = &SingleYearBlockIndex();
      single_tract = &SingleYearTractIndex();
      bin_block = &Bin38BlockIndex();
      return;
    }
    std::vector<AgeRange> singles;
    for (int a = 0; a <= kMaxAge; ++a) singles.push_back({a, a});
    owned_single_block = std::make_unique<CellIndex>(schema, GeoLevel::kBlock, singles);
    owned_single_tract = std::make_unique<CellIndex>(schema, GeoLevel::kTract, singles);
    owned_bin_block = std::make_unique<CellIndex>(schema, GeoLevel::kBlock,
                                                  AgeSchema::Get(AgeSchemaName::kBin38).bins());
    single_block = owned_single_block.get();
    single_tract = owned_single_tract.get();
    bin_block = owned_bin_block.get();
  }
};

void AddRecord(const PersonRecord& r, const CellIndex& single, const CellIndex* binned,
               const std::vector<char>& wanted, TableBundle::Tables& tables) {
  const std::vector<CellRef>* refs;
  if (r.has_age()) {
    refs = &single.CellsOf(single.Key(r.sex, static_cast<size_t>(r.age), r.race_eth()));
  } else {
    if (binned == nullptr) {
      throw std::invalid_argument("tract tables need single-year ages");
    }
    refs = &binned->CellsOf(binned->Key(r.sex, r.agebin, r.race_eth()));
  }
  for (const CellRef& ref : *refs) {
    if (wanted[ref.table]) ++tables[ref.table][ref.cell];
  }
}

int64_t Cell(const std::vector<int64_t>* t, size_t i, const std::string& what) {
  if (t == nullptr) throw InconsistentTables("missing table " + what);
  const int64_t v = (*t)[i];
  if (v == kSuppressed) throw InconsistentTables("suppressed cell " + what + "[" + std::to_string(i) + "]");
  return v;
}

}  // namespace

TableBundle::TableBundle() : schema_(DefaultSchemaPtr()) {}
TableBundle::TableBundle(std::shared_ptr<const Schema> schema) : schema_(std::move(schema)) {}

const std::vector<int64_t>* TableBundle::Find(const std::string& geo, size_t table) const {
  auto it = geos_.find(geo);
  if (it == geos_.end() || table >= it->second.size() || it->second[table].empty()) return nullptr;
  return &it->second[table];
}

const std::vector<int64_t>* TableBundle::Find(const std::string& geo, std::string_view table) const {
  const auto idx = schema_->Find(table);
  return idx ? Find(geo, *idx) : nullptr;
}

TableBundle::Tables& TableBundle::MutableTables(const std::string& geo) {
  Tables& tables = geos_[geo];
  if (tables.size() < schema_->tables().size()) tables.resize(schema_->tables().size());
  return tables;
}

std::vector<int64_t>& TableBundle::Mutable(const std::string& geo, size_t table) {
  auto& t = MutableTables(geo)[table];
  if (t.empty()) t.assign(schema_->table(table).cells.size(), 0);
  return t;
}

void TableBundle::Erase(const std::string& geo, size_t table) {
  auto it = geos_.find(geo);
  if (it != geos_.end() && table < it->second.size()) it->second[table].clear();
}

bool TableBundle::operator==(const TableBundle& other) const {
  return schema_->ToDsl() == other.schema_->ToDsl() && geos_ == other.geos_;
}

std::vector<std::string> AllTableNames() {
  std::vector<std::string> out;
  for (const auto& t : Schema::Default().tables()) out.push_back(t.name);
  return out;
}

TableBundle Tabulate(const std::vector<PersonRecord>& pop, const GeoUniverse& universe,
                     const std::vector<std::string>& which) {
  return Tabulate(pop, universe, which, DefaultSchemaPtr());
}

TableBundle Tabulate(const std::vector<PersonRecord>& pop, const GeoUniverse& universe,
                     const std::vector<std::string>& which, std::shared_ptr<const Schema> schema) {
  const Schema& s = *schema;
  std::vector<char> wanted(s.tables().size(), 0);
  bool any_block = false, any_tract = false;
  for (const auto& name : which) {
    const size_t i = s.IndexOf(name);
    wanted[i] = 1;
    (s.table(i).level == GeoLevel::kBlock ? any_block : any_tract) = true;
  }
  const Indexes idx(s);

  std::vector<std::vector<size_t>> by_block(universe.size());
  for (size_t i = 0; i < pop.size(); ++i) {
    const int64_t b = universe.IndexOf(pop[i].block);
    if (b < 0) throw std::invalid_argument("record block " + pop[i].block.str() + " not in universe");
    by_block[b].push_back(i);
  }

  TableBundle bundle(schema);
  for (size_t b = 0; b < universe.size() && any_block; ++b) {
    const std::string geo = universe.block(b).str();
    for (size_t t = 0; t < wanted.size(); ++t) {
      if (wanted[t] && s.table(t).level == GeoLevel::kBlock) bundle.Mutable(geo, t);
    }
    TableBundle::Tables& tables = bundle.MutableTables(geo);
    for (size_t i : by_block[b]) AddRecord(pop[i], *idx.single_block, idx.bin_block, wanted, tables);
  }
  for (const std::string& tract : universe.tracts()) {
    if (!any_tract) break;
    for (size_t t = 0; t < wanted.size(); ++t) {
      if (wanted[t] && s.table(t).level == GeoLevel::kTract) bundle.Mutable(tract, t);
    }
    TableBundle::Tables& tables = bundle.MutableTables(tract);
    for (size_t b : universe.BlocksInTract(tract)) {
      for (size_t i : by_block[b]) AddRecord(pop[i], *idx.single_tract, nullptr, wanted, tables);
    }
  }
  return bundle;
}

int64_t CountStatistics(const TableBundle& bundle, bool positive_only) {
  int64_t n = 0;
  for (const auto& [geo, tables] : bundle.geos()) {
    int64_t published = 0;
    bool positive = false;
    for (const auto& t : tables) {
      for (int64_t v : t) {
        if (v == kSuppressed) continue;
        ++published;
        positive = positive || v > 0;
      }
    }
    if (!positive_only || positive) n += published;
  }
  return n;
}

std::array<int64_t, 76> SexAgebinCounts(const TableBundle& bundle, const std::string& block) {
  const auto* p12 = bundle.Find(block, "P12");
  const auto* p14 = bundle.Find(block, "P14");
  std::array<int64_t, 76> out{};
  for (int s = 0; s < 2; ++s) {
    const size_t p12_base = static_cast<size_t>(s) * 23;
    const size_t p14_base = static_cast<size_t>(s) * 20;
    for (int a = 0; a < 20; ++a) out[s * 38 + a] = Cell(p14, p14_base + a, block + " P14");
    out[s * 38 + 20] = Cell(p12, p12_base + 5, block + " P12");
    out[s * 38 + 21] = Cell(p12, p12_base + 6, block + " P12");
    for (int k = 7; k < 23; ++k) out[s * 38 + 15 + k] = Cell(p12, p12_base + k, block + " P12");
    // P12 bins 0-4, 5-9, 10-14, 15-17, 18-19 must equal their P14 single years.
    const int lo[5] = {0, 5, 10, 15, 18};
    const int hi[5] = {4, 9, 14, 17, 19};
    for (int k = 0; k < 5; ++k) {
      int64_t sum = 0;
      for (int a = lo[k]; a <= hi[k]; ++a) sum += out[s * 38 + a];
      const int64_t residual = Cell(p12, p12_base + k, block + " P12") - sum;
      if (residual != 0) {
        throw InconsistentTables("block " + block + ": P12 " + std::string(1, SexCode(Sex(s))) +
                                 " " + std::to_string(lo[k]) + "-" + std::to_string(hi[k]) +
                                 " differs from P14 by " + std::to_string(residual));
      }
    }
  }
  for (int64_t v : out) {
    if (v < 0) throw InconsistentTables("block " + block + ": negative derived count");
  }
  return out;
}

std::vector<FrameRow> ExpandSexAgebinFrame(const TableBundle& bundle) {
  std::vector<FrameRow> rows;
  for (const auto& [geo, tables] : bundle.geos()) {
    if (geo.size() != 15 || bundle.Find(geo, "P12") == nullptr) continue;
    const auto counts = SexAgebinCounts(bundle, geo);
    const Geocode g = ParseGeocode(geo);
    for (int k = 0; k < 76; ++k) {
      for (int64_t i = 0; i < counts[k]; ++i) {
        rows.push_back({g, static_cast<Sex>(k / 38), static_cast<uint8_t>(k % 38)});
      }
    }
  }
  return rows;
}

std::vector<std::string> CheckAdditivity(const TableBundle& bundle) {
  const Schema& s = bundle.schema();
  std::vector<std::string> problems;
  std::map<std::string, std::map<std::string, int64_t>> block_totals;  // tract -> table -> sum
  for (const auto& [geo, tables] : bundle.geos()) {
    const auto* p1 = bundle.Find(geo, "P1");
    for (size_t ti = 0; ti < tables.size(); ++ti) {
      const auto& t = tables[ti];
      if (t.empty()) continue;
      const TableDef& def = s.table(ti);
      for (size_t c = 0; c < def.cells.size(); ++c) {
        const CellDef& cell = def.cells[c];
        if (t[c] != kSuppressed && t[c] < 0) {
          problems.push_back(geo + " " + def.name + "[" + std::to_string(c) + "] is negative");
        }
        if (!cell.is_subtotal() || t[c] == kSuppressed) continue;
        int64_t sum = 0;
        bool complete = true;
        for (int k = cell.sum_lo; k <= cell.sum_hi; ++k) {
          if (t[k] == kSuppressed) complete = false;
          sum += t[k];
        }
        if (complete && sum != t[c]) {
          problems.push_back(geo + " " + def.name + "[" + std::to_string(c) + "]=" +
                             std::to_string(t[c]) + " but its cells " + std::to_string(cell.sum_lo) +
                             ".." + std::to_string(cell.sum_hi) + " sum to " + std::to_string(sum));
        }
      }
      if (def.total_cell >= 0 && def.universe.terms.empty() && p1 != nullptr && def.name != "P1" &&
          def.level == GeoLevel::kBlock && t[def.total_cell] != kSuppressed &&
          (*p1)[0] != kSuppressed && t[def.total_cell] != (*p1)[0]) {
        problems.push_back(geo + " " + def.name + " total differs from P1");
      }
      if (def.level == GeoLevel::kBlock && geo.size() == 15 && def.total_cell >= 0) {
        auto& acc = block_totals[geo.substr(0, 11)];
        const std::string key = def.name;
        const int64_t v = t[def.total_cell];
        if (v == kSuppressed || acc[key] == kSuppressed) {
          acc[key] = kSuppressed;
        } else {
          acc[key] += v;
        }
      }
    }
  }
  // Tract sex-by-age tables share universes with the block tables.
  for (const auto& [tract, sums] : block_totals) {
    for (const auto& [name, total] : sums) {
      if (total == kSuppressed) continue;
      std::string tract_name;
      if (name == "P1") {
        tract_name = "PCT12";
      } else if (name.size() == 4 && name.starts_with("P12")) {
        tract_name = "PCT12" + name.substr(3);
      } else {
        continue;
      }
      const auto idx = s.Find(tract_name);
      if (!idx) continue;
      const auto* t = bundle.Find(tract, *idx);
      if (t == nullptr) continue;
      const int64_t v = (*t)[s.table(*idx).total_cell];
      if (v != kSuppressed && v != total) {
        problems.push_back(tract + " " + tract_name + " total " + std::to_string(v) +
                           " differs from block sum " + std::to_string(total));
      }
    }
  }
  return problems;
}

std::filesystem::path SchemaSidecar(const std::filesystem::path& bundle_path) {
  auto p = bundle_path;
  p += ".schema";
  return p;
}

void WriteBundle(const TableBundle& bundle, const std::filesystem::path& path) {
  const Schema& s = bundle.schema();
  std::vector<size_t> order(s.tables().size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return s.table(a).name < s.table(b).name; });
  {
    CsvWriter w(path);
    w.Row({"geocode", "table", "cell_index", "count"});
    for (const auto& [geo, tables] : bundle.geos()) {
      for (size_t ti : order) {
        if (ti >= tables.size() || tables[ti].empty()) continue;
        const auto& t = tables[ti];
        for (size_t c = 0; c < t.size(); ++c) {
          if (c != 0 && t[c] == 0) continue;
          w.Row({geo, s.table(ti).name, std::to_string(c),
                 t[c] == kSuppressed ? std::string("S") : std::to_string(t[c])});
        }
      }
    }
  }
  WriteFile(SchemaSidecar(path), s.ToDsl());
}

TableBundle ReadBundle(const std::filesystem::path& path) {
  std::shared_ptr<const Schema> schema;
  const auto sidecar = SchemaSidecar(path);
  if (std::filesystem::exists(sidecar)) {
    auto parsed = std::make_shared<Schema>(Schema::Parse(ReadFile(sidecar)));
    if (parsed->ToDsl() == Schema::Default().ToDsl()) {
      schema = TableBundle().schema_ptr();
    } else {
      schema = std::move(parsed);
    }
  } else {
    schema = TableBundle().schema_ptr();
  }
  TableBundle bundle(schema);
  const CsvTable csv = ReadCsv(path);
  const size_t cg = csv.Column("geocode"), ct = csv.Column("table"), cc = csv.Column("cell_index"),
               cn = csv.Column("count");
  for (const auto& row : csv.rows) {
    const size_t ti = schema->IndexOf(row[ct]);
    auto& t = bundle.Mutable(row[cg], ti);
    const int64_t c = ParseInt(row[cc]);
    if (c < 0 || c >= static_cast<int64_t>(t.size())) {
      throw IoError("cell index out of range in " + path.string() + ": " + row[ct] + "[" + row[cc] + "]");
    }
    t[c] = row[cn] == "S" ? kSuppressed : ParseInt(row[cn]);
  }
  return bundle;
}

}  // namespace reconlab
