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

#ifndef RECONLAB_TABULATION_H_
#define RECONLAB_TABULATION_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "reconlab/geography.h"
#include "reconlab/population.h"
#include "reconlab/schema.h"

namespace reconlab {

// Value stored in place of a suppressed cell.
inline constexpr int64_t kSuppressed = -1;

class InconsistentTables : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Published cell counts keyed by geography (15-digit block or 11-digit
// tract code). Each geography holds one count vector per schema table; an
// empty vector means the table was not published there.
class TableBundle {
 public:
  using Tables = std::vector<std::vector<int64_t>>;

  TableBundle();
  explicit TableBundle(std::shared_ptr<const Schema> schema);

  const Schema& schema() const { return *schema_; }
  std::shared_ptr<const Schema> schema_ptr() const { return schema_; }

  const std::map<std::string, Tables>& geos() const { return geos_; }

  // Null when the table is absent for the geography.
  const std::vector<int64_t>* Find(const std::string& geo, size_t table) const;
  const std::vector<int64_t>* Find(const std::string& geo, std::string_view table) const;
  // Creates a zero-filled table when absent.
  std::vector<int64_t>& Mutable(const std::string& geo, size_t table);
  void Erase(const std::string& geo, size_t table);
  // All table slots of a geography, created on demand.
  Tables& MutableTables(const std::string& geo);

  bool operator==(const TableBundle& other) const;

 private:
  std::shared_ptr<const Schema> schema_;
  std::map<std::string, Tables> geos_;
};

// Names of all tables in the default schema.
std::vector<std::string> AllTableNames();

// Exact tabulation. Blocks with no records get zero-filled tables; tract
// tables are emitted for every tract of the universe. Records known only to
// an age bin can feed block tables but not tract tables.
// Throws UnknownTable, and std::invalid_argument for records outside the
// universe.
TableBundle Tabulate(const std::vector<PersonRecord>& pop, const GeoUniverse& universe,
                     const std::vector<std::string>& which);
TableBundle Tabulate(const std::vector<PersonRecord>& pop, const GeoUniverse& universe,
                     const std::vector<std::string>& which, std::shared_ptr<const Schema> schema);

// Number of published (non-suppressed) cells. With `positive_only`, only
// geographies with at least one positive cell count.
int64_t CountStatistics(const TableBundle& bundle, bool positive_only);

// Exact sex x BIN38 counts of one block, derived from P12 and P14.
// Index: sex * 38 + bin. Throws InconsistentTables on a missing or
// suppressed input cell or a nonzero reconciliation residual.
std::array<int64_t, 76> SexAgebinCounts(const TableBundle& bundle, const std::string& block);

struct FrameRow {
  Geocode block;
  Sex sex = Sex::kMale;
  uint8_t agebin = 0;
  bool operator==(const FrameRow&) const = default;
  auto operator<=>(const FrameRow&) const = default;
};

// One row per person in every block of the bundle, ordered by block, sex,
// agebin.
std::vector<FrameRow> ExpandSexAgebinFrame(const TableBundle& bundle);

// Human-readable descriptions of violated additivity or consistency
// relations; empty when the bundle is internally consistent. Suppressed
// cells are skipped.
std::vector<std::string> CheckAdditivity(const TableBundle& bundle);

// File format: `geocode,table,cell_index,count` sorted by (geocode, table
// name, cell index). Zero cells other than cell 0 are omitted; cell 0 is
// always written so that table presence survives the round trip. Suppressed
// cells are written as "S". The sidecar `<path>.schema` holds the DSL.
void WriteBundle(const TableBundle& bundle, const std::filesystem::path& path);
TableBundle ReadBundle(const std::filesystem::path& path);
std::filesystem::path SchemaSidecar(const std::filesystem::path& bundle_path);

}  // namespace reconlab

#endif  // RECONLAB_TABULATION_H_
