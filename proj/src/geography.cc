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

#include "reconlab/geography.h"

#include <algorithm>
#include <cstdio>

#include "reconlab/csv.h"
#include "reconlab/rng.h"

namespace reconlab {

std::string Geocode::str() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02u%03u%06u%04u", unsigned{state}, unsigned{county},
                unsigned{tract}, unsigned{block});
  return buf;
}

std::string Geocode::tract_code() const { return str().substr(0, 11); }

std::string Geocode::block_group_code() const { return str().substr(0, 12); }

Geocode ParseGeocode(std::string_view s) {
  if (s.size() != 15) {
    throw MalformedGeocode("geocode must have 15 digits: '" + std::string(s) + "'");
  }
  for (char c : s) {
    if (c < '0' || c > '9') {
      throw MalformedGeocode("geocode must be decimal digits: '" + std::string(s) + "'");
    }
  }
  auto num = [&](size_t off, size_t len) {
    uint32_t v = 0;
    for (size_t i = off; i < off + len; ++i) v = v * 10 + static_cast<uint32_t>(s[i] - '0');
    return v;
  };
  Geocode g;
  g.state = static_cast<uint16_t>(num(0, 2));
  g.county = static_cast<uint16_t>(num(2, 3));
  g.tract = num(5, 6);
  g.block = static_cast<uint16_t>(num(11, 4));
  return g;
}

std::string TractOf(const Geocode& b) { return b.tract_code(); }

GeoUniverse::GeoUniverse(std::vector<BlockEntry> blocks) : blocks_(std::move(blocks)) {
  std::map<std::string, size_t> bg_index;
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const auto& e = blocks_[i];
    if (e.population < 0) throw std::invalid_argument("negative block population");
    if (!index_.emplace(e.geocode, i).second) {
      throw std::invalid_argument("duplicate block geocode " + e.geocode.str());
    }
    const std::string t = e.geocode.tract_code();
    auto [it, inserted] = tract_blocks_.try_emplace(t);
    if (inserted) tracts_.push_back(t);
    it->second.push_back(i);
    bg_index.try_emplace(e.geocode.block_group_code(), bg_index.size());
  }
  std::sort(tracts_.begin(), tracts_.end());
  std::map<std::string, size_t> tract_pos;
  for (size_t t = 0; t < tracts_.size(); ++t) tract_pos[tracts_[t]] = t;
  block_tract_.resize(blocks_.size());
  block_bg_.resize(blocks_.size());
  for (size_t i = 0; i < blocks_.size(); ++i) {
    block_tract_[i] = tract_pos[blocks_[i].geocode.tract_code()];
    block_bg_[i] = bg_index[blocks_[i].geocode.block_group_code()];
  }
  num_block_groups_ = bg_index.size();
}

int64_t GeoUniverse::IndexOf(const Geocode& g) const {
  auto it = index_.find(g);
  return it == index_.end() ? -1 : static_cast<int64_t>(it->second);
}

const std::vector<size_t>& GeoUniverse::BlocksInTract(const std::string& tract) const {
  static const std::vector<size_t> kEmpty;
  auto it = tract_blocks_.find(tract);
  return it == tract_blocks_.end() ? kEmpty : it->second;
}

int64_t GeoUniverse::TotalPopulation() const {
  int64_t total = 0;
  for (const auto& b : blocks_) total += b.population;
  return total;
}

GeoUniverse ReadGeographyManifest(const std::filesystem::path& path) {
  const CsvTable t = ReadCsv(path);
  if (t.header.empty()) throw IoError("geography manifest has no header: " + path.string());
  const size_t gc = t.Column("block_geocode");
  const size_t pc = t.Column("population_hint");
  std::vector<BlockEntry> blocks;
  blocks.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    blocks.push_back({ParseGeocode(row[gc]), ParseInt(row[pc])});
  }
  return GeoUniverse(std::move(blocks));
}

void WriteGeographyManifest(const GeoUniverse& universe, const std::filesystem::path& path) {
  CsvWriter w(path);
  w.Row({"block_geocode", "population_hint"});
  for (const auto& b : universe.blocks()) {
    w.Row({b.geocode.str(), std::to_string(b.population)});
  }
}

GeoUniverse MakeSyntheticUniverse(const UniverseShape& shape, uint64_t seed) {
  if (shape.block_sizes.empty() || shape.block_sizes.size() != shape.size_weights.size()) {
    throw std::invalid_argument("block size distribution malformed");
  }
  Rng rng(seed);
  std::vector<BlockEntry> blocks;
  for (int t = 0; t < shape.tracts; ++t) {
    for (int b = 0; b < shape.blocks_per_tract; ++b) {
      Geocode g;
      g.state = shape.state;
      g.county = shape.county;
      g.tract = static_cast<uint32_t>(100 + t);
      // Ten blocks per block group.
      g.block = static_cast<uint16_t>(1000 * (1 + b / 10) + b % 10);
      const int64_t pop = shape.block_sizes[rng.Categorical(shape.size_weights)];
      blocks.push_back({g, pop});
    }
  }
  return GeoUniverse(std::move(blocks));
}

}  // namespace reconlab
