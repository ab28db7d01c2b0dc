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

#ifndef RECONLAB_GEOGRAPHY_H_
#define RECONLAB_GEOGRAPHY_H_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace reconlab {

class MalformedGeocode : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A census block geocode: state(2) county(3) tract(6) block(4). The block
// group is the first digit of the block code.
struct Geocode {
  uint16_t state = 0;
  uint16_t county = 0;
  uint32_t tract = 0;
  uint16_t block = 0;

  int block_group() const { return block / 1000; }

  // 15-digit canonical form.
  std::string str() const;
  // First 11 digits.
  std::string tract_code() const;
  // First 12 digits (tract + block group digit).
  std::string block_group_code() const;

  auto operator<=>(const Geocode&) const = default;
};

Geocode ParseGeocode(std::string_view s);

// The 11-character tract prefix of a block geocode string.
std::string TractOf(const Geocode& b);

struct BlockEntry {
  Geocode geocode;
  int64_t population = 0;
};

// Ordered set of blocks with derived tract and block-group indexes.
// Immutable after construction.
class GeoUniverse {
 public:
  GeoUniverse() = default;
  explicit GeoUniverse(std::vector<BlockEntry> blocks);

  const std::vector<BlockEntry>& blocks() const { return blocks_; }
  size_t size() const { return blocks_.size(); }
  const Geocode& block(size_t i) const { return blocks_[i].geocode; }

  // Index of a block, or -1.
  int64_t IndexOf(const Geocode& g) const;
  bool Contains(const Geocode& g) const { return IndexOf(g) >= 0; }

  const std::vector<std::string>& tracts() const { return tracts_; }
  // Block indexes of a tract, ascending.
  const std::vector<size_t>& BlocksInTract(const std::string& tract) const;
  size_t TractIndexOfBlock(size_t block_index) const { return block_tract_[block_index]; }
  size_t BlockGroupIndexOfBlock(size_t block_index) const { return block_bg_[block_index]; }
  size_t num_block_groups() const { return num_block_groups_; }

  int64_t TotalPopulation() const;

 private:
  std::vector<BlockEntry> blocks_;
  std::map<Geocode, size_t> index_;
  std::vector<std::string> tracts_;
  std::map<std::string, std::vector<size_t>> tract_blocks_;
  std::vector<size_t> block_tract_;
  std::vector<size_t> block_bg_;
  size_t num_block_groups_ = 0;
};

// Manifest file: header `block_geocode,population_hint`.
GeoUniverse ReadGeographyManifest(const std::filesystem::path& path);
void WriteGeographyManifest(const GeoUniverse& universe, const std::filesystem::path& path);

// Synthetic universe: `tracts` tracts in one county, each with
// `blocks_per_tract` blocks whose populations are drawn from `block_sizes`
// (values) with `size_weights` (weights).
struct UniverseShape {
  int tracts = 1;
  int blocks_per_tract = 5;
  std::vector<int64_t> block_sizes = {5, 20, 60};
  std::vector<double> size_weights = {1.0, 1.0, 1.0};
  uint16_t state = 1;
  uint16_t county = 1;
};

GeoUniverse MakeSyntheticUniverse(const UniverseShape& shape, uint64_t seed);

}  // namespace reconlab

#endif  // RECONLAB_GEOGRAPHY_H_
