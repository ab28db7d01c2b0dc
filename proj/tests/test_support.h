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

// Small helpers shared by the unit tests.

#ifndef RECONLAB_TESTS_TEST_SUPPORT_H_
#define RECONLAB_TESTS_TEST_SUPPORT_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "reconlab/geography.h"
#include "reconlab/population.h"

namespace reconlab::testing {

inline std::string Fixture(const std::string& name) {
  return std::string(RECONLAB_FIXTURES) + "/" + name;
}

// Universe holding exactly the blocks that appear in `pop`.
inline GeoUniverse UniverseOf(const std::vector<PersonRecord>& pop) {
  std::map<Geocode, int64_t> sizes;
  for (const auto& r : pop) ++sizes[r.block];
  std::vector<BlockEntry> blocks;
  for (const auto& [g, n] : sizes) blocks.push_back({g, n});
  return GeoUniverse(blocks);
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path ScratchDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("reconlab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline PopulationSpec DefaultSpec(const GeoUniverse& universe, uint64_t seed) {
  PopulationSpec spec;
  spec.universe = universe;
  spec.mixture = DefaultMixture();
  spec.age_weights = DefaultAgeWeights();
  spec.seed = seed;
  return spec;
}

}  // namespace reconlab::testing

#endif  // RECONLAB_TESTS_TEST_SUPPORT_H_
