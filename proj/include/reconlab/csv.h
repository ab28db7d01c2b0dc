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

#ifndef RECONLAB_CSV_H_
#define RECONLAB_CSV_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace reconlab {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// RFC 4180 writer with LF line endings.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);

  void Row(std::initializer_list<std::string_view> fields);
  void Row(const std::vector<std::string>& fields);

 private:
  void Field(std::string_view f, bool first);
  std::ofstream out_;
  std::filesystem::path path_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by name; throws IoError if absent.
  size_t Column(std::string_view name) const;
};

// Parses RFC 4180 text (quoted fields, doubled quotes, CRLF tolerated).
CsvTable ParseCsv(std::string_view text);
CsvTable ReadCsv(const std::filesystem::path& path);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view content);

int64_t ParseInt(std::string_view s);
double ParseDouble(std::string_view s);

}  // namespace reconlab

#endif  // RECONLAB_CSV_H_
