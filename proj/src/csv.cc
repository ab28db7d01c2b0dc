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

#include "reconlab/csv.h"

#include <charconv>
#include <sstream>

namespace reconlab {

CsvWriter::CsvWriter(const std::filesystem::path& path) : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("cannot open for writing: " + path.string());
}

void CsvWriter::Field(std::string_view f, bool first) {
  if (!first) out_.put(',');
  const bool quote = f.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!quote) {
    out_ << f;
    return;
  }
  out_.put('"');
  for (char c : f) {
    if (c == '"') out_.put('"');
    out_.put(c);
  }
  out_.put('"');
}

void CsvWriter::Row(std::initializer_list<std::string_view> fields) {
  bool first = true;
  for (auto f : fields) {
    Field(f, first);
    first = false;
  }
  out_.put('\n');
  if (!out_) throw IoError("write failed: " + path_.string());
}

void CsvWriter::Row(const std::vector<std::string>& fields) {
  bool first = true;
  for (const auto& f : fields) {
    Field(f, first);
    first = false;
  }
  out_.put('\n');
  if (!out_) throw IoError("write failed: " + path_.string());
}

size_t CsvTable::Column(std::string_view name) const {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw IoError("missing CSV column: " + std::string(name));
}

CsvTable ParseCsv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  size_t i = 0;
  auto end_field = [&]() {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&]() {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };
  while (i < text.size()) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      ++i;
      continue;
    }
    if (c == '"' && !field_started && field.empty()) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      // CRLF: handled on the LF.
    } else if (c == '\n') {
      end_record();
    } else {
      field.push_back(c);
      field_started = true;
    }
    ++i;
  }
  if (in_quotes) throw IoError("unterminated quoted CSV field");
  if (field_started || !field.empty() || !record.empty()) end_record();

  CsvTable t;
  if (records.empty()) return t;
  t.header = std::move(records.front());
  for (size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() == 1 && records[r][0].empty()) continue;
    if (records[r].size() != t.header.size()) {
      throw IoError("CSV row " + std::to_string(r + 1) + " has " +
                    std::to_string(records[r].size()) + " fields, expected " +
                    std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

CsvTable ReadCsv(const std::filesystem::path& path) { return ParseCsv(ReadFile(path)); }

int64_t ParseInt(std::string_view s) {
  int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw IoError("not an integer: '" + std::string(s) + "'");
  }
  return v;
}

double ParseDouble(std::string_view s) {
  try {
    size_t pos = 0;
    const std::string str(s);
    const double v = std::stod(str, &pos);
    if (pos != str.size()) throw IoError("not a number: '" + str + "'");
    return v;
  } catch (const std::logic_error&) {
    throw IoError("not a number: '" + std::string(s) + "'");
  }
}

}  // namespace reconlab
