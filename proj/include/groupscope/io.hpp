// Copyright 2026 The GroupScope Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GROUPSCOPE_IO_HPP_
#define GROUPSCOPE_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace groupscope::io {

std::string read_file(const std::filesystem::path& path);

// Writes through a temporary sibling and renames it into place, so readers
// never observe a partially written file.
void write_atomic(const std::filesystem::path& path, std::string_view content);

// Appends one line and flushes it to stable storage before returning.
void append_line_durable(const std::filesystem::path& path, std::string_view line);

std::string sha256_hex(std::string_view data);
std::string file_sha256(const std::filesystem::path& path);

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);
// Fixed notation with `decimals` digits; never prints "-0.000".
std::string format_fixed(double v, int decimals);

// UTC timestamp in ISO-8601. Honors SOURCE_DATE_EPOCH for reproducible runs.
std::string utc_timestamp();

// RFC 4180 CSV. Quoted fields may contain separators, quotes and newlines.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<size_t> row_lines;  // 1-based physical line where each row starts
};

CsvTable parse_csv(std::string_view content);
std::string csv_escape(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);

// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string> split_lines(std::string_view content);

}  // namespace groupscope::io

#endif  // GROUPSCOPE_IO_HPP_
