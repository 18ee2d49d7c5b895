#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tempofeat {

/// Minimal comma-separated table. No quoting: fields must not contain commas
/// or newlines, which holds for every schema this toolkit reads or writes.
struct CsvTable {
  std::string path;  // for error messages
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Read a CSV file with a mandatory header row. Throws ParseError on ragged
/// rows or a missing/empty file.
CsvTable read_csv(const std::filesystem::path& path);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

/// Strict field parsers; `line` is 1-based including the header row.
std::int64_t parse_int_field(const std::string& s, const std::string& file,
                             std::size_t line, const std::string& column);
double parse_double_field(const std::string& s, const std::string& file, std::size_t line,
                          const std::string& column);

/// FNV-1a 64-bit, used for config/data fingerprints.
std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(const std::string& s, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace tempofeat
