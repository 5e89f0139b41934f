#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ufcsim {

/// One parsed CSV row; `line` is the 1-based line number in the source file.
struct CsvRow {
    int line = 0;
    std::vector<std::string> fields;
};

/// Parsed CSV document: header names plus data rows. Lines starting with '#'
/// are treated as comments and skipped.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<CsvRow> rows;
};

std::string slurp_file(const std::string& path);

CsvTable parse_csv(const std::string& text, const std::string& source_name);
CsvTable read_csv(const std::string& path);

/// Parse a floating point field; throws ParseError naming the line on failure.
double parse_double_field(const std::string& field, const std::string& source_name, int line);

/// Shortest round-trippable decimal text for a double, locale-independent.
std::string format_double(double v);

/// FNV-1a 64-bit over a byte string; used for output provenance hashes.
std::uint64_t fnv1a64(const std::string& bytes);

std::string hash_hex(std::uint64_t h);

void write_text_file(const std::string& path, const std::string& content);

} // namespace ufcsim
