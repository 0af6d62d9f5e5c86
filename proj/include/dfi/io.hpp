#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dfi::io {

/// Shortest round-trip decimal representation; "nan"/"inf"/"-inf" for non-finite values.
std::string format_double(double value);

/// Parses a real number, accepting "nan", "inf" and "-inf". Throws ValidationError with `context`.
double parse_double(std::string_view text, std::string_view context);
long long parse_integer(std::string_view text, std::string_view context);

std::string trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char delimiter);

/// One parsed CSV row with its 1-based line number in the source file.
struct CsvRow {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

/// Minimal CSV table: comma separated, no quoting, blank lines and lines starting with '#' skipped.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<CsvRow> rows;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text, std::string_view source_name);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t value);

} // namespace dfi::io
