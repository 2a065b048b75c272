#pragma once

// Small file and formatting helpers shared by the exporters.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace phishsim::io {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// Quotes a CSV field when it contains a comma, quote or line break.
std::string csv_field(std::string_view s);
/// Splits one CSV record (RFC 4180 quoting, no embedded line breaks).
std::vector<std::string> csv_split(std::string_view line);

std::string read_file(const std::filesystem::path& path);
/// Lines without terminators; a trailing empty line is dropped.
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

}  // namespace phishsim::io
