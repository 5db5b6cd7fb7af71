#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tagsense::textio {

// Fixed-point decimal with `digits` fraction digits.
std::string format_fixed(double value, int digits);

// Shortest decimal that parses back to exactly `value`.
std::string format_shortest(double value);
std::string format_shortest(float value);

// Whole-string parses; std::nullopt on any trailing garbage or empty input.
std::optional<double> parse_double(std::string_view text);
std::optional<float> parse_float(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char delim);
std::string_view trim(std::string_view text);

// Splits text into lines, accepting LF and stripping a trailing CR.
std::vector<std::string_view> lines(std::string_view text);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

}  // namespace tagsense::textio
