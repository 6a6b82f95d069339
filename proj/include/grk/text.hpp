#pragma once

// Small text helpers shared by the plain-text file formats.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace grk::text {

std::vector<std::string_view> split_ws(std::string_view line);
std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

// Throws a data error naming `what` when `tok` is not a complete finite number.
double parse_double(std::string_view tok, std::string_view what);
long long parse_int(std::string_view tok, std::string_view what);

// Shortest decimal representation that reads back to the same double.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);
std::vector<std::uint8_t> read_binary(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

} // namespace grk::text
