#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rk::text {

std::string_view trim(std::string_view s) noexcept;
std::string lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b) noexcept;
std::vector<std::string> split(std::string_view s, char sep);

// Strict decimal parse of the whole (trimmed) token; nullopt on any junk.
std::optional<double> parse_double(std::string_view s) noexcept;
std::optional<long long> parse_int(std::string_view s) noexcept;

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);
// Exactly 17 significant digits, for versioned model/calibrator files.
std::string format_double17(double v);
// Fixed number of decimals, for human-facing tables and SVG coordinates.
std::string format_fixed(double v, int decimals);

std::string read_file(const std::filesystem::path& path);
// Writes atomically enough for our purposes: truncate then write, binary mode.
void write_file(const std::filesystem::path& path, std::string_view content);

// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF tolerated.
std::vector<std::vector<std::string>> parse_csv_text(std::string_view content);
std::string csv_escape(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);

} // namespace rk::text
