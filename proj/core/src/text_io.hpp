// Small CSV and number helpers shared by the manifest, embedding and cache
// readers. Internal to the core library.
#ifndef VOCALSCREEN_SRC_TEXT_IO_HPP_
#define VOCALSCREEN_SRC_TEXT_IO_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vocalscreen::detail {

// Splits one CSV record. Supports double-quoted fields with "" escapes;
// a trailing '\r' is dropped.
std::vector<std::string> split_csv_line(std::string_view line);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Shortest-safe fixed rendering: 17 significant digits.
std::string format_double(double v);

// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);

// 64-bit FNV-1a of the bytes, as 16 lower-case hex digits.
std::string fnv1a_hex(std::string_view bytes);

std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace vocalscreen::detail

#endif  // VOCALSCREEN_SRC_TEXT_IO_HPP_
