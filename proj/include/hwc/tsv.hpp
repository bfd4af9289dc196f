#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hwc::tsv {

// Tab-separated rows with backslash escapes so tabs and newlines can live
// inside cells: \t \n \r \\ are the only recognized escapes.

std::string escape_field(std::string_view raw);
std::string unescape_field(std::string_view escaped);

std::string format_row(const std::vector<std::string>& cells);
std::vector<std::string> parse_row(std::string_view line);

// Splits on '\n', tolerating a trailing newline and CRLF endings.
std::vector<std::string> split_lines(std::string_view content);

std::string read_file(const std::string& path);           // throws std::runtime_error
void write_file(const std::string& path, std::string_view content);

}  // namespace hwc::tsv
