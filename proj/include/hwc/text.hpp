#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

namespace hwc::text {

std::string to_lower_ascii(std::string_view s);

// Leading/trailing ASCII whitespace removed.
std::string_view trim(std::string_view s);

// Trim plus every internal whitespace run collapsed to one space.
std::string collapse_ws(std::string_view s);

// Case-fold + whitespace-collapse; the equivalence used when deduplicating
// stored values.
std::string fold_value(std::string_view s);

// Case-fold + whitespace-collapse + punctuation stripped; the equivalence
// used for record identity keys.
std::string fold_key(std::string_view s);

bool contains_ci(std::string_view haystack, std::string_view needle);
bool equals_ci(std::string_view a, std::string_view b);

std::vector<std::string> split(std::string_view s, char sep);

// Replaces invalid UTF-8 sequences with U+FFFD so downstream code can rely
// on well-formed text.
std::string sanitize_utf8(std::string_view bytes);

// ISO-8859-1 / Windows-1252 to UTF-8.
std::string latin1_to_utf8(std::string_view bytes);
std::string win1252_to_utf8(std::string_view bytes);

std::string iso8601_utc(std::chrono::system_clock::time_point tp);

}  // namespace hwc::text
