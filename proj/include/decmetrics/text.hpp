#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace decmetrics::text {

std::string_view trim(std::string_view s);

// Trim and collapse every internal whitespace run to one space.
std::string collapse_whitespace(std::string_view s);

std::string to_lower_ascii(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with_icase(std::string_view s, std::string_view prefix);

// 64-bit FNV-1a; stable across runs and platforms.
std::uint64_t fnv1a64(std::string_view s);

} // namespace decmetrics::text
