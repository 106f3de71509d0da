#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace wsd::strings {

std::string_view trim(std::string_view s);

// Split on a single delimiter character; keeps empty fields.
std::vector<std::string> split(std::string_view s, char delim);

// Split on runs of whitespace; drops empty fields.
std::vector<std::string> split_ws(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with(std::string_view s, std::string_view prefix);

}  // namespace wsd::strings
