#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lou {

std::string to_lower(std::string_view text);
std::string_view trim(std::string_view text);
std::vector<std::string_view> split_lines(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char sep);

// Whole-token parse; rejects trailing garbage.
std::optional<double> parse_double(std::string_view token);

// Shortest representation that round-trips exactly.
std::string format_double(double value);

}  // namespace lou
