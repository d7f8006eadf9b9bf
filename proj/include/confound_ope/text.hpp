#pragma once

// Small text helpers shared by the CSV and config readers.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace confound_ope {

// "%.17g": 17 significant digits, used by every file writer.
std::string format_double(double v);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Throw ValidationError naming `what` on malformed input.
double parse_double(std::string_view s, std::string_view what);
std::uint64_t parse_uint(std::string_view s, std::string_view what);
std::vector<double> parse_double_list(std::string_view s, std::string_view what);

} // namespace confound_ope
