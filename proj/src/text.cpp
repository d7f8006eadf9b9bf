#include "confound_ope/text.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

#include "confound_ope/core.hpp"

namespace confound_ope {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_double(std::string_view s, std::string_view what) {
    const std::string t = trim(s);
    double v = 0.0;
    const auto* end = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (t.empty() || ec != std::errc{} || ptr != end) {
        throw ValidationError("cannot parse " + std::string(what) + " from '" + t + "'");
    }
    return v;
}

std::uint64_t parse_uint(std::string_view s, std::string_view what) {
    const std::string t = trim(s);
    std::uint64_t v = 0;
    const auto* end = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (t.empty() || ec != std::errc{} || ptr != end) {
        throw ValidationError("cannot parse " + std::string(what) + " from '" + t + "'");
    }
    return v;
}

std::vector<double> parse_double_list(std::string_view s, std::string_view what) {
    std::vector<double> out;
    if (trim(s).empty()) return out;
    for (const auto& item : split(s, ',')) out.push_back(parse_double(item, what));
    return out;
}

} // namespace confound_ope
