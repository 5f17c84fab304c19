#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>

namespace wavescope {

/// Shortest decimal text that parses back to exactly `x`.
inline std::string format_shortest(double x)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// Whole-string decimal parse; rejects leading '+', whitespace and trailing junk.
inline std::optional<double> parse_double(std::string_view s)
{
    if (s.empty())
        return std::nullopt;
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

inline std::string_view trim(std::string_view s)
{
    constexpr std::string_view ws = " \t\r\n\xEF\xBB\xBF";
    while (!s.empty() && ws.find(s.front()) != std::string_view::npos)
        s.remove_prefix(1);
    while (!s.empty() && ws.find(s.back()) != std::string_view::npos)
        s.remove_suffix(1);
    return s;
}

} // namespace wavescope
