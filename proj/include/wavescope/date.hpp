#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

namespace wavescope {

/// A UTC calendar day.
class Date {
public:
    constexpr Date() = default;
    constexpr Date(int y, unsigned m, unsigned d)
        : days_(std::chrono::sys_days{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}})
    {}
    constexpr explicit Date(std::chrono::sys_days d) : days_(d) {}

    static constexpr Date from_epoch_days(std::int64_t n) { return Date(std::chrono::sys_days{std::chrono::days{n}}); }

    /// Calendar day containing the given Unix time.
    static constexpr Date from_epoch_seconds(std::int64_t s)
    {
        return from_epoch_days(s >= 0 ? s / 86400 : -((-s + 86399) / 86400));
    }

    constexpr std::int64_t epoch_days() const noexcept { return days_.time_since_epoch().count(); }
    constexpr std::int64_t epoch_seconds() const noexcept { return epoch_days() * 86400; }
    constexpr std::chrono::sys_days sys_days() const noexcept { return days_; }

    constexpr Date operator+(std::int64_t n) const { return from_epoch_days(epoch_days() + n); }
    constexpr Date operator-(std::int64_t n) const { return from_epoch_days(epoch_days() - n); }
    constexpr std::int64_t operator-(Date o) const { return epoch_days() - o.epoch_days(); }

    constexpr auto operator<=>(const Date&) const = default;

    std::string iso() const
    {
        const std::chrono::year_month_day ymd{days_};
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
        return buf;
    }

    /// Parses `text` with a strftime-style pattern ("%Y-%m-%d", "%m/%d/%Y", "%b %d, %Y").
    static std::optional<Date> parse(std::string_view text, std::string_view pattern = "%Y-%m-%d")
    {
        std::tm tm{};
        tm.tm_mday = 0;
        std::istringstream in{std::string(text)};
        in.imbue(std::locale::classic());
        in >> std::get_time(&tm, std::string(pattern).c_str());
        if (in.fail())
            return std::nullopt;
        in >> std::ws;
        if (!in.eof())
            return std::nullopt;
        const std::chrono::year_month_day ymd{std::chrono::year{tm.tm_year + 1900},
                                              std::chrono::month{static_cast<unsigned>(tm.tm_mon + 1)},
                                              std::chrono::day{static_cast<unsigned>(tm.tm_mday)}};
        if (!ymd.ok())
            return std::nullopt;
        return Date(std::chrono::sys_days{ymd});
    }

    static std::optional<Date> parse_iso(std::string_view text) { return parse(text, "%Y-%m-%d"); }

private:
    std::chrono::sys_days days_{};
};

} // namespace wavescope
