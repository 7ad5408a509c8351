#include "cshock/calendar.hpp"

#include <charconv>
#include <cstdio>

#include "cshock/errors.hpp"

namespace cshock {

Date parse_date(std::string_view text) {
    auto bad = [&] { return InvalidInput("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)"); };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
    int y = 0;
    unsigned m = 0, d = 0;
    auto num = [&](std::size_t pos, std::size_t len, auto& out) {
        auto res = std::from_chars(text.data() + pos, text.data() + pos + len, out);
        if (res.ec != std::errc{} || res.ptr != text.data() + pos + len) throw bad();
    };
    num(0, 4, y);
    num(5, 2, m);
    num(8, 2, d);
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw bad();
    return Date(ymd);
}

std::string format_date(Date d) {
    const std::chrono::year_month_day ymd(d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

}  // namespace cshock
