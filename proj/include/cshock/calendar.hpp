#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace cshock {

using Date = std::chrono::sys_days;

// Strict YYYY-MM-DD. Throws InvalidInput.
Date parse_date(std::string_view text);
std::string format_date(Date d);

inline bool is_monday(Date d) { return std::chrono::weekday(d) == std::chrono::Monday; }

}  // namespace cshock
