#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace newsent {

struct CalDate {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const CalDate&) const = default;

    // Accepts YYYY-MM-DD; anything after a 'T' or space (a time component)
    // is dropped. Rejects impossible dates, leap years handled.
    static std::optional<CalDate> parse(std::string_view s);

    std::string to_string() const;
};

bool is_leap_year(int year);
int days_in_month(int year, int month);

struct Quarter {
    int year = 0;
    int q = 0; // 1..4

    auto operator<=>(const Quarter&) const = default;

    static Quarter from_date(const CalDate& d);
    static std::optional<Quarter> parse(std::string_view s); // "YYYY-Qn"

    std::string to_string() const;
    Quarter next() const;
};

struct DateWindow {
    CalDate begin; // inclusive
    CalDate end;   // inclusive

    bool contains(const CalDate& d) const { return begin <= d && d <= end; }

    static DateWindow pre_pandemic(); // 2018-01-01 .. 2019-12-31
    static DateWindow pandemic();     // 2020-01-01 .. 2022-03-31

    // All quarters intersecting the window, ascending.
    std::vector<Quarter> quarters() const;
};

} // namespace newsent
