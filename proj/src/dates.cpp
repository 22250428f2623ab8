#include "newsent/dates.hpp"

#include "newsent/util.hpp"

#include <cstdio>

namespace newsent {

bool is_leap_year(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
    static const int days[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month < 1 || month > 12) return 0;
    if (month == 2 && is_leap_year(year)) return 29;
    return days[month - 1];
}

std::optional<CalDate> CalDate::parse(std::string_view s) {
    s = trim(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == 'T' || s[i] == ' ') {
            s = s.substr(0, i);
            break;
        }
    }
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto digits = [](std::string_view t) {
        for (char c : t)
            if (c < '0' || c > '9') return false;
        return true;
    };
    if (!digits(s.substr(0, 4)) || !digits(s.substr(5, 2)) || !digits(s.substr(8, 2)))
        return std::nullopt;
    CalDate d;
    d.year = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
    d.month = (s[5] - '0') * 10 + (s[6] - '0');
    d.day = (s[8] - '0') * 10 + (s[9] - '0');
    if (d.month < 1 || d.month > 12) return std::nullopt;
    if (d.day < 1 || d.day > days_in_month(d.year, d.month)) return std::nullopt;
    return d;
}

std::string CalDate::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

Quarter Quarter::from_date(const CalDate& d) {
    return Quarter{d.year, (d.month - 1) / 3 + 1};
}

std::optional<Quarter> Quarter::parse(std::string_view s) {
    s = trim(s);
    if (s.size() != 7 || s[4] != '-' || (s[5] != 'Q' && s[5] != 'q')) return std::nullopt;
    for (int i : {0, 1, 2, 3, 6})
        if (s[i] < '0' || s[i] > '9') return std::nullopt;
    Quarter q;
    q.year = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
    q.q = s[6] - '0';
    if (q.q < 1 || q.q > 4) return std::nullopt;
    return q;
}

std::string Quarter::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-Q%d", year, q);
    return buf;
}

Quarter Quarter::next() const {
    if (q == 4) return Quarter{year + 1, 1};
    return Quarter{year, q + 1};
}

DateWindow DateWindow::pre_pandemic() {
    return DateWindow{CalDate{2018, 1, 1}, CalDate{2019, 12, 31}};
}

DateWindow DateWindow::pandemic() {
    return DateWindow{CalDate{2020, 1, 1}, CalDate{2022, 3, 31}};
}

std::vector<Quarter> DateWindow::quarters() const {
    std::vector<Quarter> out;
    if (end < begin) return out;
    Quarter q = Quarter::from_date(begin);
    Quarter last = Quarter::from_date(end);
    while (q <= last) {
        out.push_back(q);
        q = q.next();
    }
    return out;
}

} // namespace newsent
