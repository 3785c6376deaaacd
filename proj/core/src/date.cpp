#include "epipanel/date.hpp"

#include <cctype>
#include <cstdio>

#include "epipanel/errors.hpp"

namespace epipanel {

namespace {

int parse_int(const std::string& s, size_t pos, size_t len) {
    int v = 0;
    for (size_t i = pos; i < pos + len; ++i) {
        if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i])))
            throw DomainError("malformed date: '" + s + "'");
        v = v * 10 + (s[i] - '0');
    }
    return v;
}

}  // namespace

Date make_date(int year, unsigned month, unsigned day) {
    std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                    std::chrono::day{day}};
    if (!ymd.ok()) throw DomainError("invalid calendar date");
    return Date{ymd};
}

Date parse_date(const std::string& text) {
    int y, m, d;
    if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
        y = parse_int(text, 0, 4);
        m = parse_int(text, 5, 2);
        d = parse_int(text, 8, 2);
    } else if (text.size() == 8) {
        y = parse_int(text, 0, 4);
        m = parse_int(text, 4, 2);
        d = parse_int(text, 6, 2);
    } else {
        throw DomainError("malformed date: '" + text + "'");
    }
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                    std::chrono::day{unsigned(d)}};
    if (!ymd.ok()) throw DomainError("invalid calendar date: '" + text + "'");
    return Date{ymd};
}

std::string format_date(Date d) {
    std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
}

int weekday_index(Date d) {
    // chrono ISO encoding: Monday = 1 ... Sunday = 7.
    return int(std::chrono::weekday{d}.iso_encoding()) - 1;
}

Season season_of(Date d) {
    unsigned m = unsigned(std::chrono::year_month_day{d}.month());
    if (m == 12 || m <= 2) return Season::Winter;
    if (m <= 5) return Season::Spring;
    if (m <= 8) return Season::Summer;
    return Season::Autumn;
}

const char* season_name(Season s) {
    switch (s) {
        case Season::Winter: return "winter";
        case Season::Spring: return "spring";
        case Season::Summer: return "summer";
        case Season::Autumn: return "autumn";
    }
    return "?";
}

Date add_months(Date d, int months) {
    using namespace std::chrono;
    year_month_day ymd{d};
    year_month ym = ymd.year() / ymd.month();
    ym += std::chrono::months{months};
    unsigned day = unsigned(ymd.day());
    year_month_day_last last{ym.year(), month_day_last{ym.month()}};
    unsigned max_day = unsigned(last.day());
    if (day > max_day) day = max_day;
    return Date{year_month_day{ym.year(), ym.month(), std::chrono::day{day}}};
}

DateRange::DateRange(Date start, Date end) : start(start), end(end) {
    if (start > end)
        throw DomainError("date range start " + format_date(start) + " after end " +
                          format_date(end));
}

}  // namespace epipanel
