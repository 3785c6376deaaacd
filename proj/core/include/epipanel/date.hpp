#pragma once

#include <chrono>
#include <compare>
#include <string>

namespace epipanel {

/// Calendar date, represented as days since the Unix epoch (Gregorian).
using Date = std::chrono::sys_days;

enum class Season { Winter, Spring, Summer, Autumn };

Date make_date(int year, unsigned month, unsigned day);

/// Parses "YYYY-MM-DD" or compact "YYYYMMDD". Throws DomainError on malformed input.
Date parse_date(const std::string& text);

/// "YYYY-MM-DD"
std::string format_date(Date d);

/// 0 = Monday ... 6 = Sunday.
int weekday_index(Date d);

/// Meteorological season of the date (Dec-Feb winter, Mar-May spring, ...).
Season season_of(Date d);

const char* season_name(Season s);

/// Shifts by whole calendar months, clamping the day to the target month's length
/// (e.g. Jan 31 + 1 month -> Feb 28/29).
Date add_months(Date d, int months);

/// Inclusive calendar interval.
struct DateRange {
    Date start;
    Date end;

    DateRange(Date start, Date end);

    /// Number of calendar days, inclusive.
    long days() const { return (end - start).count() + 1; }
    bool contains(Date d) const { return d >= start && d <= end; }

    auto operator<=>(const DateRange&) const = default;
};

}  // namespace epipanel
