#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epipanel/date.hpp"

namespace epipanel {

enum class Variable {
    NewCases,
    NewDeaths,
    NewDocuments,
    TrendsIndex,
    VaccinatedPct,
    StringencyIndex,
    Derived,
};

enum class Cadence { Daily, Weekly };

const char* variable_name(Variable v);
const char* cadence_name(Cadence c);

/// One country's dated observations of a single variable, contiguous at the
/// declared cadence. Gaps in the calendar are explicit missing entries, never
/// zeros (zero is a meaningful count).
struct Series {
    std::string country;  // ISO 3166 alpha-2
    Variable variable = Variable::Derived;
    Cadence cadence = Cadence::Daily;
    Date start{};
    std::vector<std::optional<double>> values;

    int step_days() const { return cadence == Cadence::Weekly ? 7 : 1; }
    std::size_t size() const { return values.size(); }
    Date date_at(std::size_t i) const { return start + std::chrono::days{long(i) * step_days()}; }
    Date end_date() const;

    /// Index of `d` in this series; nullopt when off-grid or out of range.
    std::optional<std::size_t> index_of(Date d) const;
    std::optional<double> at(Date d) const;

    std::string label() const { return std::string(variable_name(variable)) + "/" + country; }
};

/// Checks the type invariants (SI in [0,100], counts non-negative).
/// Throws DomainError naming the first offending date.
void validate_series(const Series& s);

/// Right-aligned rolling mean. Output[t] = mean(s[t-window+1 .. t]) when the
/// whole span is present; the first window-1 positions and any span touching
/// a missing value are missing.
Series rolling_mean(const Series& s, int window);

/// ln(1 + x) on every present value. Present negative values are a domain
/// error naming the date and country.
Series log1p_transform(const Series& s);

/// First difference with negative results clamped to 0 (downward corrections
/// in cumulative sources are reporting artefacts, and the log transform needs
/// non-negative input). First entry missing.
Series diff(const Series& s);

/// Collapses a daily series to weekly: each output value is the mean of the 7
/// daily values in the week ending on the anchor weekday (0 = Monday ... 6 =
/// Sunday). Weeks with any missing day are missing.
Series resample_weekly(const Series& s, int anchor_weekday);

/// Crops every series to exactly `range`. All series must share a cadence and
/// cover the range on-grid; otherwise throws CadenceError/CoverageError
/// listing the offending series.
std::vector<Series> align(const std::vector<Series>& list, const DateRange& range);

}  // namespace epipanel
