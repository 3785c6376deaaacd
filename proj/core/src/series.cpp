#include "epipanel/series.hpp"

#include <cmath>

#include "epipanel/errors.hpp"

namespace epipanel {

const char* variable_name(Variable v) {
    switch (v) {
        case Variable::NewCases: return "cases";
        case Variable::NewDeaths: return "deaths";
        case Variable::NewDocuments: return "documents";
        case Variable::TrendsIndex: return "trends";
        case Variable::VaccinatedPct: return "vaccinated_pct";
        case Variable::StringencyIndex: return "stringency";
        case Variable::Derived: return "derived";
    }
    return "?";
}

const char* cadence_name(Cadence c) { return c == Cadence::Weekly ? "weekly" : "daily"; }

Date Series::end_date() const {
    if (values.empty()) throw LengthError("empty series " + label());
    return date_at(values.size() - 1);
}

std::optional<std::size_t> Series::index_of(Date d) const {
    long delta = (d - start).count();
    int step = step_days();
    if (delta < 0 || delta % step != 0) return std::nullopt;
    std::size_t i = std::size_t(delta / step);
    if (i >= values.size()) return std::nullopt;
    return i;
}

std::optional<double> Series::at(Date d) const {
    auto i = index_of(d);
    if (!i) return std::nullopt;
    return values[*i];
}

void validate_series(const Series& s) {
    bool bounded = s.variable == Variable::StringencyIndex;
    bool count = s.variable == Variable::NewCases || s.variable == Variable::NewDeaths ||
                 s.variable == Variable::NewDocuments;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (!s.values[i]) continue;
        double v = *s.values[i];
        if (bounded && (v < 0.0 || v > 100.0))
            throw DomainError(s.label() + " at " + format_date(s.date_at(i)) +
                              ": stringency index outside [0,100]: " + std::to_string(v));
        if (count && v < 0.0)
            throw DomainError(s.label() + " at " + format_date(s.date_at(i)) +
                              ": negative count: " + std::to_string(v));
    }
}

Series rolling_mean(const Series& s, int window) {
    if (window < 1) throw DomainError("rolling_mean: window must be >= 1");
    if (s.values.size() < std::size_t(window))
        throw LengthError("rolling_mean: series " + s.label() + " shorter than window " +
                          std::to_string(window));
    Series out = s;
    out.variable = s.variable;
    std::size_t n = s.values.size();
    for (std::size_t t = 0; t < n; ++t) {
        if (t + 1 < std::size_t(window)) {
            out.values[t] = std::nullopt;
            continue;
        }
        double sum = 0.0;
        bool complete = true;
        for (std::size_t j = t + 1 - window; j <= t; ++j) {
            if (!s.values[j]) {
                complete = false;
                break;
            }
            sum += *s.values[j];
        }
        out.values[t] = complete ? std::optional<double>(sum / window) : std::nullopt;
    }
    return out;
}

Series log1p_transform(const Series& s) {
    Series out = s;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (!s.values[i]) continue;
        double v = *s.values[i];
        if (v < 0.0)
            throw DomainError("log1p: negative value " + std::to_string(v) + " in " + s.label() +
                              " at " + format_date(s.date_at(i)));
        out.values[i] = std::log1p(v);
    }
    return out;
}

Series diff(const Series& s) {
    if (s.values.size() < 2) throw LengthError("diff: series " + s.label() + " has < 2 entries");
    Series out = s;
    out.variable = Variable::Derived;
    out.values[0] = std::nullopt;
    for (std::size_t i = 1; i < s.values.size(); ++i) {
        if (s.values[i] && s.values[i - 1]) {
            double d = *s.values[i] - *s.values[i - 1];
            out.values[i] = d < 0.0 ? 0.0 : d;
        } else {
            out.values[i] = std::nullopt;
        }
    }
    return out;
}

Series resample_weekly(const Series& s, int anchor_weekday) {
    if (s.cadence != Cadence::Daily)
        throw CadenceError("resample_weekly: input must be daily (" + s.label() + ")");
    if (s.values.empty()) throw LengthError("resample_weekly: empty series " + s.label());
    if (anchor_weekday < 0 || anchor_weekday > 6)
        throw DomainError("resample_weekly: anchor weekday out of range");

    // first anchor with a full trailing week inside the series
    long offset = (anchor_weekday - weekday_index(s.start) + 7) % 7;
    long first_anchor = offset;
    while (first_anchor < 6) first_anchor += 7;

    Series out;
    out.country = s.country;
    out.variable = s.variable;
    out.cadence = Cadence::Weekly;
    out.start = s.start + std::chrono::days{first_anchor};
    for (long a = first_anchor; a < long(s.values.size()); a += 7) {
        double sum = 0.0;
        bool complete = true;
        for (long j = a - 6; j <= a; ++j) {
            if (!s.values[std::size_t(j)]) {
                complete = false;
                break;
            }
            sum += *s.values[std::size_t(j)];
        }
        out.values.push_back(complete ? std::optional<double>(sum / 7.0) : std::nullopt);
    }
    if (out.values.empty())
        throw LengthError("resample_weekly: series " + s.label() + " has no complete week");
    return out;
}

std::vector<Series> align(const std::vector<Series>& list, const DateRange& range) {
    if (list.empty()) return {};
    Cadence cadence = list.front().cadence;
    std::string bad_cadence, bad_coverage;
    for (const auto& s : list) {
        if (s.cadence != cadence) bad_cadence += " " + s.label();
    }
    if (!bad_cadence.empty()) throw CadenceError("align: cadence mismatch:" + bad_cadence);

    std::vector<Series> out;
    out.reserve(list.size());
    for (const auto& s : list) {
        auto first = s.index_of(range.start);
        auto last = s.index_of(range.end);
        if (!first || !last) {
            bad_coverage += " " + s.label() + " [" + format_date(s.start) + ".." +
                            format_date(s.end_date()) + "]";
            continue;
        }
        Series c = s;
        c.start = range.start;
        c.values.assign(s.values.begin() + long(*first), s.values.begin() + long(*last) + 1);
        out.push_back(std::move(c));
    }
    if (!bad_coverage.empty())
        throw CoverageError("align: series not covering " + format_date(range.start) + ".." +
                            format_date(range.end) + ":" + bad_coverage);
    return out;
}

}  // namespace epipanel
