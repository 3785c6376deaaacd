#include "epipanel/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "epipanel/errors.hpp"
#include "epipanel/parallel.hpp"

namespace epipanel::analysis {

std::string Duration::text() const {
    std::string out;
    if (months > 0) out += std::to_string(months) + "m";
    if (days > 0) out += std::to_string(days) + "d";
    if (out.empty()) out = "0d";
    return out;
}

Duration parse_duration(const std::string& text) {
    Duration d;
    std::size_t i = 0;
    bool any = false;
    while (i < text.size()) {
        std::size_t j = i;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        if (j == i) throw ConfigError("bad duration '" + text + "'");
        int value = std::atoi(text.substr(i, j - i).c_str());
        char unit = j < text.size() ? text[j] : 'd';
        if (unit == 'm')
            d.months += value;
        else if (unit == 'd')
            d.days += value;
        else
            throw ConfigError("bad duration unit in '" + text + "'");
        any = true;
        i = j + (j < text.size() ? 1 : 0);
    }
    if (!any || !d.positive()) throw ConfigError("duration must be positive: '" + text + "'");
    return d;
}

Date advance(Date d, const Duration& by) {
    return add_months(d, by.months) + std::chrono::days{by.days};
}

regress::FitResult run_model(const ModelSpec& spec, const ingest::SourceData& sources,
                             regress::RobustKind robust) {
    auto panel = ingest::build_panel(spec, sources);
    return regress::fixed_effects_fit(panel, spec, robust);
}

namespace {

// Fewest significant digits (at least 2) keeping the rounded value within 1%
// of the coefficient.
std::string format_elasticity(double magnitude) {
    char buf[40];
    for (int digits = 2; digits <= 6; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, magnitude);
        double back = std::strtod(buf, nullptr);
        if (std::abs(back - magnitude) <= 0.01 * magnitude) return buf;
    }
    return buf;
}

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return s;
}

std::string dependent_phrase(const std::string& dependent) {
    if (dependent == "documents") return "document production";
    if (dependent == "trends") return "search interest";
    if (dependent.empty()) return "the dependent variable";
    return dependent;
}

}  // namespace

std::string elasticity_interpretation(const regress::FitResult& fit,
                                      const std::string& regressor) {
    auto it = fit.coefficients.find(regressor);
    if (it == fit.coefficients.end())
        throw ConfigError("fit has no regressor '" + regressor + "'");
    const double beta = it->second;
    const std::string x = lowercase(column_label(regressor));
    const std::string y = dependent_phrase(fit.dependent);
    if (std::abs(beta) < 5e-4) return "a 1% increase in " + x + " yields no change in " + y;
    const char* direction = beta > 0 ? "increase" : "decrease";
    return "a 1% increase in " + x + " yields a " + format_elasticity(std::abs(beta)) + "% " +
           direction + " in " + y;
}

namespace {

ingest::PanelDataset slice_panel(const ingest::PanelDataset& p, std::size_t t0, std::size_t t1) {
    ingest::PanelDataset out;
    out.countries = p.countries;
    out.cadence = p.cadence;
    out.dependent = p.dependent;
    out.regressors = p.regressors;
    out.start = p.date_at(t0);
    out.periods = t1 - t0 + 1;
    for (const auto& [name, m] : p.columns)
        out.columns.emplace(name, m.middleCols(long(t0), long(out.periods)));
    out.dummies = p.dummies;
    ingest::drop_aliased_dummies(out);
    return out;
}

}  // namespace

ElasticityTrajectory rolling_elasticity(const ingest::PanelDataset& panel, const ModelSpec& spec,
                                        Duration window, Duration step,
                                        regress::RobustKind robust) {
    if (!window.positive()) throw ConfigError("rolling window must be positive");
    if (!step.positive()) throw ConfigError("rolling step must be positive");
    spec.validate();

    ElasticityTrajectory traj;
    traj.regressor = spec.regressors.front();
    traj.window = window;
    traj.step = step;

    const Date panel_end = panel.end_date();
    const long grid = panel.step_days();
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (Date s = panel.start;; s = advance(s, step)) {
        Date e = advance(s, window) - std::chrono::days{1};
        if (e > panel_end) break;
        long i0 = ((s - panel.start).count() + grid - 1) / grid;
        long i1 = (e - panel.start).count() / grid;
        if (i1 >= i0) spans.emplace_back(std::size_t(i0), std::size_t(i1));
        if (!(advance(s, step) > s)) throw ConfigError("rolling step does not advance");
    }
    if (spans.empty())
        throw LengthError("rolling window " + window.text() + " is longer than the panel (" +
                          format_date(panel.start) + ".." + format_date(panel_end) + ")");

    traj.points.resize(spans.size());
    parallel_for(spans.size(), [&](std::size_t w) {
        auto sub = slice_panel(panel, spans[w].first, spans[w].second);
        auto fit = regress::fixed_effects_fit(sub, spec, robust);
        traj.points[w] = {sub.end_date(), fit.coefficients.at(traj.regressor),
                          fit.robust_se.at(traj.regressor)};
    });
    return traj;
}

const char* quadrant_name(Quadrant q) {
    switch (q) {
        case Quadrant::HighIntHighExt: return "HighInt-HighExt";
        case Quadrant::HighIntLowExt: return "HighInt-LowExt";
        case Quadrant::LowIntHighExt: return "LowInt-HighExt";
        case Quadrant::LowIntLowExt: return "LowInt-LowExt";
    }
    return "?";
}

namespace {

Quadrant quadrant_of(double b1, double b2, double bound1, double bound2) {
    const bool hi_int = b1 >= bound1;
    const bool hi_ext = b2 >= bound2;
    if (hi_int) return hi_ext ? Quadrant::HighIntHighExt : Quadrant::HighIntLowExt;
    return hi_ext ? Quadrant::LowIntHighExt : Quadrant::LowIntLowExt;
}

double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    if (v.empty()) return 0;
    double idx = p * double(v.size() - 1);
    std::size_t lo = std::size_t(idx);
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = idx - double(lo);
    return v[lo] * (1 - frac) + v[hi] * frac;
}

struct Boundaries {
    double internal = 0;
    double external = 0;
    std::vector<std::string> outliers;
};

Boundaries boundaries(const std::vector<CountryElasticity>& results) {
    std::vector<double> b1, b2;
    for (const auto& r : results) {
        if (r.singular) continue;
        b1.push_back(r.beta_internal);
        b2.push_back(r.beta_external);
    }
    if (b1.empty()) throw ConfigError("no successful country fits");

    const double med1 = quantile(b1, 0.5), iqr1 = quantile(b1, 0.75) - quantile(b1, 0.25);
    const double med2 = quantile(b2, 0.5), iqr2 = quantile(b2, 0.75) - quantile(b2, 0.25);

    Boundaries out;
    double sum1 = 0, sum2 = 0;
    std::size_t kept = 0;
    for (const auto& r : results) {
        if (r.singular) continue;
        if (std::abs(r.beta_internal - med1) > 5 * iqr1 ||
            std::abs(r.beta_external - med2) > 5 * iqr2) {
            out.outliers.push_back(r.country);
            continue;
        }
        sum1 += r.beta_internal;
        sum2 += r.beta_external;
        ++kept;
    }
    if (kept == 0) {
        // everything flagged; fall back to plain means
        out.outliers.clear();
        for (double v : b1) sum1 += v;
        for (double v : b2) sum2 += v;
        kept = b1.size();
    }
    out.internal = sum1 / double(kept);
    out.external = sum2 / double(kept);
    return out;
}

}  // namespace

std::vector<CountryElasticity> per_country_fit(const ingest::PanelDataset& panel,
                                               const ModelSpec& spec) {
    spec.validate();
    if (spec.regressors.size() < 2)
        throw ConfigError("per-country sweep needs an internal and an external regressor");
    const std::string r1 = spec.regressors[0];
    const std::string r2 = spec.regressors[1];

    std::vector<std::string> cols;
    cols.push_back("(intercept)");
    cols.insert(cols.end(), spec.regressors.begin(), spec.regressors.end());
    cols.insert(cols.end(), panel.dummies.begin(), panel.dummies.end());

    const long T = long(panel.periods);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<CountryElasticity> out(panel.n());
    parallel_for(panel.n(), [&](std::size_t i) {
        CountryElasticity ce;
        ce.country = panel.countries[i].code;
        regress::DesignMatrix d;
        d.names = cols;
        d.X.resize(T, long(cols.size()));
        d.X.col(0).setOnes();
        for (std::size_t j = 1; j < cols.size(); ++j)
            d.X.col(long(j)) = panel.column(cols[j]).row(long(i)).transpose();
        Eigen::VectorXd y = panel.column(panel.dependent).row(long(i)).transpose();
        try {
            auto fit = regress::ols(d, y);
            ce.beta_internal = fit.coefficients.at(r1);
            ce.beta_external = fit.coefficients.at(r2);
            ce.se_internal = fit.robust_se.at(r1);
            ce.se_external = fit.robust_se.at(r2);
            ce.difference = ce.beta_internal - ce.beta_external;
        } catch (const SingularDesignError&) {
            ce.singular = true;
            ce.beta_internal = ce.beta_external = nan;
            ce.se_internal = ce.se_external = nan;
            ce.difference = nan;
        }
        out[i] = ce;
    });

    auto bd = boundaries(out);
    for (auto& ce : out)
        if (!ce.singular)
            ce.quadrant =
                quadrant_of(ce.beta_internal, ce.beta_external, bd.internal, bd.external);
    return out;
}

TaxonomyReport taxonomy(const std::vector<CountryElasticity>& results) {
    std::size_t fitted = 0;
    for (const auto& r : results)
        if (!r.singular) ++fitted;
    if (fitted < 2) throw ConfigError("taxonomy needs at least 2 fitted countries");

    auto bd = boundaries(results);
    TaxonomyReport report;
    report.boundary_internal = bd.internal;
    report.boundary_external = bd.external;
    report.outliers = bd.outliers;
    for (const auto& r : results) {
        if (r.singular) continue;
        Quadrant q = quadrant_of(r.beta_internal, r.beta_external, bd.internal, bd.external);
        report.members[q].push_back(r.country);
        report.ranking.push_back(r);
        report.ranking.back().quadrant = q;
    }
    for (auto& [q, codes] : report.members) std::sort(codes.begin(), codes.end());
    std::sort(report.ranking.begin(), report.ranking.end(),
              [](const CountryElasticity& a, const CountryElasticity& b) {
                  if (a.difference != b.difference) return a.difference > b.difference;
                  return a.country < b.country;
              });
    return report;
}

}  // namespace epipanel::analysis
