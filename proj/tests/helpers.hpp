#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "epipanel/date.hpp"
#include "epipanel/ingest.hpp"
#include "epipanel/models.hpp"
#include "epipanel/regress.hpp"
#include "epipanel/rng.hpp"
#include "epipanel/series.hpp"

namespace testutil {

namespace ep = epipanel;

inline double gauss(ep::SplitMix& rng) {
    double u1 = rng.uniform();
    double u2 = rng.uniform();
    while (u1 <= 0) u1 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline ep::Series make_series(const std::string& country, ep::Date start,
                              std::vector<std::optional<double>> values,
                              ep::Cadence cadence = ep::Cadence::Daily,
                              ep::Variable var = ep::Variable::Derived) {
    ep::Series s;
    s.country = country;
    s.variable = var;
    s.cadence = cadence;
    s.start = start;
    s.values = std::move(values);
    return s;
}

inline ep::Series make_present(const std::string& country, ep::Date start,
                               const std::vector<double>& values,
                               ep::Cadence cadence = ep::Cadence::Daily,
                               ep::Variable var = ep::Variable::Derived) {
    std::vector<std::optional<double>> v(values.begin(), values.end());
    return make_series(country, start, std::move(v), cadence, var);
}

// ---------------------------------------------------------------------------
// Synthetic balanced panels with known coefficients, for estimator tests.

struct SynthPanel {
    ep::ingest::PanelDataset panel;
    ep::ModelSpec spec;
    std::vector<double> beta;        // planted slopes for x1, x2, ...
    std::map<std::string, double> alpha;  // planted entity effects
};

inline SynthPanel synth_panel(int n_countries, int periods, std::uint64_t seed, int n_regressors = 2,
                              bool weekday = true, bool season = true, double noise_sd = 0.3,
                              bool heteroskedastic = false) {
    SynthPanel out;
    ep::SplitMix rng(seed);
    auto& panel = out.panel;
    panel.start = ep::make_date(2021, 3, 1);
    panel.cadence = ep::Cadence::Daily;
    panel.periods = std::size_t(periods);
    panel.dependent = "y";
    for (int j = 0; j < n_regressors; ++j) panel.regressors.push_back("x" + std::to_string(j + 1));
    for (int i = 0; i < n_countries; ++i) {
        char code[3] = {char('A' + i / 26), char('A' + i % 26), 0};
        panel.countries.push_back({code, std::string("Country ") + code,
                                   i % 2 ? ep::WhoRegion::EUR : ep::WhoRegion::AMR});
    }

    auto enc = ep::ingest::encode_dummies(panel.start, panel.periods, 1, weekday, season);
    panel.dummies = enc.names;
    for (std::size_t d = 0; d < enc.names.size(); ++d) {
        Eigen::MatrixXd col(n_countries, periods);
        for (int i = 0; i < n_countries; ++i) col.row(i) = enc.values.col(long(d)).transpose();
        panel.columns[enc.names[d]] = col;
    }
    // short spans leave indicators constant or block-saturated
    ep::ingest::drop_aliased_dummies(panel);

    for (int j = 0; j < n_regressors; ++j) out.beta.push_back(0.5 - 0.3 * j + 0.1 * (j % 2));
    std::vector<double> gamma(panel.dummies.size());
    for (auto& g : gamma) g = 0.4 * (rng.uniform() - 0.5);

    std::vector<Eigen::MatrixXd> x(static_cast<std::size_t>(n_regressors));
    for (auto& m : x) m.resize(n_countries, periods);
    Eigen::MatrixXd y(n_countries, periods);
    for (int i = 0; i < n_countries; ++i) {
        double a = 2.0 * (rng.uniform() - 0.5) * 3.0;
        out.alpha[panel.countries[std::size_t(i)].code] = a;
        for (int t = 0; t < periods; ++t) {
            double mean = a;
            for (int j = 0; j < n_regressors; ++j) {
                double v = gauss(rng) + 0.02 * t / double(periods);
                x[std::size_t(j)](i, t) = v;
                mean += out.beta[std::size_t(j)] * v;
            }
            for (std::size_t d = 0; d < panel.dummies.size(); ++d)
                mean += gamma[d] * panel.columns[panel.dummies[d]](i, t);
            double sd = heteroskedastic ? noise_sd * (0.5 + std::fabs(x[0](i, t))) : noise_sd;
            y(i, t) = mean + sd * gauss(rng);
        }
    }
    for (int j = 0; j < n_regressors; ++j) panel.columns[panel.regressors[std::size_t(j)]] = x[std::size_t(j)];
    panel.columns["y"] = y;

    out.spec.id = ep::ModelId::Custom;
    out.spec.dependent = "y";
    out.spec.regressors = panel.regressors;
    out.spec.weekday_dummies = weekday;
    out.spec.season_dummies = season;
    out.spec.cadence = ep::Cadence::Daily;
    return out;
}

// Independent LSDV oracle: explicit entity indicator columns, no intercept,
// solved straight through Eigen. Returns slope coefficients by name.
inline std::map<std::string, double> lsdv_oracle(const ep::ingest::PanelDataset& panel,
                                                 const ep::ModelSpec& spec) {
    const long n = long(panel.n());
    const long t = long(panel.periods);
    std::vector<std::string> slopes = spec.regressors;
    slopes.insert(slopes.end(), panel.dummies.begin(), panel.dummies.end());
    const long k = long(slopes.size());

    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n * t, k + n);
    Eigen::VectorXd y(n * t);
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < k; ++j)
            X.block(i * t, j, t, 1) = panel.columns.at(slopes[std::size_t(j)]).row(i).transpose();
        X.block(i * t, k + i, t, 1).setOnes();
        y.segment(i * t, t) = panel.columns.at(spec.dependent).row(i).transpose();
    }
    Eigen::VectorXd b = X.colPivHouseholderQr().solve(y);
    std::map<std::string, double> out;
    for (long j = 0; j < k; ++j) out[slopes[std::size_t(j)]] = b(j);
    return out;
}

// ---------------------------------------------------------------------------
// On-disk source fixtures in the four upstream layouts.

struct FixtureFiles {
    std::filesystem::path dir;
    std::string who, ears, oxcgrt, trends_dir;
};

struct FixtureSpec {
    std::uint64_t seed = 7;
    int days = 420;                       // WHO span
    ep::Date who_start = ep::make_date(2020, 12, 1);
    int ears_delay = 14;                  // EARS starts this many days later
    int ox_delay = 31;                    // OxCGRT starts later, ends earlier
    int ox_early_stop = 30;
};

// Nine countries in three WHO regions; the six with EARS documents are the
// modelled set. Values are deterministic in the seed.
inline FixtureFiles write_fixture_files(const std::filesystem::path& dir,
                                        const FixtureSpec& fx = {}) {
    namespace fs = std::filesystem;
    fs::remove_all(dir);
    fs::create_directories(dir / "trends");

    struct Row {
        const char* a2;
        const char* a3;
        const char* name;
        const char* region;
        bool modelled;
    };
    const std::vector<Row> countries = {
        {"NG", "NGA", "Nigeria", "AFRO", true},   {"ZA", "ZAF", "South Africa", "AFRO", true},
        {"KE", "KEN", "Kenya", "AFRO", false},    {"DE", "DEU", "Germany", "EURO", true},
        {"FR", "FRA", "France", "EURO", true},    {"IT", "ITA", "Italy", "EURO", false},
        {"CA", "CAN", "Canada", "AMRO", true},    {"US", "USA", "United States", "AMRO", true},
        {"BR", "BRA", "Brazil", "AMRO", false},
    };

    ep::SplitMix rng(fx.seed);
    std::map<std::string, std::vector<double>> cases, deaths, docs, vacc, si;
    for (std::size_t c = 0; c < countries.size(); ++c) {
        double phase = rng.uniform() * 6.28;
        double scale = 30 + 120 * rng.uniform();
        auto& cs = cases[countries[c].a2];
        auto& ds = deaths[countries[c].a2];
        auto& dc = docs[countries[c].a2];
        auto& vc = vacc[countries[c].a2];
        auto& st = si[countries[c].a2];
        for (int t = 0; t < fx.days; ++t) {
            double wave = 1.0 + 0.8 * std::sin(t / 60.0 + phase);
            cs.push_back(std::floor(std::max(0.0, scale * wave + 8 * gauss(rng))));
            ds.push_back(std::floor(std::max(0.0, scale * wave / 12 + 2 * gauss(rng))));
            dc.push_back(std::floor(std::max(0.0, 40 * wave + 6 * gauss(rng))));
            vc.push_back(std::min(92.0, std::max(0.0, 0.12 * (t - 25) + 0.3 * rng.uniform())));
            st.push_back(std::min(100.0, std::max(0.0, 45 + 30 * std::sin(t / 90.0 + phase))));
        }
    }

    FixtureFiles out;
    out.dir = dir;
    out.who = (dir / "who.csv").string();
    out.ears = (dir / "ears.csv").string();
    out.oxcgrt = (dir / "oxcgrt.csv").string();
    out.trends_dir = (dir / "trends").string();

    {
        std::ofstream f(out.who, std::ios::binary);
        f << "Date_reported,Country_code,Country,WHO_region,New_cases,New_deaths\n";
        for (int t = 0; t < fx.days; ++t) {
            std::string date = ep::format_date(fx.who_start + std::chrono::days{t});
            for (const auto& c : countries)
                f << date << ',' << c.a2 << ',' << c.name << ',' << c.region << ','
                  << long(cases[c.a2][std::size_t(t)]) << ',' << long(deaths[c.a2][std::size_t(t)])
                  << '\n';
        }
    }
    {
        std::ofstream f(out.ears, std::ios::binary);
        f << "date,country,documents\n";
        for (int t = fx.ears_delay; t < fx.days; ++t) {
            std::string date = ep::format_date(fx.who_start + std::chrono::days{t});
            for (const auto& c : countries)
                if (c.modelled) f << date << ',' << c.a2 << ',' << long(docs[c.a2][std::size_t(t)]) << '\n';
        }
    }
    {
        std::ofstream f(out.oxcgrt, std::ios::binary);
        f << "CountryCode,Date,PopulationVaccinated,StringencyIndex_Average\n";
        for (int t = fx.ox_delay; t < fx.days - fx.ox_early_stop; ++t) {
            ep::Date d = fx.who_start + std::chrono::days{t};
            int ymd = int(std::stoi(ep::format_date(d).substr(0, 4)) * 10000 +
                          std::stoi(ep::format_date(d).substr(5, 2)) * 100 +
                          std::stoi(ep::format_date(d).substr(8, 2)));
            char buf[32];
            for (const auto& c : countries) {
                std::snprintf(buf, sizeof buf, "%.2f", vacc[c.a2][std::size_t(t)]);
                f << c.a3 << ',' << ymd << ',' << buf << ',';
                std::snprintf(buf, sizeof buf, "%.2f", si[c.a2][std::size_t(t)]);
                f << buf << '\n';
            }
        }
    }
    {
        // first Sunday on or after WHO start; full weeks inside the WHO span
        ep::Date first = fx.who_start;
        while (ep::weekday_index(first) != 6) first += std::chrono::days{1};
        for (const auto& c : countries) {
            if (!c.modelled) continue;
            std::ofstream f(dir / "trends" / (std::string(c.a2) + ".csv"), std::ios::binary);
            f << "Category: All categories\n\n";
            f << "Week,covid: (Worldwide)\n";
            ep::SplitMix trng(fx.seed ^ ep::mix64(std::hash<std::string>{}(c.a2)));
            for (ep::Date w = first; w + std::chrono::days{0} <= fx.who_start + std::chrono::days{fx.days - 1};
                 w += std::chrono::days{7})
                f << ep::format_date(w) << ',' << (5 + trng.bounded(96)) << '\n';
        }
    }
    return out;
}

inline ep::ingest::SourceData load_fixture_sources(const FixtureFiles& files, bool ox = true,
                                                   bool trends = true) {
    ep::ingest::SourceData src;
    auto who = ep::ingest::parse_who_surveillance(files.who);
    src.registry = std::move(who.registry);
    src.cases = std::move(who.cases);
    src.deaths = std::move(who.deaths);
    src.documents = ep::ingest::parse_ears(files.ears);
    if (ox) {
        auto o = ep::ingest::parse_oxcgrt(files.oxcgrt);
        src.vaccinated = std::move(o.vaccinated);
        src.stringency = std::move(o.stringency);
    }
    if (trends) src.trends = ep::ingest::load_trends_dir(files.trends_dir);
    return src;
}

inline std::filesystem::path test_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("epipanel_" + name);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

}  // namespace testutil
