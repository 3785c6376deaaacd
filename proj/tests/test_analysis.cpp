#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "epipanel/errors.hpp"
#include "epipanel/analysis.hpp"
#include "helpers.hpp"

using namespace epipanel;
using namespace epipanel::analysis;
using testutil::gauss;

TEST_CASE("parse_duration forms") {
    CHECK(parse_duration("6m").months == 6);
    CHECK(parse_duration("6m").days == 0);
    CHECK(parse_duration("7d").days == 7);
    CHECK(parse_duration("1m14d").months == 1);
    CHECK(parse_duration("1m14d").days == 14);
    CHECK(parse_duration("14").days == 14);
    CHECK(parse_duration("6m").text() == "6m");
    CHECK(parse_duration("7d").text() == "7d");
    CHECK_THROWS_AS(parse_duration(""), ConfigError);
    CHECK_THROWS_AS(parse_duration("6x"), ConfigError);
    CHECK_THROWS_AS(parse_duration("0d"), ConfigError);
    CHECK_THROWS_AS(parse_duration("-3d"), ConfigError);
}

TEST_CASE("advance applies months then days with clamping") {
    Duration six{6, 0};
    CHECK(advance(make_date(2021, 3, 15), six) == make_date(2021, 9, 15));
    Duration clamp{1, 0};
    CHECK(advance(make_date(2021, 1, 31), clamp) == make_date(2021, 2, 28));
    Duration mixed{1, 14};
    CHECK(advance(make_date(2021, 1, 1), mixed) == make_date(2021, 2, 15));
}

namespace {

regress::FitResult fake_fit(const std::string& dependent, const std::string& regressor,
                            double beta) {
    regress::FitResult fit;
    fit.dependent = dependent;
    fit.coefficients[regressor] = beta;
    fit.robust_se[regressor] = 0.01;
    fit.p_values[regressor] = 0.001;
    return fit;
}

}  // namespace

TEST_CASE("elasticity interpretation phrases") {
    auto a = elasticity_interpretation(fake_fit("documents", "deaths", 0.159), "deaths");
    CHECK(a == "a 1% increase in new deaths yields a 0.16% increase in document production");

    auto zero = elasticity_interpretation(fake_fit("documents", "deaths", 0.0), "deaths");
    CHECK(zero.find("no change") != std::string::npos);

    auto neg = elasticity_interpretation(fake_fit("trends", "cases_nb", -0.123), "cases_nb");
    CHECK(neg ==
          "a 1% increase in new cases (neighbours) yields a 0.123% decrease in search interest");

    auto tiny = elasticity_interpretation(fake_fit("documents", "deaths", 4e-4), "deaths");
    CHECK(tiny.find("no change") != std::string::npos);

    CHECK_THROWS_AS(elasticity_interpretation(fake_fit("documents", "deaths", 1.0), "cases"),
                    ConfigError);
}

TEST_CASE("elasticity interpretation keeps only the needed digits") {
    auto exact = elasticity_interpretation(fake_fit("documents", "stringency", 0.35), "stringency");
    CHECK(exact.find("0.35%") != std::string::npos);
    auto rough = elasticity_interpretation(fake_fit("documents", "vacc_change", 1.41), "vacc_change");
    CHECK(rough.find("1.4%") != std::string::npos);
}

TEST_CASE("rolling elasticity with window covering the whole panel equals the global fit") {
    auto sp = testutil::synth_panel(4, 120, 101);
    auto global = regress::fixed_effects_fit(sp.panel, sp.spec);
    Duration window{0, 120};
    Duration step{0, 200};
    auto traj = rolling_elasticity(sp.panel, sp.spec, window, step);
    REQUIRE(traj.points.size() == 1);
    CHECK(traj.points[0].beta1 == doctest::Approx(global.coefficients.at("x1")).epsilon(1e-12));
    CHECK(traj.points[0].robust_se == doctest::Approx(global.robust_se.at("x1")).epsilon(1e-12));
    CHECK(traj.points[0].window_end == sp.panel.end_date());
    CHECK(traj.regressor == "x1");
}

TEST_CASE("rolling elasticity recovers a planted constant coefficient") {
    auto sp = testutil::synth_panel(5, 400, 103, 2, true, true, 0.25);
    Duration window{3, 0};
    Duration step{0, 21};
    auto traj = rolling_elasticity(sp.panel, sp.spec, window, step);
    CHECK(traj.points.size() >= 10);
    Date prev{};
    int misses = 0;
    for (const auto& p : traj.points) {
        CHECK(p.window_end > prev);
        prev = p.window_end;
        if (std::fabs(p.beta1 - sp.beta[0]) > 2 * p.robust_se) ++misses;
    }
    // ~5% of windows may fall outside two robust SEs
    CHECK(misses <= int(traj.points.size() / 4));
}

TEST_CASE("rolling elasticity rejects a window longer than the panel") {
    auto sp = testutil::synth_panel(3, 60, 107);
    CHECK_THROWS_AS(rolling_elasticity(sp.panel, sp.spec, Duration{12, 0}, Duration{0, 7}),
                    LengthError);
}

TEST_CASE("rolling windows drop dummy columns that go constant inside a window") {
    // 90-day windows never span all four seasons, so some season dummies are
    // constant zero inside each window; the fit must still succeed.
    auto sp = testutil::synth_panel(4, 365, 109, 2, true, true, 0.3);
    auto traj = rolling_elasticity(sp.panel, sp.spec, Duration{3, 0}, Duration{0, 30});
    CHECK(traj.points.size() >= 8);
    for (const auto& p : traj.points) CHECK(std::isfinite(p.beta1));
}

namespace {

ingest::PanelDataset country_panel(int n, int t, std::uint64_t seed, double b1, double b2,
                                   double noise = 0.2) {
    auto sp = testutil::synth_panel(n, t, seed, 2, true, true, noise);
    auto& panel = sp.panel;
    SplitMix rng(seed ^ 0xabcdef);
    Eigen::MatrixXd y(n, t);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < t; ++j)
            y(i, j) = 1.0 + b1 * panel.columns.at("x1")(i, j) +
                      b2 * panel.columns.at("x2")(i, j) + noise * gauss(rng);
    panel.columns["y"] = y;
    return panel;
}

ModelSpec two_regressor_spec() {
    ModelSpec spec;
    spec.id = ModelId::Custom;
    spec.dependent = "y";
    spec.regressors = {"x1", "x2"};
    spec.cadence = Cadence::Daily;
    return spec;
}

}  // namespace

TEST_CASE("per-country fits recover planted elasticities") {
    int outside = 0;
    int total = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto panel = country_panel(2, 120, seed, 0.5, -0.3);
        auto results = per_country_fit(panel, two_regressor_spec());
        REQUIRE(results.size() == 2);
        for (const auto& r : results) {
            REQUIRE_FALSE(r.singular);
            CHECK(r.difference == r.beta_internal - r.beta_external);
            if (std::fabs(r.beta_internal - 0.5) > 2 * r.se_internal) ++outside;
            if (std::fabs(r.beta_external + 0.3) > 2 * r.se_external) ++outside;
            total += 2;
        }
    }
    // nominal 95% coverage, wide Monte-Carlo margin
    CHECK(outside < total / 10);
}

TEST_CASE("a constant regressor flags only that country as singular") {
    auto panel = country_panel(3, 90, 211, 0.4, 0.2);
    Eigen::MatrixXd x1 = panel.columns.at("x1");
    x1.row(1).setConstant(2.0);
    panel.columns["x1"] = x1;
    auto results = per_country_fit(panel, two_regressor_spec());
    REQUIRE(results.size() == 3);
    CHECK_FALSE(results[0].singular);
    CHECK(results[1].singular);
    CHECK(std::isnan(results[1].beta_internal));
    CHECK_FALSE(results[2].singular);

    auto report = taxonomy(results);
    std::size_t members = 0;
    for (const auto& [q, codes] : report.members) members += codes.size();
    CHECK(members == 2);  // the singular country is not assigned a quadrant
}

namespace {

std::vector<CountryElasticity> manual_results(
    const std::vector<std::tuple<std::string, double, double>>& rows) {
    std::vector<CountryElasticity> out;
    for (const auto& [code, b1, b2] : rows) {
        CountryElasticity c;
        c.country = code;
        c.beta_internal = b1;
        c.beta_external = b2;
        c.se_internal = c.se_external = 0.05;
        c.difference = b1 - b2;
        out.push_back(c);
    }
    return out;
}

}  // namespace

TEST_CASE("taxonomy quadrants and boundaries") {
    auto results = manual_results({{"AA", 1.0, 1.0}, {"BB", -1.0, -1.0}});
    auto report = taxonomy(results);
    CHECK(report.boundary_internal == 0.0);
    CHECK(report.boundary_external == 0.0);
    CHECK(report.members.at(Quadrant::HighIntHighExt) == std::vector<std::string>{"AA"});
    CHECK(report.members.at(Quadrant::LowIntLowExt) == std::vector<std::string>{"BB"});

    // everyone identical: the >= tie rule sends all to HighInt-HighExt
    auto same = taxonomy(manual_results({{"AA", 2, 3}, {"BB", 2, 3}, {"CC", 2, 3}}));
    CHECK(same.members.at(Quadrant::HighIntHighExt).size() == 3);

    // opposite corners
    auto mixed = taxonomy(manual_results(
        {{"CA", -0.1, 2.0}, {"IQ", 2.0, -0.1}, {"AA", 0.2, 0.2}, {"BB", 0.3, 0.3}}));
    auto in = [&](Quadrant q, const std::string& code) {
        const auto& v = mixed.members.at(q);
        return std::find(v.begin(), v.end(), code) != v.end();
    };
    CHECK(in(Quadrant::LowIntHighExt, "CA"));
    CHECK(in(Quadrant::HighIntLowExt, "IQ"));
}

TEST_CASE("taxonomy is invariant under a common affine rescaling") {
    auto base = manual_results(
        {{"AA", 0.5, 0.1}, {"BB", -0.2, 0.9}, {"CC", 1.4, -0.4}, {"DD", 0.05, 0.3}});
    auto before = taxonomy(base);
    auto scaled = base;
    for (auto& r : scaled) {
        r.beta_internal = 3.0 * r.beta_internal + 10.0;
        r.beta_external = 3.0 * r.beta_external + 10.0;
    }
    auto after = taxonomy(scaled);
    for (const auto& [q, codes] : before.members) CHECK(after.members.at(q) == codes);
}

TEST_CASE("taxonomy excludes extreme outliers from the boundary means") {
    auto rows = manual_results({{"AA", 0.10, 0.20},
                                {"BB", 0.12, 0.22},
                                {"CC", 0.14, 0.18},
                                {"DD", 0.11, 0.21},
                                {"EE", 0.13, 0.19},
                                {"NI", 8.0, 0.05}});
    auto report = taxonomy(rows);
    CHECK(report.outliers == std::vector<std::string>{"NI"});
    CHECK(report.boundary_internal == doctest::Approx(0.12).epsilon(1e-12));
    // the outlier still gets a quadrant
    std::size_t members = 0;
    for (const auto& [q, codes] : report.members) members += codes.size();
    CHECK(members == 6);
    const auto& hi = report.members.at(Quadrant::HighIntLowExt);
    CHECK(std::find(hi.begin(), hi.end(), "NI") != hi.end());
}

TEST_CASE("taxonomy ranking is sorted by difference, descending") {
    auto report = taxonomy(manual_results({{"AA", 0.5, 0.1}, {"BB", 0.1, 0.5}, {"CC", 0.4, 0.1}}));
    REQUIRE(report.ranking.size() == 3);
    CHECK(report.ranking[0].country == "AA");
    CHECK(report.ranking[1].country == "CC");
    CHECK(report.ranking[2].country == "BB");
    CHECK_THROWS_AS(taxonomy({}), ConfigError);
}

TEST_CASE("quadrant counts sum to the fitted countries") {
    auto panel = country_panel(6, 100, 307, 0.6, 0.1, 0.4);
    auto results = per_country_fit(panel, two_regressor_spec());
    auto report = taxonomy(results);
    std::size_t members = 0;
    for (const auto& [q, codes] : report.members) members += codes.size();
    std::size_t fitted = 0;
    for (const auto& r : results)
        if (!r.singular) ++fitted;
    CHECK(members == fitted);
    CHECK(report.ranking.size() == fitted);
}

TEST_CASE("run_model drives the full pipeline") {
    auto files = testutil::write_fixture_files(testutil::test_dir("analysis_sources"));
    auto src = testutil::load_fixture_sources(files, false, false);
    auto fit = run_model(ModelSpec::standard(ModelId::M1b), src);
    CHECK(fit.n_obs == 2400);
    CHECK(fit.coefficients.count("deaths") == 1);
    CHECK(fit.coefficients.count("deaths_nb") == 1);
    CHECK(std::isfinite(fit.coefficients.at("deaths")));
    CHECK(fit.fixed_effects.size() == 6);
    CHECK(fit.r2 >= 0.0);
    CHECK(fit.r2 <= 1.0);
}
