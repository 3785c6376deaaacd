#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "epipanel/errors.hpp"
#include "epipanel/ingest.hpp"
#include "epipanel/models.hpp"
#include "helpers.hpp"

using namespace epipanel;
using namespace epipanel::ingest;
namespace fs = std::filesystem;

namespace {

const fs::path kDir = testutil::test_dir("ingest");

struct Fixture {
    testutil::FixtureFiles files;
    Fixture() { files = testutil::write_fixture_files(kDir / "sources"); }
};

std::string write_file(const std::string& name, const std::string& body) {
    fs::create_directories(kDir / "small");
    auto path = (kDir / "small" / name).string();
    std::ofstream(path, std::ios::binary) << body;
    return path;
}

struct WarningCapture {
    std::vector<std::string> messages;
    WarningCapture() {
        set_warning_handler([this](const std::string& m) { messages.push_back(m); });
    }
    ~WarningCapture() { set_warning_handler({}); }
    bool contains(const std::string& needle) const {
        for (const auto& m : messages)
            if (m.find(needle) != std::string::npos) return true;
        return false;
    }
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "parse_who_surveillance reads countries and regions") {
    auto who = parse_who_surveillance(files.who);
    CHECK(who.registry.size() == 9);
    CHECK(who.cases.size() == 9);
    CHECK(who.deaths.size() == 9);
    CHECK(who.registry.get("DE").region == WhoRegion::EUR);
    CHECK(who.registry.get("NG").region == WhoRegion::AFR);
    CHECK(who.registry.get("CA").region == WhoRegion::AMR);
    CHECK(who.registry.get("CA").name == "Canada");
    CHECK(who.cases.at("DE").cadence == Cadence::Daily);
    CHECK(who.cases.at("DE").start == make_date(2020, 12, 1));
}

TEST_CASE("parse_who_surveillance empty cells become missing, not zero") {
    auto path = write_file("who_gap.csv",
                           "Date_reported,Country_code,Country,WHO_region,New_cases,New_deaths\n"
                           "2021-01-01,AA,Aland,EURO,5,\n"
                           "2021-01-02,AA,Aland,EURO,,2\n");
    auto who = parse_who_surveillance(path);
    CHECK_FALSE(who.deaths.at("AA").values[0].has_value());
    CHECK(*who.deaths.at("AA").values[1] == 2.0);
    CHECK_FALSE(who.cases.at("AA").values[1].has_value());
    CHECK(*who.cases.at("AA").values[0] == 5.0);
}

TEST_CASE("parse_who_surveillance duplicate country+date") {
    auto path = write_file("who_dup.csv",
                           "Date_reported,Country_code,Country,WHO_region,New_cases,New_deaths\n"
                           "2021-01-01,AA,Aland,EURO,5,1\n"
                           "2021-01-01,AA,Aland,EURO,6,1\n");
    CHECK_THROWS_AS(parse_who_surveillance(path), ParseError);
}

TEST_CASE("parse_who_surveillance malformed date carries the line number") {
    auto path = write_file("who_bad.csv",
                           "Date_reported,Country_code,Country,WHO_region,New_cases,New_deaths\n"
                           "2021-01-01,AA,Aland,EURO,5,1\n"
                           "not-a-date,AA,Aland,EURO,5,1\n");
    try {
        parse_who_surveillance(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
}

TEST_CASE("parse_who_surveillance clamps negative corrections with one warning") {
    WarningCapture w;
    auto path = write_file("who_neg.csv",
                           "Date_reported,Country_code,Country,WHO_region,New_cases,New_deaths\n"
                           "2021-01-01,AA,Aland,EURO,-5,1\n"
                           "2021-01-02,AA,Aland,EURO,4,-2\n");
    auto who = parse_who_surveillance(path);
    CHECK(*who.cases.at("AA").values[0] == 0.0);
    CHECK(*who.deaths.at("AA").values[1] == 0.0);
    CHECK(w.contains("clamped 2 negative counts"));
}

TEST_CASE_FIXTURE(Fixture, "parse_ears covers the modelled countries") {
    auto docs = parse_ears(files.ears);
    CHECK(docs.size() == 6);
    CHECK(docs.count("CA") == 1);
    CHECK(docs.count("KE") == 0);  // no documents for unmodelled countries
    CHECK(docs.at("CA").start == make_date(2020, 12, 15));
    CHECK(docs.at("CA").variable == Variable::NewDocuments);
}

TEST_CASE("parse_ears duplicate row") {
    auto path = write_file("ears_dup.csv",
                           "date,country,documents\n"
                           "2021-01-01,AA,3\n"
                           "2021-01-01,AA,4\n");
    CHECK_THROWS_AS(parse_ears(path), ParseError);
}

TEST_CASE_FIXTURE(Fixture, "parse_oxcgrt maps alpha-3 codes and both variables") {
    auto ox = parse_oxcgrt(files.oxcgrt);
    CHECK(ox.vaccinated.size() == 9);
    CHECK(ox.stringency.size() == 9);
    CHECK(ox.vaccinated.count("CA") == 1);  // CAN -> CA
    CHECK(ox.stringency.at("DE").start == make_date(2021, 1, 1));
    for (auto v : ox.stringency.at("FR").values) {
        REQUIRE(v.has_value());
        CHECK(*v >= 0.0);
        CHECK(*v <= 100.0);
    }
}

TEST_CASE("parse_oxcgrt rejects stringency outside [0,100]") {
    auto path = write_file("ox_range.csv",
                           "CountryCode,Date,PopulationVaccinated,StringencyIndex_Average\n"
                           "DEU,20210101,10,100\n"
                           "DEU,20210102,11,101\n");
    CHECK_THROWS_AS(parse_oxcgrt(path), DomainError);
}

TEST_CASE("parse_oxcgrt skips unknown codes and subnational rows") {
    WarningCapture w;
    auto path = write_file("ox_mixed.csv",
                           "CountryCode,RegionCode,Jurisdiction,Date,PopulationVaccinated,"
                           "StringencyIndex_Average\n"
                           "DEU,,NAT_TOTAL,20210101,10,50\n"
                           "DEU,DE_BY,STATE_TOTAL,20210101,12,60\n"
                           "XXX,,NAT_TOTAL,20210101,10,50\n");
    auto ox = parse_oxcgrt(path);
    CHECK(ox.stringency.size() == 1);
    CHECK(*ox.stringency.at("DE").values[0] == 50.0);  // the subnational row is ignored
    CHECK(w.contains("XXX"));
}

TEST_CASE_FIXTURE(Fixture, "parse_trends and load_trends_dir") {
    auto trends = load_trends_dir(files.trends_dir);
    CHECK(trends.size() == 6);
    const auto& ca = trends.at("CA");
    CHECK(ca.cadence == Cadence::Weekly);
    CHECK(weekday_index(ca.start) == 6);  // Sunday exports
    for (auto v : ca.values) REQUIRE(v.has_value());
}

TEST_CASE("parse_trends rejects an 8-day gap") {
    auto path = write_file("trends_gap.csv",
                           "Category: All categories\n\n"
                           "Week,covid: (Worldwide)\n"
                           "2021-01-03,40\n"
                           "2021-01-10,42\n"
                           "2021-01-18,44\n");
    CHECK_THROWS_AS(parse_trends(path, "AA"), CadenceError);
}

TEST_CASE("parse_trends accepts the scale maximum") {
    auto path = write_file("trends_max.csv",
                           "Week,covid: (Worldwide)\n"
                           "2021-01-03,100\n"
                           "2021-01-10,0\n");
    auto s = parse_trends(path, "AA");
    CHECK(*s.values[0] == 100.0);
    CHECK(*s.values[1] == 0.0);
}

TEST_CASE_FIXTURE(Fixture, "neighbour_aggregate equals the brute-force regional sum") {
    auto who = parse_who_surveillance(files.who);
    auto nb = neighbour_aggregate(who.registry, "DE", who.cases);
    const auto& de = who.cases.at("DE");
    REQUIRE(nb.size() == de.size());
    for (std::size_t t = 0; t < nb.size(); ++t) {
        Date d = de.date_at(t);
        double want = 0;
        for (const char* other : {"FR", "IT"}) {
            auto v = who.cases.at(other).at(d);
            if (v) want += *v;
        }
        CHECK(*nb.values[t] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE_FIXTURE(Fixture, "own series plus neighbour aggregate equals the full region sum") {
    auto who = parse_who_surveillance(files.who);
    auto nb = neighbour_aggregate(who.registry, "NG", who.deaths);
    const auto& ng = who.deaths.at("NG");
    for (std::size_t t = 0; t < nb.size(); t += 17) {
        Date d = ng.date_at(t);
        double region = 0;
        for (const char* code : {"NG", "ZA", "KE"}) region += *who.deaths.at(code).at(d);
        CHECK(*nb.values[t] + *ng.values[t] == doctest::Approx(region).epsilon(1e-12));
    }
}

TEST_CASE("neighbour_aggregate lone country and missing-as-zero") {
    CountryRegistry reg;
    reg.add({"AA", "Aland", WhoRegion::EUR});
    reg.add({"BB", "Bland", WhoRegion::EUR});
    reg.add({"CC", "Cland", WhoRegion::WPR});
    Date start = make_date(2021, 1, 1);
    std::map<std::string, Series> uni;
    uni["AA"] = testutil::make_present("AA", start, {1, 2, 3});
    uni["BB"] = testutil::make_series("BB", start, {4.0, std::nullopt, 6.0});
    uni["CC"] = testutil::make_present("CC", start, {7, 8, 9});

    WarningCapture w;
    auto nb = neighbour_aggregate(reg, "AA", uni);
    CHECK(*nb.values[0] == 4.0);
    CHECK(*nb.values[1] == 0.0);  // BB's gap counts as zero
    CHECK(*nb.values[2] == 6.0);
    CHECK(w.contains("treated as 0"));

    auto lone = neighbour_aggregate(reg, "CC", uni);
    for (auto v : lone.values) CHECK(*v == 0.0);
}

TEST_CASE("neighbour_aggregate requires a usable region") {
    CountryRegistry reg;
    reg.add({"AA", "Aland", WhoRegion::Other});
    std::map<std::string, Series> uni;
    uni["AA"] = testutil::make_present("AA", make_date(2021, 1, 1), {1});
    CHECK_THROWS_AS(neighbour_aggregate(reg, "AA", uni), CountryError);
}

TEST_CASE("encode_dummies references Monday and winter") {
    Date monday_winter = make_date(2021, 1, 4);
    auto enc = encode_dummies(monday_winter, 14, 1, true, true);
    REQUIRE(enc.names.size() == 9);
    CHECK(enc.names[0] == "tuesday");
    CHECK(enc.names[5] == "sunday");
    CHECK(enc.names[6] == "spring");
    CHECK(enc.values.row(0).sum() == 0.0);  // reference categories
    CHECK(enc.values(1, 0) == 1.0);         // Tuesday row

    // one weekday indicator at most, and exactly 6 over any 7 consecutive days
    for (int t = 0; t + 7 <= 14; ++t) {
        double sum = 0;
        for (int j = 0; j < 7; ++j) sum += enc.values.block(t + j, 0, 1, 6).sum();
        CHECK(sum == 6.0);
    }

    auto weekly = encode_dummies(make_date(2021, 1, 10), 8, 7, false, true);
    CHECK(weekly.names == std::vector<std::string>{"spring", "summer", "autumn"});
}

TEST_CASE_FIXTURE(Fixture, "build_panel 1b: balanced daily panel from the intersection") {
    auto src = testutil::load_fixture_sources(files, false, false);
    auto panel = build_panel(ModelSpec::standard(ModelId::M1b), src);
    CHECK(panel.n() == 6);
    CHECK(panel.cadence == Cadence::Daily);
    // EARS starts 2020-12-15; the 7-day mean warm-up trims six more days
    CHECK(panel.start == make_date(2020, 12, 21));
    CHECK(panel.periods == 400);
    CHECK(panel.obs() == 6 * 400);
    CHECK(panel.dependent == "documents");
    CHECK(panel.regressors == std::vector<std::string>{"deaths", "deaths_nb"});
    CHECK(panel.dummies.size() == 9);
    for (const auto& [name, m] : panel.columns) {
        CHECK(m.rows() == 6);
        CHECK(m.cols() == 400);
        CHECK(((m.array() == m.array()).all()));  // no NaN cell anywhere
    }
}

TEST_CASE_FIXTURE(Fixture, "build_panel 1d: OxCGRT intersection plus diff warm-up trim") {
    WarningCapture w;
    auto src = testutil::load_fixture_sources(files, true, false);
    auto panel = build_panel(ModelSpec::standard(ModelId::M1d), src);
    CHECK(panel.n() == 6);
    // OxCGRT starts 2021-01-01; vacc_change needs diff + 7-day mean warm-up
    CHECK(panel.start == make_date(2021, 1, 8));
    CHECK(panel.end_date() == make_date(2021, 12, 25));
    CHECK(w.contains("left-trimmed"));
    CHECK(panel.regressors ==
          std::vector<std::string>{"deaths", "deaths_nb", "vacc_change", "stringency"});
}

TEST_CASE_FIXTURE(Fixture, "build_panel 2b: weekly panel with season dummies only") {
    auto src = testutil::load_fixture_sources(files, false, true);
    auto panel = build_panel(ModelSpec::standard(ModelId::M2b), src);
    CHECK(panel.cadence == Cadence::Weekly);
    CHECK(panel.n() == 6);
    CHECK(panel.dependent == "trends");
    CHECK(panel.dummies == std::vector<std::string>{"spring", "summer", "autumn"});
    CHECK(weekday_index(panel.start) == 6);
    CHECK(panel.periods > 40);
}

TEST_CASE_FIXTURE(Fixture, "build_panel is invariant to input row order") {
    std::ifstream in(files.who);
    std::string header, line;
    std::getline(in, header);
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    std::reverse(rows.begin(), rows.end());
    std::ostringstream shuffled;
    shuffled << header << "\n";
    for (const auto& r : rows) shuffled << r << "\n";
    auto reversed_path = (kDir / "small" / "who_reversed.csv").string();
    fs::create_directories(kDir / "small");
    std::ofstream(reversed_path, std::ios::binary) << shuffled.str();

    auto src_a = testutil::load_fixture_sources(files, false, false);
    testutil::FixtureFiles alt = files;
    alt.who = reversed_path;
    auto src_b = testutil::load_fixture_sources(alt, false, false);

    auto pa = build_panel(ModelSpec::standard(ModelId::M1b), src_a);
    auto pb = build_panel(ModelSpec::standard(ModelId::M1b), src_b);
    CHECK(pa.start == pb.start);
    CHECK(pa.periods == pb.periods);
    for (const auto& [name, m] : pa.columns) CHECK((m.array() == pb.columns.at(name).array()).all());
}

TEST_CASE("build_panel interior hole raises BalanceError naming the cell") {
    CountryRegistry reg;
    reg.add({"AA", "Aland", WhoRegion::EUR});
    reg.add({"BB", "Bland", WhoRegion::EUR});
    Date start = make_date(2021, 1, 1);
    SplitMix rng(4);
    SourceData src;
    src.registry = reg;
    for (const char* code : {"AA", "BB"}) {
        std::vector<double> cases(60), deaths(60), docs(60);
        for (int t = 0; t < 60; ++t) {
            cases[std::size_t(t)] = std::floor(20 + 10 * rng.uniform());
            deaths[std::size_t(t)] = std::floor(3 + 2 * rng.uniform());
            docs[std::size_t(t)] = std::floor(15 + 5 * rng.uniform());
        }
        src.cases[code] = testutil::make_present(code, start, cases, Cadence::Daily, Variable::NewCases);
        src.deaths[code] =
            testutil::make_present(code, start, deaths, Cadence::Daily, Variable::NewDeaths);
        src.documents[code] =
            testutil::make_present(code, start, docs, Cadence::Daily, Variable::NewDocuments);
    }
    src.documents["BB"].values[40] = std::nullopt;

    try {
        build_panel(ModelSpec::standard(ModelId::M1b), src);
        FAIL("expected BalanceError");
    } catch (const BalanceError& e) {
        std::string msg = e.what();
        CHECK(msg.find("BB") != std::string::npos);
        CHECK(msg.find("2021-02-10") != std::string::npos);
    }
}

TEST_CASE_FIXTURE(Fixture, "panel snapshot round-trips through the tidy CSV") {
    auto src = testutil::load_fixture_sources(files, false, false);
    auto panel = build_panel(ModelSpec::standard(ModelId::M1a), src);
    auto path = (kDir / "snapshot.csv").string();
    write_panel_csv(panel, path);

    std::string text = testutil::slurp(path);
    CHECK(text.rfind("# epipanel", 0) == 0);

    std::string body = text.substr(text.find("country,date,column,value"));
    auto csv = CsvReader::from_string(body, "snapshot");
    std::size_t expected = panel.obs() * (1 + panel.regressors.size() + panel.dummies.size());
    CHECK(csv.rows().size() == expected);
    const auto& first = csv.rows().front();
    CHECK(csv.text_at(first, 0) == panel.countries[0].code);
    CHECK(csv.text_at(first, 1) == format_date(panel.start));
}

TEST_CASE("country registry keeps the first region and rejects unknown codes") {
    CountryRegistry reg;
    reg.add({"AA", "Aland", WhoRegion::EUR});
    reg.add({"AA", "Aland again", WhoRegion::AFR});
    CHECK(reg.get("AA").region == WhoRegion::EUR);
    CHECK(reg.size() == 1);
    CHECK_THROWS_AS(reg.get("ZZ"), CountryError);
    CHECK(parse_who_region("EURO") == WhoRegion::EUR);
    CHECK(parse_who_region("EUR") == WhoRegion::EUR);
    CHECK(parse_who_region("OTHER") == WhoRegion::Other);
    CHECK(to_alpha2("CAN") == std::string("CA"));
    CHECK(to_alpha2("RKS") == std::string("XK"));
    CHECK_FALSE(to_alpha2("XXX").has_value());
}
