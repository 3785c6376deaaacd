#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "epipanel/country.hpp"
#include "epipanel/csv.hpp"
#include "epipanel/models.hpp"
#include "epipanel/series.hpp"

namespace epipanel::ingest {

// Column names for each source layout. Defaults match the upstream exports;
// override via the mapping config when a file deviates.
struct WhoColumns {
    std::string date = "Date_reported";
    std::string code = "Country_code";
    std::string name = "Country";
    std::string region = "WHO_region";
    std::string cases = "New_cases";
    std::string deaths = "New_deaths";
};

struct EarsColumns {
    std::string date = "date";
    std::string country = "country";
    std::string documents = "documents";
};

struct OxcgrtColumns {
    std::string code = "CountryCode";
    std::string date = "Date";
    std::string vaccinated = "PopulationVaccinated";
    std::string stringency = "StringencyIndex_Average";
};

struct TrendsColumns {
    std::string week = "Week";
    // Google names the value column after the query; when absent the second
    // column is used.
    std::string index = "index";
};

struct ColumnMap {
    WhoColumns who;
    EarsColumns ears;
    OxcgrtColumns oxcgrt;
    TrendsColumns trends;
};

struct WhoData {
    CountryRegistry registry;
    std::map<std::string, Series> cases;
    std::map<std::string, Series> deaths;
};

struct OxcgrtData {
    std::map<std::string, Series> vaccinated;
    std::map<std::string, Series> stringency;
};

WhoData parse_who_surveillance(const std::string& path, const WhoColumns& cols = {});
std::map<std::string, Series> parse_ears(const std::string& path, const EarsColumns& cols = {});
OxcgrtData parse_oxcgrt(const std::string& path, const OxcgrtColumns& cols = {});
Series parse_trends(const std::string& path, const std::string& country_code,
                    const TrendsColumns& cols = {});
// Loads <CODE>.csv files from a directory, one per country.
std::map<std::string, Series> load_trends_dir(const std::string& dir,
                                              const TrendsColumns& cols = {});

// Warnings (currently only missing-as-zero fills in neighbour sums) go through
// this hook; default prints to stderr.
void set_warning_handler(std::function<void(const std::string&)> handler);

// Element-wise sum of `variable` over every other country sharing the WHO
// region of `code`, on the target country's own date index. Missing member
// values count as 0 (one warning per member series).
Series neighbour_aggregate(const CountryRegistry& registry, const std::string& code,
                           const std::map<std::string, Series>& universe);

struct DummyEncoding {
    std::vector<std::string> names;
    Eigen::MatrixXd values;  // periods x names.size()
};

// Weekday indicators reference Monday; season indicators reference winter
// (Dec-Feb). `step` is days between consecutive periods.
DummyEncoding encode_dummies(Date start, std::size_t periods, int step,
                             bool weekdays, bool seasons);

struct PanelDataset {
    std::vector<CountryMeta> countries;
    Date start{};
    Cadence cadence = Cadence::Daily;
    std::size_t periods = 0;
    std::string dependent;
    std::vector<std::string> regressors;
    std::vector<std::string> dummies;
    std::map<std::string, Eigen::MatrixXd> columns;  // each n() x periods

    std::size_t n() const { return countries.size(); }
    std::size_t obs() const { return n() * periods; }
    int step_days() const { return cadence == Cadence::Weekly ? 7 : 1; }
    Date date_at(std::size_t t) const;
    Date end_date() const;
    const Eigen::MatrixXd& column(const std::string& name) const;
};

struct SourceData {
    CountryRegistry registry;
    std::map<std::string, Series> cases;
    std::map<std::string, Series> deaths;
    std::map<std::string, Series> documents;
    std::map<std::string, Series> trends;
    std::map<std::string, Series> vaccinated;
    std::map<std::string, Series> stringency;
};

// Assembles the balanced panel for one model: neighbour aggregation on the
// raw scale, 7-day right-aligned rolling mean (weekly models resample to the
// trends anchor instead), log1p, date intersection, then a left trim until
// every remaining cell is present.
PanelDataset build_panel(const ModelSpec& spec, const SourceData& sources);

// Removes dummy columns that alias the intercept on this panel's date range:
// constant indicators, and the first indicator of a weekday or season block
// whose kept members cover every period (no reference-category day in range).
// build_panel and the rolling-window slicer both run this; hand-built panels
// over short spans need it before fitting.
void drop_aliased_dummies(PanelDataset& panel);

// Tidy audit snapshot: country,date,column,value.
void write_panel_csv(const PanelDataset& panel, const std::string& path);

// The snapshot's header and data rows only, for callers that write their own
// leading metadata comments.
void write_panel_rows(CsvWriter& w, const PanelDataset& panel);

}  // namespace epipanel::ingest
