#include "epipanel/ingest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <utility>

#include "epipanel/csv.hpp"
#include "epipanel/errors.hpp"
#include "epipanel/version.hpp"

namespace epipanel::ingest {

namespace {

std::function<void(const std::string&)>& warning_ref() {
    static std::function<void(const std::string&)> handler = [](const std::string& msg) {
        std::cerr << "warning: " << msg << "\n";
    };
    return handler;
}

void warn(const std::string& msg) {
    const auto& h = warning_ref();
    if (h) h(msg);
}

Date row_date(const CsvReader& csv, const CsvRow& row, std::size_t col) {
    try {
        return parse_date(csv.text_at(row, col));
    } catch (const DomainError& e) {
        throw ParseError(csv.name(), row.line, e.what());
    }
}

template <typename Value>
using Cells = std::map<std::string, std::map<Date, Value>>;

// Lays out per-date cells as a contiguous daily series; absent dates become
// missing entries.
template <typename Value, typename Get>
Series assemble(const std::string& code, Variable var, const std::map<Date, Value>& cells,
                Get get) {
    Series s;
    s.country = code;
    s.variable = var;
    s.cadence = Cadence::Daily;
    s.start = cells.begin()->first;
    auto span = (cells.rbegin()->first - s.start).count();
    s.values.assign(std::size_t(span) + 1, std::nullopt);
    for (const auto& [d, v] : cells)
        s.values[std::size_t((d - s.start).count())] = get(v);
    return s;
}

const Series& require(const std::map<std::string, Series>& src, const std::string& code,
                      const std::string& what) {
    auto it = src.find(code);
    if (it == src.end())
        throw CountryError("country " + code + " missing from the " + what + " source");
    return it->second;
}

}  // namespace

void set_warning_handler(std::function<void(const std::string&)> handler) {
    warning_ref() = std::move(handler);
}

WhoData parse_who_surveillance(const std::string& path, const WhoColumns& cols) {
    auto csv = CsvReader::from_file(path);
    auto c_date = csv.column(cols.date);
    auto c_code = csv.column(cols.code);
    auto c_name = csv.column(cols.name);
    auto c_region = csv.column(cols.region);
    auto c_cases = csv.column(cols.cases);
    auto c_deaths = csv.column(cols.deaths);

    WhoData out;
    Cells<std::pair<std::optional<double>, std::optional<double>>> cells;
    std::size_t clamped = 0;
    for (const auto& row : csv.rows()) {
        std::string code = csv.text_at(row, c_code);
        if (code.empty()) continue;  // the file carries region-less aggregate rows
        Date d = row_date(csv, row, c_date);
        auto cases = csv.number_at(row, c_cases);
        auto deaths = csv.number_at(row, c_deaths);
        // Downward data corrections appear as negative daily counts; a
        // negative count is not a valid observation, so floor at 0.
        for (auto* v : {&cases, &deaths}) {
            if (*v && **v < 0) {
                *v = 0.0;
                ++clamped;
            }
        }
        auto [it, fresh] = cells[code].emplace(d, std::make_pair(cases, deaths));
        if (!fresh)
            throw ParseError(path, row.line,
                             "duplicate row for " + code + " on " + format_date(d));
        out.registry.add({code, csv.text_at(row, c_name), parse_who_region(csv.text_at(row, c_region))});
    }
    if (clamped)
        warn(path + ": clamped " + std::to_string(clamped) + " negative counts to 0");
    for (const auto& [code, by_date] : cells) {
        out.cases.emplace(code, assemble(code, Variable::NewCases, by_date,
                                         [](const auto& p) { return p.first; }));
        out.deaths.emplace(code, assemble(code, Variable::NewDeaths, by_date,
                                          [](const auto& p) { return p.second; }));
        validate_series(out.cases.at(code));
        validate_series(out.deaths.at(code));
    }
    return out;
}

std::map<std::string, Series> parse_ears(const std::string& path, const EarsColumns& cols) {
    auto csv = CsvReader::from_file(path);
    auto c_date = csv.column(cols.date);
    auto c_country = csv.column(cols.country);
    auto c_docs = csv.column(cols.documents);

    Cells<std::optional<double>> cells;
    for (const auto& row : csv.rows()) {
        std::string code = csv.text_at(row, c_country);
        if (code.empty()) throw ParseError(path, row.line, "empty country cell");
        Date d = row_date(csv, row, c_date);
        auto [it, fresh] = cells[code].emplace(d, csv.number_at(row, c_docs));
        if (!fresh)
            throw ParseError(path, row.line,
                             "duplicate row for " + code + " on " + format_date(d));
    }
    std::map<std::string, Series> out;
    for (const auto& [code, by_date] : cells) {
        out.emplace(code, assemble(code, Variable::NewDocuments, by_date,
                                   [](const auto& v) { return v; }));
        validate_series(out.at(code));
    }
    return out;
}

OxcgrtData parse_oxcgrt(const std::string& path, const OxcgrtColumns& cols) {
    auto csv = CsvReader::from_file(path);
    auto c_code = csv.column(cols.code);
    auto c_date = csv.column(cols.date);
    auto c_vacc = csv.column(cols.vaccinated);
    auto c_si = csv.column(cols.stringency);
    // The compact national file also ships subnational rows; keep national
    // totals only when the distinguishing columns are present.
    std::optional<std::size_t> c_juris;
    if (csv.has_column("Jurisdiction")) c_juris = csv.column("Jurisdiction");
    std::optional<std::size_t> c_region_code;
    if (csv.has_column("RegionCode")) c_region_code = csv.column("RegionCode");

    Cells<std::pair<std::optional<double>, std::optional<double>>> cells;
    std::map<std::string, bool> warned;
    for (const auto& row : csv.rows()) {
        if (c_juris && csv.text_at(row, *c_juris) != "NAT_TOTAL") continue;
        if (c_region_code && !csv.text_at(row, *c_region_code).empty()) continue;
        std::string raw = csv.text_at(row, c_code);
        auto code = to_alpha2(raw);
        if (!code) {
            if (!warned[raw]) {
                warned[raw] = true;
                warn(path + ": skipping rows for unrecognised country code '" + raw + "'");
            }
            continue;
        }
        Date d = row_date(csv, row, c_date);
        auto [it, fresh] =
            cells[*code].emplace(d, std::make_pair(csv.number_at(row, c_vacc),
                                                   csv.number_at(row, c_si)));
        if (!fresh)
            throw ParseError(path, row.line,
                             "duplicate row for " + *code + " on " + format_date(d));
    }
    OxcgrtData out;
    for (const auto& [code, by_date] : cells) {
        out.vaccinated.emplace(code, assemble(code, Variable::VaccinatedPct, by_date,
                                              [](const auto& p) { return p.first; }));
        out.stringency.emplace(code, assemble(code, Variable::StringencyIndex, by_date,
                                              [](const auto& p) { return p.second; }));
        validate_series(out.vaccinated.at(code));
        validate_series(out.stringency.at(code));
    }
    return out;
}

Series parse_trends(const std::string& path, const std::string& country_code,
                    const TrendsColumns& cols) {
    auto csv = CsvReader::from_file(path);
    csv.skip_preamble_until(cols.week);
    auto c_week = csv.column(cols.week);
    std::size_t c_index;
    if (csv.has_column(cols.index)) {
        c_index = csv.column(cols.index);
    } else if (csv.header().size() == 2) {
        // exports name the value column after the query string
        c_index = 1 - c_week;
    } else {
        throw ParseError(path, 1, "cannot identify the index column");
    }

    std::map<Date, std::optional<double>> by_date;
    for (const auto& row : csv.rows()) {
        Date d = row_date(csv, row, c_week);
        auto [it, fresh] = by_date.emplace(d, csv.number_at(row, c_index));
        if (!fresh)
            throw ParseError(path, row.line, "duplicate week " + format_date(d));
    }
    if (by_date.empty()) throw LengthError(path + ": no data rows");
    Date prev{};
    bool first = true;
    for (const auto& [d, v] : by_date) {
        if (!first && (d - prev).count() != 7)
            throw CadenceError(path + ": rows " + format_date(prev) + " and " + format_date(d) +
                               " are not 7 days apart");
        prev = d;
        first = false;
    }

    Series s;
    s.country = country_code;
    s.variable = Variable::TrendsIndex;
    s.cadence = Cadence::Weekly;
    s.start = by_date.begin()->first;
    for (const auto& [d, v] : by_date) s.values.push_back(v);
    return s;
}

std::map<std::string, Series> load_trends_dir(const std::string& dir, const TrendsColumns& cols) {
    namespace fs = std::filesystem;
    std::map<std::string, Series> out;
    if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
        std::string code = entry.path().stem().string();
        if (code.size() != 2) continue;
        std::transform(code.begin(), code.end(), code.begin(), ::toupper);
        out.emplace(code, parse_trends(entry.path().string(), code, cols));
    }
    if (out.empty()) throw ConfigError("no <code>.csv trends files in " + dir);
    return out;
}

Series neighbour_aggregate(const CountryRegistry& registry, const std::string& code,
                           const std::map<std::string, Series>& universe) {
    const CountryMeta& meta = registry.get(code);
    if (meta.region == WhoRegion::Other)
        throw CountryError("country " + code + " has no usable WHO region");

    Series out;
    out.country = code;
    auto self = universe.find(code);
    if (self != universe.end()) {
        out.variable = self->second.variable;
        out.cadence = self->second.cadence;
        out.start = self->second.start;
        out.values.assign(self->second.size(), 0.0);
    } else {
        // fall back to the union of the region members' coverage
        bool any = false;
        Date lo{}, hi{};
        Variable var = Variable::Derived;
        Cadence cad = Cadence::Daily;
        for (const auto& member : registry.in_region(meta.region)) {
            if (member == code) continue;
            auto it = universe.find(member);
            if (it == universe.end()) continue;
            if (!any || it->second.start < lo) lo = it->second.start;
            if (!any || it->second.end_date() > hi) hi = it->second.end_date();
            var = it->second.variable;
            cad = it->second.cadence;
            any = true;
        }
        if (!any) throw CountryError("no series available in region of " + code);
        out.variable = var;
        out.cadence = cad;
        out.start = lo;
        out.values.assign(std::size_t((hi - lo).count() / (cad == Cadence::Weekly ? 7 : 1)) + 1,
                          0.0);
    }

    for (const auto& member : registry.in_region(meta.region)) {
        if (member == code) continue;
        auto it = universe.find(member);
        if (it == universe.end()) continue;
        const Series& ms = it->second;
        if (ms.cadence != out.cadence)
            throw CadenceError("cadence mismatch between " + ms.label() + " and " + out.label());
        std::size_t filled = 0;
        for (std::size_t i = 0; i < out.values.size(); ++i) {
            auto v = ms.at(out.date_at(i));
            if (v)
                *out.values[i] += *v;
            else
                ++filled;
        }
        if (filled)
            warn("neighbour aggregate for " + out.label() + ": " + std::to_string(filled) +
                 " values from " + ms.label() + " treated as 0");
    }
    return out;
}

DummyEncoding encode_dummies(Date start, std::size_t periods, int step, bool weekdays,
                             bool seasons) {
    DummyEncoding e;
    if (weekdays)
        e.names = {"tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"};
    std::size_t season_base = e.names.size();
    if (seasons) {
        e.names.push_back("spring");
        e.names.push_back("summer");
        e.names.push_back("autumn");
    }
    e.values = Eigen::MatrixXd::Zero(long(periods), long(e.names.size()));
    for (std::size_t t = 0; t < periods; ++t) {
        Date d = start + std::chrono::days{long(t) * step};
        if (weekdays) {
            int w = weekday_index(d);
            if (w >= 1) e.values(long(t), w - 1) = 1.0;
        }
        if (seasons) {
            Season s = season_of(d);
            if (s != Season::Winter)
                e.values(long(t), long(season_base) + int(s) - 1) = 1.0;
        }
    }
    return e;
}

Date PanelDataset::date_at(std::size_t t) const {
    return start + std::chrono::days{long(t) * step_days()};
}

Date PanelDataset::end_date() const { return periods == 0 ? start : date_at(periods - 1); }

const Eigen::MatrixXd& PanelDataset::column(const std::string& name) const {
    auto it = columns.find(name);
    if (it == columns.end()) throw ConfigError("panel has no column '" + name + "'");
    return it->second;
}

namespace {

Series raw_column(const std::string& name, const std::string& code, const SourceData& src) {
    if (name == "cases") return require(src.cases, code, "cases");
    if (name == "deaths") return require(src.deaths, code, "deaths");
    if (name == "cases_nb") return neighbour_aggregate(src.registry, code, src.cases);
    if (name == "deaths_nb") return neighbour_aggregate(src.registry, code, src.deaths);
    if (name == "vacc_change") return diff(require(src.vaccinated, code, "vaccinations"));
    if (name == "stringency") return require(src.stringency, code, "stringency");
    if (name == "documents") return require(src.documents, code, "documents");
    if (name == "trends") return require(src.trends, code, "trends");
    throw ConfigError("unknown panel column '" + name + "'");
}

}  // namespace

PanelDataset build_panel(const ModelSpec& spec, const SourceData& sources) {
    spec.validate();
    const bool weekly = spec.cadence == Cadence::Weekly;

    const std::map<std::string, Series>* dep_source = nullptr;
    if (spec.dependent == "documents")
        dep_source = &sources.documents;
    else if (spec.dependent == "trends")
        dep_source = &sources.trends;
    else
        throw ConfigError("unsupported dependent variable '" + spec.dependent + "'");
    if (dep_source->empty())
        throw ConfigError("no series available for dependent '" + spec.dependent + "'");

    PanelDataset panel;
    panel.cadence = spec.cadence;
    panel.dependent = spec.dependent;
    panel.regressors = spec.regressors;
    for (const auto& [code, s] : *dep_source) panel.countries.push_back(sources.registry.get(code));

    int anchor = 0;
    if (weekly) {
        anchor = weekday_index(dep_source->begin()->second.start);
        for (const auto& [code, s] : *dep_source) {
            if (s.cadence != Cadence::Weekly)
                throw CadenceError(s.label() + " is not weekly");
            if (weekday_index(s.start) != anchor)
                throw CadenceError("trends series disagree on the week anchor (" + s.label() + ")");
        }
    }

    std::vector<std::string> names;
    names.push_back(spec.dependent);
    names.insert(names.end(), spec.regressors.begin(), spec.regressors.end());

    // column -> country -> transformed series
    std::map<std::string, std::map<std::string, Series>> transformed;
    for (const auto& name : names) {
        for (const auto& cm : panel.countries) {
            Series s = raw_column(name, cm.code, sources);
            if (weekly) {
                if (s.cadence == Cadence::Daily) s = resample_weekly(s, anchor);
            } else {
                s = rolling_mean(s, 7);
            }
            transformed[name].emplace(cm.code, log1p_transform(s));
        }
    }

    Date lo{}, hi{};
    bool first = true;
    for (const auto& [name, by_country] : transformed) {
        for (const auto& [code, s] : by_country) {
            if (first || s.start > lo) lo = s.start;
            if (first || s.end_date() < hi) hi = s.end_date();
            first = false;
        }
    }
    const int step = weekly ? 7 : 1;
    if (lo > hi) throw CoverageError("panel columns have no common date range");

    auto missing_at = [&](Date d) {
        for (const auto& name : names)
            for (const auto& cm : panel.countries) {
                auto v = transformed.at(name).at(cm.code).at(d);
                if (!v) return true;
            }
        return false;
    };
    Date begin = lo;
    while (begin <= hi && missing_at(begin)) begin += std::chrono::days{step};
    if (begin > hi) throw BalanceError("no date at which every panel cell is present");
    if (begin != lo)
        warn("panel left-trimmed from " + format_date(lo) + " to " + format_date(begin));

    panel.start = begin;
    panel.periods = std::size_t((hi - begin).count() / step) + 1;

    std::vector<std::string> holes;
    for (const auto& name : names) {
        Eigen::MatrixXd m(long(panel.n()), long(panel.periods));
        for (std::size_t i = 0; i < panel.n(); ++i) {
            const Series& s = transformed.at(name).at(panel.countries[i].code);
            for (std::size_t t = 0; t < panel.periods; ++t) {
                auto v = s.at(panel.date_at(t));
                if (v) {
                    m(long(i), long(t)) = *v;
                } else if (holes.size() < 12) {
                    holes.push_back(panel.countries[i].code + " " + format_date(panel.date_at(t)) +
                                    " " + name);
                } else if (holes.size() == 12) {
                    holes.push_back("...");
                }
            }
        }
        panel.columns.emplace(name, std::move(m));
    }
    if (!holes.empty()) {
        std::string msg = "panel is unbalanced; missing cells:";
        for (std::size_t i = 0; i < holes.size() && i < 13; ++i) msg += " [" + holes[i] + "]";
        throw BalanceError(msg);
    }

    auto dummies = encode_dummies(panel.start, panel.periods, step, spec.weekday_dummies,
                                  spec.season_dummies);
    panel.dummies = dummies.names;
    for (std::size_t j = 0; j < dummies.names.size(); ++j) {
        Eigen::MatrixXd m(long(panel.n()), long(panel.periods));
        for (std::size_t i = 0; i < panel.n(); ++i)
            m.row(long(i)) = dummies.values.col(long(j)).transpose();
        panel.columns.emplace(dummies.names[j], std::move(m));
    }
    drop_aliased_dummies(panel);
    return panel;
}

void drop_aliased_dummies(PanelDataset& panel) {
    std::vector<std::string> kept;
    for (const auto& name : panel.dummies) {
        const auto& m = panel.columns.at(name);
        if (m.size() > 0 && m.maxCoeff() == m.minCoeff()) {
            panel.columns.erase(name);
            continue;
        }
        kept.push_back(name);
    }
    panel.dummies = std::move(kept);

    static const std::vector<std::vector<std::string>> blocks = {
        {"tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"},
        {"spring", "summer", "autumn"}};
    for (const auto& block : blocks) {
        std::vector<std::string> present;
        for (const auto& name : block)
            if (std::count(panel.dummies.begin(), panel.dummies.end(), name))
                present.push_back(name);
        if (present.empty()) continue;
        Eigen::MatrixXd sum = panel.columns.at(present.front());
        for (std::size_t j = 1; j < present.size(); ++j) sum += panel.columns.at(present[j]);
        // every period carries one of the kept indicators: re-reference on
        // the first so the block no longer spans the intercept
        if (sum.minCoeff() == 1.0 && sum.maxCoeff() == 1.0) {
            panel.columns.erase(present.front());
            panel.dummies.erase(
                std::find(panel.dummies.begin(), panel.dummies.end(), present.front()));
        }
    }
}

void write_panel_csv(const PanelDataset& panel, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    CsvWriter w(out);
    w.comment(std::string("epipanel ") + kVersion);
    w.comment("range " + format_date(panel.start) + ".." + format_date(panel.end_date()) + " " +
              cadence_name(panel.cadence));
    write_panel_rows(w, panel);
}

void write_panel_rows(CsvWriter& w, const PanelDataset& panel) {
    w.row({"country", "date", "column", "value"});
    std::vector<std::string> names;
    names.push_back(panel.dependent);
    names.insert(names.end(), panel.regressors.begin(), panel.regressors.end());
    names.insert(names.end(), panel.dummies.begin(), panel.dummies.end());
    for (std::size_t i = 0; i < panel.n(); ++i) {
        for (std::size_t t = 0; t < panel.periods; ++t) {
            std::string date = format_date(panel.date_at(t));
            for (const auto& name : names)
                w.row({panel.countries[i].code, date, name,
                       CsvWriter::format_double(panel.column(name)(long(i), long(t)))});
        }
    }
}

}  // namespace epipanel::ingest
