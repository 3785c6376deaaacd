#include "epipanel/output.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "epipanel/errors.hpp"
#include "epipanel/version.hpp"

namespace epipanel::output {

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[std::size_t(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

void write_header(CsvWriter& w, const Metadata& meta) {
    w.comment(std::string("epipanel ") + kVersion);
    w.comment("config " + (meta.config_hash.empty() ? std::string("none") : meta.config_hash));
    w.comment("seed " + std::to_string(meta.seed));
    w.comment("range " + (meta.range.empty() ? std::string("none") : meta.range));
    for (const auto& [key, value] : meta.extra) w.comment(key + " " + value);
}

std::string value_cell(double v) {
    if (std::isnan(v)) return "NA";
    return CsvWriter::format_double(v);
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Metadata& meta,
                          const analysis::ElasticityTrajectory& traj) {
    auto out = open_out(path);
    CsvWriter w(out);
    Metadata m = meta;
    m.extra.emplace_back("regressor", traj.regressor);
    m.extra.emplace_back("window", traj.window.text());
    m.extra.emplace_back("step", traj.step.text());
    write_header(w, m);
    w.row({"window_end", "beta", "se"});
    for (const auto& p : traj.points)
        w.row({format_date(p.window_end), value_cell(p.beta1), value_cell(p.robust_se)});
}

void write_scatter_csv(const std::string& path, const Metadata& meta,
                       const std::vector<analysis::CountryElasticity>& results,
                       const analysis::TaxonomyReport& report,
                       std::optional<std::pair<double, double>> panel_point) {
    auto out = open_out(path);
    CsvWriter w(out);
    Metadata m = meta;
    m.extra.emplace_back("boundary_internal", value_cell(report.boundary_internal));
    m.extra.emplace_back("boundary_external", value_cell(report.boundary_external));
    if (!report.outliers.empty()) {
        std::string joined;
        for (const auto& code : report.outliers)
            joined += (joined.empty() ? "" : " ") + code;
        m.extra.emplace_back("outliers", joined);
    }
    write_header(w, m);
    w.row({"country", "beta_internal", "beta_external", "quadrant"});
    for (const auto& r : results) {
        w.row({r.country, value_cell(r.beta_internal), value_cell(r.beta_external),
               r.singular ? "singular" : analysis::quadrant_name(r.quadrant)});
    }
    if (panel_point)
        w.row({"PANEL", value_cell(panel_point->first), value_cell(panel_point->second), "panel"});
}

void write_difference_csv(const std::string& path, const Metadata& meta,
                          const analysis::TaxonomyReport& report) {
    auto out = open_out(path);
    CsvWriter w(out);
    write_header(w, meta);
    w.row({"country", "difference"});
    for (const auto& r : report.ranking) w.row({r.country, value_cell(r.difference)});
}

void write_lollipop_csv(const std::string& path, const Metadata& meta,
                        const std::vector<analysis::CountryElasticity>& results) {
    auto out = open_out(path);
    CsvWriter w(out);
    write_header(w, meta);
    w.row({"country", "beta_internal", "se_internal"});
    std::vector<analysis::CountryElasticity> sorted = results;
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.singular != b.singular) return !a.singular;  // flagged countries last
        if (a.singular) return a.country < b.country;
        if (a.beta_internal != b.beta_internal) return a.beta_internal > b.beta_internal;
        return a.country < b.country;
    });
    for (const auto& r : sorted)
        w.row({r.country, value_cell(r.beta_internal), value_cell(r.se_internal)});
}

void write_ccf_csv(const std::string& path, const Metadata& meta,
                   const std::vector<corr::CcfResult>& results) {
    auto out = open_out(path);
    CsvWriter w(out);
    Metadata m = meta;
    m.extra.emplace_back("convention",
                         "rho(h) correlates a[t] with b[t+h]; negative h means a leads b");
    write_header(w, m);
    w.row({"country", "lag", "rho"});
    for (const auto& r : results)
        for (int h = -r.max_lag; h <= r.max_lag; ++h) {
            auto rho = r.at(h);
            w.row({r.country, std::to_string(h),
                   rho ? CsvWriter::format_double(*rho) : std::string("NA")});
        }
}

void write_sdc_csv(const std::string& path, const Metadata& meta, const corr::SdcGrid& grid) {
    auto out = open_out(path);
    CsvWriter w(out);
    Metadata m = meta;
    m.extra.emplace_back("window", std::to_string(grid.window));
    m.extra.emplace_back("max_lag", std::to_string(grid.max_lag));
    m.extra.emplace_back("alpha", CsvWriter::format_double(grid.alpha));
    m.extra.emplace_back("n_perm", std::to_string(grid.n_perm));
    write_header(w, m);
    w.row({"country", "x_start", "y_start", "rho", "significant"});
    for (const auto& [key, cell] : grid.cells)
        w.row({grid.country, std::to_string(key.first), std::to_string(key.second),
               value_cell(cell.rho), cell.significant ? "1" : "0"});
}

}  // namespace epipanel::output
