#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "epipanel/analysis.hpp"
#include "epipanel/corr.hpp"
#include "epipanel/csv.hpp"

namespace epipanel::output {

std::uint64_t fnv1a64(const std::string& data);
std::string hex64(std::uint64_t v);

// Commented header carried by every output file: tool version, hash of the
// effective config, seed, covered date range, plus free-form extras.
struct Metadata {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string range;
    std::vector<std::pair<std::string, std::string>> extra;
};

void write_header(CsvWriter& w, const Metadata& meta);

// NaN-safe cell: "NA" for missing.
std::string value_cell(double v);

// window_end,beta,se
void write_trajectory_csv(const std::string& path, const Metadata& meta,
                          const analysis::ElasticityTrajectory& traj);

// country,beta_internal,beta_external,quadrant; boundaries and outliers in
// the header; optional panel-regression reference point as country "PANEL".
void write_scatter_csv(const std::string& path, const Metadata& meta,
                       const std::vector<analysis::CountryElasticity>& results,
                       const analysis::TaxonomyReport& report,
                       std::optional<std::pair<double, double>> panel_point);

// country,difference in descending order
void write_difference_csv(const std::string& path, const Metadata& meta,
                          const analysis::TaxonomyReport& report);

// country,beta_internal,se_internal sorted by beta
void write_lollipop_csv(const std::string& path, const Metadata& meta,
                        const std::vector<analysis::CountryElasticity>& results);

// country,lag,rho
void write_ccf_csv(const std::string& path, const Metadata& meta,
                   const std::vector<corr::CcfResult>& results);

// country,x_start,y_start,rho,significant
void write_sdc_csv(const std::string& path, const Metadata& meta, const corr::SdcGrid& grid);

}  // namespace epipanel::output
