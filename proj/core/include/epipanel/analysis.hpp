#pragma once

#include <map>
#include <string>
#include <vector>

#include "epipanel/ingest.hpp"
#include "epipanel/models.hpp"
#include "epipanel/regress.hpp"

namespace epipanel::analysis {

// Calendar duration: whole months (day-clamped) plus days. Parsed from
// "6m", "7d", "1m14d", or a bare day count.
struct Duration {
    int months = 0;
    int days = 0;

    bool positive() const { return months > 0 || days > 0; }
    std::string text() const;
};

Duration parse_duration(const std::string& text);
Date advance(Date d, const Duration& by);

// Builds the panel for `spec` and runs the fixed-effects fit.
regress::FitResult run_model(const ModelSpec& spec, const ingest::SourceData& sources,
                             regress::RobustKind robust = regress::RobustKind::HC1);

// Log-log elasticity reading of one coefficient, e.g. "a 1% increase in new
// deaths yields a 0.16% increase in document production".
std::string elasticity_interpretation(const regress::FitResult& fit,
                                      const std::string& regressor);

struct TrajectoryPoint {
    Date window_end;
    double beta1 = 0;
    double robust_se = 0;
};

struct ElasticityTrajectory {
    std::string regressor;  // the coefficient being tracked
    Duration window;
    Duration step;
    std::vector<TrajectoryPoint> points;  // ordered by date
};

// Refits the full fixed-effects model on every window position. Windows are
// [start, advance(start, window) - 1 day], advanced by `step`, and indexed by
// their end date. Dummy columns that are constant inside a window are
// dropped from that window's design.
ElasticityTrajectory rolling_elasticity(const ingest::PanelDataset& panel, const ModelSpec& spec,
                                        Duration window, Duration step,
                                        regress::RobustKind robust = regress::RobustKind::HC1);

enum class Quadrant { HighIntHighExt, HighIntLowExt, LowIntHighExt, LowIntLowExt };

const char* quadrant_name(Quadrant q);

struct CountryElasticity {
    std::string country;
    double beta_internal = 0;
    double beta_external = 0;
    double se_internal = 0;
    double se_external = 0;
    Quadrant quadrant = Quadrant::LowIntLowExt;
    double difference = 0;  // beta_internal - beta_external
    bool singular = false;  // fit failed; betas are NaN
};

// One OLS per country (intercept + dummies + the model's two regressors; no
// fixed effects at N=1). A singular design flags the country and the sweep
// continues. Quadrants compare each beta to the cross-country boundary means.
std::vector<CountryElasticity> per_country_fit(const ingest::PanelDataset& panel,
                                               const ModelSpec& spec);

struct TaxonomyReport {
    double boundary_internal = 0;  // mean beta1 over non-outlier countries
    double boundary_external = 0;
    std::vector<std::string> outliers;  // excluded from the boundary means
    std::map<Quadrant, std::vector<std::string>> members;
    std::vector<CountryElasticity> ranking;  // by difference, descending
};

// Quadrant boundaries sit at the cross-country means; a country whose beta
// strays more than 5 interquartile ranges from either median is left out of
// the means (but still assigned a quadrant). Ties resolve upward: a beta
// equal to the boundary counts as High.
TaxonomyReport taxonomy(const std::vector<CountryElasticity>& results);

}  // namespace epipanel::analysis
