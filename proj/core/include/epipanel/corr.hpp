#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "epipanel/series.hpp"

namespace epipanel::corr {

struct CcfResult {
    std::string country;
    int max_lag = 25;
    // index h + max_lag; a lag with fewer than 3 overlapping pairs is missing
    std::vector<std::optional<double>> correlations;

    std::optional<double> at(int h) const;
};

// Pearson correlation between a[t] and b[t+h] for every h in -max_lag..max_lag,
// with means and variances restricted to the overlapping pairs of each lag.
// Negative h therefore means a leads b. Inputs must be aligned (same cadence,
// start, and length).
CcfResult ccf(const Series& a, const Series& b, int max_lag);

// Pearson correlation of mid-ranks (ties get the average rank). Missing when
// either rank vector has zero variance.
std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y);

struct SdcCell {
    double rho = 0;
    bool significant = false;
};

struct SdcGrid {
    std::string country;
    int window = 70;
    int max_lag = 21;
    double alpha = 0.01;
    int n_perm = 1000;
    std::uint64_t seed = 0;
    // (x_start, y_start) -> cell; present only where |x - y| <= max_lag and
    // both windows are complete with rank variance
    std::map<std::pair<int, int>, SdcCell> cells;
};

// Scale-dependent correlation raster: Spearman correlation between
// a[x..x+s) and b[y..y+s) for every start pair with |x - y| <= max_lag,
// stepping 1. A cell is significant when |rho| exceeds the (1 - alpha)
// order statistic of |rho| under n_perm random shuffles of the second
// window. Per-cell substream seeds make the mask independent of thread
// count.
SdcGrid sdc(const Series& a, const Series& b, int s, int max_lag, double alpha, int n_perm,
            std::uint64_t seed, unsigned threads = 0);

}  // namespace epipanel::corr
