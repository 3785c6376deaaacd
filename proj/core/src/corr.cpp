#include "epipanel/corr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "epipanel/errors.hpp"
#include "epipanel/parallel.hpp"
#include "epipanel/rng.hpp"

namespace epipanel::corr {

namespace {

void check_aligned(const Series& a, const Series& b) {
    if (a.cadence != b.cadence)
        throw CadenceError("cadence mismatch between " + a.label() + " and " + b.label());
    if (a.start != b.start || a.size() != b.size())
        throw CoverageError(a.label() + " and " + b.label() + " are not aligned");
}

// Pearson over the given index pairs; the accumulation order and the
// commutativity of the products make it exactly symmetric in (x, y).
std::optional<double> pearson_pairs(const std::vector<std::pair<double, double>>& pairs) {
    const std::size_t n = pairs.size();
    if (n < 3) return std::nullopt;
    double mx = 0, my = 0;
    for (const auto& [x, y] : pairs) {
        mx += x;
        my += y;
    }
    mx /= double(n);
    my /= double(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (const auto& [x, y] : pairs) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if (sxx <= 0 || syy <= 0) return std::nullopt;
    double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

std::vector<double> midranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && v[idx[j]] == v[idx[i]]) ++j;
        double r = (double(i + 1) + double(j)) / 2.0;  // average of 1-based positions i+1..j
        for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = r;
        i = j;
    }
    return ranks;
}

}  // namespace

std::optional<double> CcfResult::at(int h) const {
    if (h < -max_lag || h > max_lag) return std::nullopt;
    return correlations[std::size_t(h + max_lag)];
}

CcfResult ccf(const Series& a, const Series& b, int max_lag) {
    if (max_lag < 0) throw ConfigError("max_lag must be non-negative");
    check_aligned(a, b);
    const long n = long(a.size());
    if (n <= long(max_lag) + 2)
        throw LengthError("series of length " + std::to_string(n) +
                          " is too short for max_lag " + std::to_string(max_lag));

    CcfResult out;
    out.country = a.country;
    out.max_lag = max_lag;
    out.correlations.assign(std::size_t(2 * max_lag + 1), std::nullopt);
    std::vector<std::pair<double, double>> pairs;
    for (int h = -max_lag; h <= max_lag; ++h) {
        pairs.clear();
        for (long t = std::max(0L, -long(h)); t < std::min(n, n - long(h)); ++t) {
            const auto& x = a.values[std::size_t(t)];
            const auto& y = b.values[std::size_t(t + h)];
            if (x && y) pairs.emplace_back(*x, *y);
        }
        out.correlations[std::size_t(h + max_lag)] = pearson_pairs(pairs);
    }
    return out;
}

std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw LengthError("spearman inputs differ in length");
    if (x.size() < 3) throw LengthError("spearman needs at least 3 points");
    std::vector<std::pair<double, double>> pairs;
    auto rx = midranks(x);
    auto ry = midranks(y);
    pairs.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) pairs.emplace_back(rx[i], ry[i]);
    return pearson_pairs(pairs);
}

SdcGrid sdc(const Series& a, const Series& b, int s, int max_lag, double alpha, int n_perm,
            std::uint64_t seed, unsigned threads) {
    check_aligned(a, b);
    if (s < 3) throw ConfigError("sdc window must cover at least 3 points");
    if (max_lag < 0) throw ConfigError("max_lag must be non-negative");
    if (alpha <= 0 || alpha >= 1) throw ConfigError("alpha must be inside (0, 1)");
    if (n_perm < 1) throw ConfigError("n_perm must be positive");
    const long n = long(a.size());
    if (n < long(s) + max_lag)
        throw LengthError("series of length " + std::to_string(n) + " is too short for window " +
                          std::to_string(s) + " with max_lag " + std::to_string(max_lag));

    SdcGrid grid;
    grid.country = a.country;
    grid.window = s;
    grid.max_lag = max_lag;
    grid.alpha = alpha;
    grid.n_perm = n_perm;
    grid.seed = seed;

    // centered ranks per window start; a window with a gap or no rank
    // variance contributes no cells
    const long starts = n - s + 1;
    auto centered_ranks = [&](const Series& src, long from) -> std::vector<double> {
        std::vector<double> w;
        w.reserve(std::size_t(s));
        for (long i = from; i < from + s; ++i) {
            const auto& v = src.values[std::size_t(i)];
            if (!v) return {};
            w.push_back(*v);
        }
        auto ranks = midranks(w);
        double mean = std::accumulate(ranks.begin(), ranks.end(), 0.0) / double(s);
        for (auto& r : ranks) r -= mean;
        double ss = 0;
        for (double r : ranks) ss += r * r;
        if (ss <= 0) return {};
        return ranks;
    };
    std::vector<std::vector<double>> ra, rb;
    ra.resize(std::size_t(starts));
    rb.resize(std::size_t(starts));
    for (long i = 0; i < starts; ++i) {
        ra[std::size_t(i)] = centered_ranks(a, i);
        rb[std::size_t(i)] = centered_ranks(b, i);
    }

    std::vector<std::pair<int, int>> keys;
    for (long x = 0; x < starts; ++x)
        for (long y = std::max(0L, x - max_lag); y < std::min(starts, x + max_lag + 1); ++y)
            if (!ra[std::size_t(x)].empty() && !rb[std::size_t(y)].empty())
                keys.emplace_back(int(x), int(y));

    const int kth = int(std::ceil((1.0 - alpha) * double(n_perm)));
    std::vector<SdcCell> cells(keys.size());
    parallel_for(
        keys.size(),
        [&](std::size_t c) {
            const auto& cx = ra[std::size_t(keys[c].first)];
            const auto& cy = rb[std::size_t(keys[c].second)];
            double sxx = 0, syy = 0;
            for (double v : cx) sxx += v * v;
            for (double v : cy) syy += v * v;
            const double denom = std::sqrt(sxx * syy);
            auto rho_of = [&](const std::vector<double>& py) {
                double sxy = 0;
                for (std::size_t i = 0; i < cx.size(); ++i) sxy += cx[i] * py[i];
                return std::clamp(sxy / denom, -1.0, 1.0);
            };
            SdcCell cell;
            cell.rho = rho_of(cy);

            SplitMix rng(cell_seed(seed, std::uint64_t(keys[c].first),
                                   std::uint64_t(keys[c].second)));
            std::vector<double> perm = cy;
            std::vector<double> abs_rho(static_cast<std::size_t>(n_perm));
            for (int p = 0; p < n_perm; ++p) {
                epipanel::shuffle(perm, rng);
                abs_rho[std::size_t(p)] = std::abs(rho_of(perm));
            }
            std::nth_element(abs_rho.begin(), abs_rho.begin() + (kth - 1), abs_rho.end());
            cell.significant = std::abs(cell.rho) > abs_rho[std::size_t(kth - 1)];
            cells[c] = cell;
        },
        threads);

    for (std::size_t c = 0; c < keys.size(); ++c) grid.cells.emplace(keys[c], cells[c]);
    return grid;
}

}  // namespace epipanel::corr
