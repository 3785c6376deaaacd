#include <benchmark/benchmark.h>

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "epipanel/corr.hpp"
#include "epipanel/date.hpp"
#include "epipanel/regress.hpp"
#include "epipanel/rng.hpp"
#include "epipanel/series.hpp"

using namespace epipanel;

namespace {

double gauss(SplitMix& rng) {
    double u1 = rng.uniform(), u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1 + 1e-12)) * std::cos(6.283185307179586 * u2);
}

regress::DesignMatrix random_design(long n, long k, std::uint64_t seed) {
    SplitMix rng(seed);
    regress::DesignMatrix d;
    d.X.resize(n, k);
    for (long j = 0; j < k; ++j) {
        d.names.push_back("x" + std::to_string(j));
        for (long i = 0; i < n; ++i) d.X(i, j) = gauss(rng);
    }
    return d;
}

Series noise_series(std::uint64_t seed, int n) {
    SplitMix rng(seed);
    Series s;
    s.country = "AA";
    s.variable = Variable::Derived;
    s.cadence = Cadence::Daily;
    s.start = make_date(2021, 1, 1);
    for (int t = 0; t < n; ++t) s.values.push_back(gauss(rng));
    return s;
}

void bm_ols(benchmark::State& state) {
    const long n = state.range(0);
    auto d = random_design(n, 12, 42);
    SplitMix rng(7);
    Eigen::VectorXd y(n);
    for (long i = 0; i < n; ++i) y(i) = gauss(rng);
    for (auto _ : state) benchmark::DoNotOptimize(regress::ols(d, y));
}
BENCHMARK(bm_ols)->Arg(1000)->Arg(30000);

void bm_robust_covariance(benchmark::State& state) {
    const long n = state.range(0);
    auto d = random_design(n, 12, 42);
    SplitMix rng(7);
    Eigen::VectorXd e(n);
    for (long i = 0; i < n; ++i) e(i) = gauss(rng);
    for (auto _ : state) benchmark::DoNotOptimize(regress::robust_covariance(d, e));
}
BENCHMARK(bm_robust_covariance)->Arg(30000);

void bm_spearman(benchmark::State& state) {
    SplitMix rng(3);
    const int n = int(state.range(0));
    std::vector<double> x, y;
    for (int i = 0; i < n; ++i) {
        x.push_back(gauss(rng));
        y.push_back(gauss(rng));
    }
    for (auto _ : state) benchmark::DoNotOptimize(corr::spearman(x, y));
}
BENCHMARK(bm_spearman)->Arg(70)->Arg(1000);

void bm_ccf(benchmark::State& state) {
    auto a = noise_series(1, int(state.range(0)));
    auto b = noise_series(2, int(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(corr::ccf(a, b, 25));
}
BENCHMARK(bm_ccf)->Arg(1054);

void bm_sdc(benchmark::State& state) {
    auto a = noise_series(1, 200);
    auto b = noise_series(2, 200);
    for (auto _ : state)
        benchmark::DoNotOptimize(corr::sdc(a, b, 70, 21, 0.01, int(state.range(0)), 9));
}
BENCHMARK(bm_sdc)->Arg(100)->Unit(benchmark::kMillisecond);

void bm_rolling_mean(benchmark::State& state) {
    auto a = noise_series(1, int(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(rolling_mean(a, 7));
}
BENCHMARK(bm_rolling_mean)->Arg(1054);

}  // namespace

BENCHMARK_MAIN();
