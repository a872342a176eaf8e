#include <benchmark/benchmark.h>

#include "crimesim/calibration.hpp"
#include "crimesim/crimestats.hpp"
#include "crimesim/synthcity.hpp"

using namespace crimesim;

namespace {

struct City {
    geodata::Grid grid;
    geodata::CellYearSeries series;
    std::vector<crimestats::CellTrend> trends;
};

City make_city(int rows, int cols) {
    auto spec = synthcity::hotspot_spec(rows, cols, 11, 2010, 2018, 5);
    auto city = synthcity::gen_city(spec);
    auto grid = geodata::build_grid(city.spec, city.attrs, city.districts);
    Rng rng(5);
    auto series = geodata::aggregate_yearly(synthcity::gen_crimes(city, rng), city.spec, 2010, 2018);
    auto trends = crimestats::fit_trends_serial(series, 2017, 2018);
    return {std::move(grid), std::move(series), std::move(trends)};
}

const City& full_size_city() {
    static const City city = make_city(80, 128);
    return city;
}

void BM_FitTrendsSerial(benchmark::State& state) {
    const auto& c = full_size_city();
    for (auto _ : state) benchmark::DoNotOptimize(crimestats::fit_trends_serial(c.series, 2017, 2018));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.grid.n_cells()));
}

void BM_FitTrendsParallel(benchmark::State& state) {
    const auto& c = full_size_city();
    for (auto _ : state) benchmark::DoNotOptimize(crimestats::fit_trends(c.series, 2017, 2018));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.grid.n_cells()));
}

engine::SimParams bench_params() {
    engine::SimParams p;
    p.n_citizens = 1000;
    return p;
}

void BM_RunYear(benchmark::State& state) {
    const auto& c = full_size_city();
    const auto strategy = engine::make_strategy("static");
    auto p = bench_params();
    for (auto _ : state) {
        benchmark::DoNotOptimize(engine::run_year(c.grid, p, strategy, c.trends));
        ++p.seed;
    }
}

void BM_RunConfigSerial(benchmark::State& state) {
    const auto& c = full_size_city();
    const calibration::ReplicationOptions o{static_cast<std::size_t>(state.range(0)), 1};
    for (auto _ : state)
        benchmark::DoNotOptimize(calibration::run_config_serial({}, bench_params(), c.grid, c.trends, o));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_RunConfigParallel(benchmark::State& state) {
    const auto& c = full_size_city();
    const calibration::ReplicationOptions o{static_cast<std::size_t>(state.range(0)), 1};
    for (auto _ : state)
        benchmark::DoNotOptimize(calibration::run_config({}, bench_params(), c.grid, c.trends, o));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_FitTrendsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitTrendsParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunYear)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunConfigSerial)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunConfigParallel)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
