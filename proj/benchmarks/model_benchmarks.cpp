#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "stepspike/calibration.hpp"
#include "stepspike/composite_model.hpp"
#include "stepspike/diagnostics.hpp"
#include "stepspike/futures.hpp"
#include "stepspike/simulation.hpp"
#include "support/fixtures.hpp"
#include "support/synthetic.hpp"

using namespace stepspike;
namespace fx = stepspike::fixtures;

namespace {

CompositeModel random_composite(int n_fomc, std::uint64_t seed) {
    fx::Rng rng(seed);
    auto step = fx::random_step_model(rng, n_fomc, 0.02);
    auto spike = fx::random_spike_model(rng, 6, 0.05);
    return CompositeModel(DateGrid(make_date(2021, 1, 4), BusinessCalendar{}), std::move(step), std::move(spike),
                          ResidualModel::vasicek({0.002, 5.0, 0.006, 0.001}));
}

}  // namespace

/// Closed-form composite bond price from the initial state, by FOMC count.
static void BM_bond_price(benchmark::State& state) {
    const auto model = random_composite(static_cast<int>(state.range(0)), 7);
    const auto s0 = model.initial_state();
    double T = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.bond_price(s0, 0.0, T));
        T = T > 2.9 ? 0.1 : T + 0.01;
    }
}
BENCHMARK(BM_bond_price)->Arg(4)->Arg(8)->Arg(16);

static void BM_price_futures_strip(benchmark::State& state) {
    const auto mk = fx::make_market(3);
    const auto ff = calibrate_ff(mk.grid, mk.ff_problem());
    const auto sofr = calibrate_sofr(mk.grid, mk.sofr_problem(), ff);
    const auto model = make_sofr_model(mk.grid, ff, sofr);
    const auto s0 = model.initial_state();
    for (auto _ : state) {
        double sum = 0.0;
        for (const auto& q : mk.sofr_quotes) sum += price_futures(model, s0, mk.valuation(), q.contract, mk.sofr_fixings);
        benchmark::DoNotOptimize(sum);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(mk.sofr_quotes.size()));
}
BENCHMARK(BM_price_futures_strip)->Unit(benchmark::kMicrosecond);

static void BM_simulate_paths(benchmark::State& state) {
    const auto model = random_composite(8, 11);
    const auto n_paths = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto paths = simulate_paths(model, n_paths, 2.0, 5, {1, 1, true});
        benchmark::DoNotOptimize(paths.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_simulate_paths)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);

static void BM_calibrate_ff(benchmark::State& state) {
    const auto mk = fx::make_market(5);
    for (auto _ : state) {
        auto fit = calibrate_ff(mk.grid, mk.ff_problem());
        benchmark::DoNotOptimize(fit.levels.data());
    }
}
BENCHMARK(BM_calibrate_ff)->Unit(benchmark::kMillisecond)->Iterations(3);

static void BM_hurst_exponent(benchmark::State& state) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal;
    std::vector<double> walk(static_cast<std::size_t>(state.range(0)));
    double x = 0.0;
    for (double& v : walk) v = (x += normal(rng));
    const auto lags = lag_range(2, 20);
    for (auto _ : state) benchmark::DoNotOptimize(hurst_exponent(walk, lags));
}
BENCHMARK(BM_hurst_exponent)->Arg(1000)->Arg(10000);

BENCHMARK_MAIN();
