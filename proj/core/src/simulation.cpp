#include "stepspike/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stepspike/parallel.hpp"

namespace stepspike {

namespace {
constexpr double kTimeEps = 1e-12;
}

std::vector<double> simulation_times(const CompositeModel& model, std::span<const double> requested) {
    std::vector<double> all(requested.begin(), requested.end());
    for (double t : all) {
        if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("simulation times must be finite and >= 0");
    }
    double horizon = all.empty() ? 0.0 : *std::max_element(all.begin(), all.end());
    for (double e : model.event_times()) {
        if (e <= horizon + kTimeEps) all.push_back(e);
    }
    all.push_back(0.0);
    std::sort(all.begin(), all.end());
    std::vector<double> out;
    for (double t : all) {
        if (out.empty() || t - out.back() > kTimeEps) out.push_back(t);
    }
    return out;
}

std::vector<double> simulation_times(const CompositeModel& model, double horizon, int step_days) {
    if (step_days <= 0) throw std::invalid_argument("grid step must be a positive number of days");
    if (!(horizon > 0.0)) throw std::invalid_argument("simulation horizon must be positive");
    std::vector<double> grid;
    const Date anchor = model.grid().anchor();
    for (int k = 1;; ++k) {
        double t = model.grid().time(anchor + std::chrono::days{k * step_days});
        if (t >= horizon - kTimeEps) break;
        grid.push_back(t);
    }
    grid.push_back(horizon);
    return simulation_times(model, grid);
}

PathSimulator::PathSimulator(const CompositeModel& model, std::vector<double> times, SimulationOptions options)
    : model_(&model), times_(std::move(times)), options_(options) {
    if (times_.empty() || times_.front() != 0.0) throw std::invalid_argument("simulation grid must start at 0");
    for (std::size_t k = 1; k < times_.size(); ++k) {
        if (!(times_[k] > times_[k - 1])) throw std::invalid_argument("simulation grid must be strictly increasing");
    }
    const auto& step = model.step();
    bool vols = std::any_of(step.xi().begin(), step.xi().end(), [](double x) { return x != 0.0; });
    if (vols && step.schedule().empty()) throw std::invalid_argument("nonzero step vols with empty schedule");
}

void PathSimulator::run(std::size_t path, const Visitor& visit) const {
    const CompositeModel& m = *model_;
    const std::size_t n = m.step().factor_count();
    const std::size_t ns = m.has_spikes() ? m.spike().factor_count() : 0;
    const bool negate = options_.antithetic && (path % 2 == 1);
    const std::uint64_t key = options_.antithetic ? path / 2 : path;

    std::vector<NormalStream> step_streams;
    step_streams.reserve(n);
    for (std::size_t j = 0; j < n; ++j) step_streams.emplace_back(options_.seed, key, j, negate);
    std::vector<NormalStream> spike_streams;
    spike_streams.reserve(ns);
    for (std::size_t i = 0; i < ns; ++i) spike_streams.emplace_back(options_.seed, key, n + i, negate);
    NormalStream residual_stream(options_.seed, key, n + ns, negate);

    std::vector<double> z_step(n), z_spike(ns);
    CompositeState state = m.initial_state();
    double residual_integral = 0.0;
    visit(0, state, m.short_rate(state, 0.0), 0.0);

    for (std::size_t k = 1; k < times_.size(); ++k) {
        const double dt = times_[k] - times_[k - 1];
        for (std::size_t j = 0; j < n; ++j) z_step[j] = step_streams[j]();
        for (std::size_t i = 0; i < ns; ++i) z_spike[i] = spike_streams[i]();
        const double zr = residual_stream();
        const double zi = residual_stream();

        state.step = m.step().evolve(state.step, dt, z_step);
        if (ns > 0) state.spike = m.spike().evolve(state.spike, dt, z_spike);
        auto tr = m.residual().evolve_with_integral(state.residual_rate, dt, zr, zi);
        state.residual_rate = tr.rate;
        residual_integral += tr.integral;
        state.t = times_[k];

        double integral = m.step().integrated_short_rate(state.step, state.t) + residual_integral;
        if (ns > 0) integral += m.spike().integrated_short_rate(state.spike, state.t);
        visit(k, state, m.short_rate(state, state.t), integral);
    }
}

std::vector<SimulatedPath> simulate_paths(const CompositeModel& model, std::size_t n_paths, double horizon,
                                          int grid_step_days, SimulationOptions options, bool keep_states) {
    PathSimulator sim(model, simulation_times(model, horizon, grid_step_days), options);
    std::vector<SimulatedPath> paths(n_paths);
    parallel_for(n_paths, options.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            SimulatedPath& out = paths[p];
            const std::size_t len = sim.times().size();
            out.times = sim.times();
            out.short_rate.resize(len);
            out.discount.resize(len);
            if (keep_states) out.states.resize(len);
            sim.run(p, [&](std::size_t k, const CompositeState& s, double r, double integral) {
                out.short_rate[k] = r;
                out.discount[k] = std::exp(-integral);
                if (keep_states) out.states[k] = s;
            });
        }
    });
    return paths;
}

std::vector<double> map_paths(std::size_t n_paths, unsigned threads,
                              const std::function<double(std::size_t)>& payoff) {
    std::vector<double> values(n_paths);
    parallel_for(n_paths, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) values[p] = payoff(p);
    });
    return values;
}

}  // namespace stepspike
