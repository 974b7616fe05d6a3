#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "stepspike/composite_model.hpp"

namespace stepspike {

/// Merge requested times with every event date up to the last requested time.
/// The result starts at 0 and is strictly increasing.
std::vector<double> simulation_times(const CompositeModel& model, std::span<const double> requested);

/// Regular grid of `step_days` calendar days out to `horizon` (years), merged
/// with the event dates.
std::vector<double> simulation_times(const CompositeModel& model, double horizon, int step_days);

struct SimulationOptions {
    std::uint64_t seed = 0;
    unsigned threads = 1;   // 0 selects hardware concurrency
    bool antithetic = false;  // paths 2k and 2k+1 use negated normals
};

/// Joint path generator on a fixed time grid.
///
/// Draws come from one counter stream per (path, factor): step factor j uses
/// stream j, spike factor i stream n + i and the residual stream n + m.
class PathSimulator {
public:
    /// Called at every grid point k with the joint state, r(t_k) and
    /// \int_0^{t_k} r ds.
    using Visitor = std::function<void(std::size_t k, const CompositeState& state, double short_rate,
                                       double integrated_rate)>;

    PathSimulator(const CompositeModel& model, std::vector<double> times, SimulationOptions options = {});

    const CompositeModel& model() const { return *model_; }
    const std::vector<double>& times() const { return times_; }
    const SimulationOptions& options() const { return options_; }

    void run(std::size_t path, const Visitor& visit) const;

private:
    const CompositeModel* model_;
    std::vector<double> times_;
    SimulationOptions options_;
};

struct SimulatedPath {
    std::vector<double> times;
    std::vector<double> short_rate;
    std::vector<double> discount;
    std::vector<CompositeState> states;  // filled only when requested
};

/// Simulate `n_paths` full paths out to `horizon` years on a `grid_step_days`
/// grid refined at every event date.
std::vector<SimulatedPath> simulate_paths(const CompositeModel& model, std::size_t n_paths,
                                          double horizon, int grid_step_days,
                                          SimulationOptions options = {}, bool keep_states = false);

/// Evaluate `payoff(path)` for every path in parallel, storing one value per path.
std::vector<double> map_paths(std::size_t n_paths, unsigned threads,
                              const std::function<double(std::size_t)>& payoff);

}  // namespace stepspike
