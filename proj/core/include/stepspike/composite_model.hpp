#pragma once

#include <optional>
#include <vector>

#include "stepspike/calendar.hpp"
#include "stepspike/residual_model.hpp"
#include "stepspike/spike_model.hpp"
#include "stepspike/step_model.hpp"

namespace stepspike {

/// Joint state of the three independent components at one time.
struct CompositeState {
    double t = 0.0;
    StepFactorState step;
    SpikeFactorState spike;  // empty when the model has no spike component
    double residual_rate = 0.0;
};

/// f = f^P + f^Z + f^V, r = r^P + r^Z + r^V, B = B^P B^Z B^V.
class CompositeModel {
public:
    CompositeModel(DateGrid grid, StepModel step, std::optional<SpikeModel> spike,
                   ResidualModel residual);

    const DateGrid& grid() const { return grid_; }
    const StepModel& step() const { return step_; }
    bool has_spikes() const { return spike_.has_value(); }
    const SpikeModel& spike() const { return spike_.value(); }
    const ResidualModel& residual() const { return residual_; }

    CompositeState initial_state() const;

    double forward_rate(const CompositeState& state, double t, double T) const;
    double bond_price(const CompositeState& state, double t, double T) const;
    double log_bond_price(const CompositeState& state, double t, double T) const;
    double short_rate(const CompositeState& state, double t) const;
    /// E_t[r(s)]: stopped factors frozen at t, residual mean decayed from r_t.
    double expected_short_rate(const CompositeState& state, double t, double s) const;

    /// Every x_i, z_i and z_i + h_i, sorted and de-duplicated.
    std::vector<double> event_times() const;

private:
    void check_time(const CompositeState& state, double t) const;

    DateGrid grid_;
    StepModel step_;
    std::optional<SpikeModel> spike_;
    ResidualModel residual_;
};

}  // namespace stepspike
