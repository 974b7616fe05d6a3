#include "stepspike/composite_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stepspike {

namespace {
constexpr double kTimeEps = 1e-12;
}

CompositeModel::CompositeModel(DateGrid grid, StepModel step, std::optional<SpikeModel> spike,
                               ResidualModel residual)
    : grid_(std::move(grid)), step_(std::move(step)), spike_(std::move(spike)), residual_(std::move(residual)) {}

CompositeState CompositeModel::initial_state() const {
    CompositeState s;
    s.step = step_.initial_state();
    if (spike_) s.spike = spike_->initial_state();
    s.residual_rate = residual_.initial_rate();
    return s;
}

void CompositeModel::check_time(const CompositeState& state, double t) const {
    if (std::abs(state.t - t) > kTimeEps) {
        throw std::invalid_argument("component states are not consistent with t");
    }
}

double CompositeModel::forward_rate(const CompositeState& state, double t, double T) const {
    if (t > T) throw std::invalid_argument("forward rate requires t <= T");
    check_time(state, t);
    double f = step_.forward_rate(state.step, t, T);
    if (spike_) f += spike_->forward_rate(state.spike, t, T);
    return f + residual_.forward_rate(t, T, state.residual_rate);
}

double CompositeModel::log_bond_price(const CompositeState& state, double t, double T) const {
    if (t > T) throw std::invalid_argument("bond price requires t <= T");
    check_time(state, t);
    double lb = step_.log_bond_price(state.step, t, T);
    if (spike_) lb += spike_->log_bond_price(state.spike, t, T);
    return lb + residual_.log_bond_price(t, T, state.residual_rate);
}

double CompositeModel::bond_price(const CompositeState& state, double t, double T) const {
    if (t > T) throw std::invalid_argument("bond price requires t <= T");
    check_time(state, t);
    double b = step_.bond_price(state.step, t, T);
    if (spike_) b *= spike_->bond_price(state.spike, t, T);
    return b * residual_.bond_price(t, T, state.residual_rate);
}

double CompositeModel::short_rate(const CompositeState& state, double t) const {
    double r = step_.short_rate(state.step, t);
    if (spike_) r += spike_->short_rate(state.spike, t);
    return r + state.residual_rate;
}

double CompositeModel::expected_short_rate(const CompositeState& state, double t, double s) const {
    if (t > s) throw std::invalid_argument("expected short rate requires t <= s");
    check_time(state, t);
    double r = step_.expected_short_rate(state.step, s);
    if (spike_) r += spike_->expected_short_rate(state.spike, s);
    return r + residual_.expected_rate(state.residual_rate, t, s);
}

std::vector<double> CompositeModel::event_times() const {
    std::vector<double> events(step_.schedule().times().begin(), step_.schedule().times().end());
    if (spike_) {
        const auto& sched = spike_->schedule();
        for (std::size_t i = 0; i < sched.size(); ++i) {
            events.push_back(sched.time(i));
            events.push_back(sched.window_end(i));
        }
    }
    std::sort(events.begin(), events.end());
    std::vector<double> out;
    for (double e : events) {
        if (out.empty() || e - out.back() > kTimeEps) out.push_back(e);
    }
    return out;
}

}  // namespace stepspike
