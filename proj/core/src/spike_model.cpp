#include "stepspike/spike_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stepspike {

namespace {

constexpr double kTimeEps = 1e-12;

/// \int_0^u 1(s in [z, z+h)) (s - z) ds.
double window_ramp(double u, double z, double h) {
    if (u < z) return 0.0;
    const double d = std::min(h, u - z);
    return 0.5 * d * d;
}

}  // namespace

SpikeModel::SpikeModel(JumpSchedule schedule, std::vector<double> sigma,
                       PiecewiseFlatCurve initial_forward)
    : schedule_(std::move(schedule)), sigma_(std::move(sigma)), f0_(std::move(initial_forward)) {
    if (schedule_.kind() != JumpSchedule::Kind::spike) {
        throw std::invalid_argument("spike model requires a spike schedule");
    }
    if (schedule_.empty()) throw std::invalid_argument("spike model requires at least one spike date");
    if (sigma_.size() != schedule_.size()) {
        throw std::invalid_argument("need one volatility per spike date");
    }
    for (double v : sigma_) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("spike volatilities must be finite and >= 0");
        }
    }
    // Each curve interval with a nonzero level must sit inside one window.
    const auto breaks = f0_.breaks();
    const auto levels = f0_.levels();
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (levels[k] == 0.0) continue;
        if (k == 0 || k == levels.size() - 1) {
            throw std::invalid_argument("spike forwards must be zero outside the spike windows");
        }
        const double lo = breaks[k - 1];
        const double hi = breaks[k];
        const std::size_t w = window_at(lo);
        if (w == schedule_.size() || hi > schedule_.window_end(w) + kTimeEps) {
            throw std::invalid_argument("spike forwards must be zero outside the spike windows");
        }
    }
}

PiecewiseFlatCurve SpikeModel::window_curve(const JumpSchedule& schedule,
                                            std::span<const double> levels) {
    if (levels.size() != schedule.size()) {
        throw std::invalid_argument("need one spike level per spike date");
    }
    std::vector<double> breaks;
    std::vector<double> values{0.0};
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const double z = schedule.time(i);
        const double end = schedule.window_end(i);
        if (!breaks.empty() && std::abs(breaks.back() - z) <= kTimeEps) {
            values.back() = levels[i];  // adjacent windows share the boundary
        } else {
            breaks.push_back(z);
            values.push_back(levels[i]);
        }
        breaks.push_back(end);
        values.push_back(0.0);
    }
    return PiecewiseFlatCurve(std::move(breaks), std::move(values));
}

std::size_t SpikeModel::window_at(double t) const {
    const auto z = schedule_.times();
    auto it = std::upper_bound(z.begin(), z.end(), t);
    if (it == z.begin()) return schedule_.size();
    const std::size_t i = static_cast<std::size_t>(it - z.begin()) - 1;
    return schedule_.in_window(i, t) ? i : schedule_.size();
}

void SpikeModel::check_state(const SpikeFactorState& state) const {
    if (state.size() != factor_count()) {
        throw std::invalid_argument("spike state does not match the model schedule");
    }
}

void SpikeModel::check_frozen(const SpikeFactorState& state, double t) const {
    check_state(state);
    const std::size_t i = window_at(t);
    if (i < schedule_.size() && state.time() < schedule_.time(i) - kTimeEps) {
        throw std::invalid_argument("spike state lacks the frozen factor value required at t");
    }
}

double SpikeModel::window_overlap(std::size_t i, double t, double T) const {
    const double z = schedule_.time(i);
    const double h = schedule_.width(i);
    return std::max(std::min({T - z, T - t, h, z + h - t}), 0.0);
}

double SpikeModel::forward_rate(const SpikeFactorState& state, double t, double T) const {
    check_state(state);
    if (t > T) throw std::invalid_argument("forward rate requires t <= T");
    if (std::abs(state.time() - t) > kTimeEps) {
        throw std::invalid_argument("spike state time does not match t");
    }
    double f = f0_(T);
    const std::size_t i = window_at(T);
    if (i < schedule_.size()) {
        const double z = schedule_.time(i);
        const double s = sigma_[i];
        f += s * s * (T - z) * std::min(t, z) + s * state.stopped(i);
    }
    return f;
}

double SpikeModel::short_rate_drift(double t) const {
    const std::size_t i = window_at(t);
    if (i == schedule_.size()) return 0.0;
    const double z = schedule_.time(i);
    return sigma_[i] * sigma_[i] * (t - z) * z;
}

double SpikeModel::short_rate_stochastic(const SpikeFactorState& state, double t) const {
    const std::size_t i = window_at(t);
    if (i == schedule_.size()) return 0.0;
    return sigma_[i] * state.stopped(i);
}

double SpikeModel::short_rate(const SpikeFactorState& state, double t) const {
    check_frozen(state, t);
    return f0_(t) + short_rate_drift(t) + short_rate_stochastic(state, t);
}

double SpikeModel::expected_short_rate(const SpikeFactorState& state, double s) const {
    check_state(state);
    if (s < state.time() - kTimeEps) {
        throw std::invalid_argument("expected short rate requires s >= t");
    }
    return f0_(s) + short_rate_drift(s) + short_rate_stochastic(state, s);
}

double SpikeModel::log_bond_price(const SpikeFactorState& state, double t, double T) const {
    check_state(state);
    if (t > T) throw std::invalid_argument("bond price requires t <= T");
    if (std::abs(state.time() - t) > kTimeEps) {
        throw std::invalid_argument("spike state time does not match t");
    }
    double a = 0.0;
    double b = 0.0;
    for (std::size_t i = 0; i < factor_count(); ++i) {
        const double s = sigma_[i];
        if (s == 0.0) continue;
        const double z = schedule_.time(i);
        const double h = schedule_.width(i);
        const double i1 = window_ramp(T, z, h);
        const double i2 = window_ramp(t, z, h);
        a -= s * s * std::min(t, z) * (i1 - i2);
        b -= s * state.stopped(i) * window_overlap(i, t, T);
    }
    return -f0_.integral(t, T) + a + b;
}

double SpikeModel::bond_price(const SpikeFactorState& state, double t, double T) const {
    return std::exp(log_bond_price(state, t, T));
}

double SpikeModel::integrated_short_rate(const SpikeFactorState& state, double t) const {
    check_state(state);
    if (t < 0.0) throw std::invalid_argument("integration horizon must be >= 0");
    double sum = f0_.integral(0.0, t);
    for (std::size_t i = 0; i < factor_count(); ++i) {
        const double z = schedule_.time(i);
        if (t <= z) break;
        if (state.time() < z - kTimeEps) {
            throw std::invalid_argument("spike state lacks the frozen factor value required at t");
        }
        const double s = sigma_[i];
        sum += s * s * z * window_ramp(t, z, schedule_.width(i));
        sum += s * state.stopped(i) * window_overlap(i, 0.0, t);
    }
    return sum;
}

SpikeFactorState SpikeModel::evolve(const SpikeFactorState& state, double dt,
                                    std::span<const double> normals) const {
    check_state(state);
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
    if (normals.size() != factor_count()) {
        throw std::invalid_argument("need one normal draw per spike factor");
    }
    for (double z : normals) {
        if (!std::isfinite(z)) throw std::invalid_argument("non-finite normal draw");
    }
    const auto z = schedule_.times();
    double t_new = state.time() + dt;
    for (double zi : z) {
        if (std::abs(t_new - zi) <= kTimeEps) t_new = zi;
        if (zi > state.time() + kTimeEps && zi < t_new - kTimeEps) {
            throw std::invalid_argument("step crosses a spike date; split the step at z_i");
        }
    }
    SpikeFactorState next = state;
    next.t_ = t_new;
    const double scale = std::sqrt(t_new - state.time());
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] >= t_new) next.w_[i] += scale * normals[i];
    }
    return next;
}

}  // namespace stepspike
