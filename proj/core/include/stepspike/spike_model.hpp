#pragma once

#include <span>
#include <vector>

#include "stepspike/calendar.hpp"
#include "stepspike/curve.hpp"

namespace stepspike {

/// Realized stopped values W_i(t ^ z_i), one independent factor per spike.
class SpikeFactorState {
public:
    SpikeFactorState() = default;
    explicit SpikeFactorState(std::size_t n) : w_(n, 0.0) {}

    double time() const { return t_; }
    std::size_t size() const { return w_.size(); }
    double stopped(std::size_t i) const { return w_[i]; }

private:
    friend class SpikeModel;
    double t_ = 0.0;
    std::vector<double> w_;
};

/// Known-date spike component. Factor i drives only forwards maturing inside
/// H_i = [z_i, z_i + h_i) and stops diffusing at z_i.
class SpikeModel {
public:
    /// `initial_forward` must vanish outside the spike windows.
    SpikeModel(JumpSchedule schedule, std::vector<double> sigma, PiecewiseFlatCurve initial_forward);

    /// Convenience: initial forward equal to `levels[i]` on H_i and zero elsewhere.
    static PiecewiseFlatCurve window_curve(const JumpSchedule& schedule,
                                           std::span<const double> levels);

    const JumpSchedule& schedule() const { return schedule_; }
    std::size_t factor_count() const { return sigma_.size(); }
    std::span<const double> sigma() const { return sigma_; }
    const PiecewiseFlatCurve& initial_forward() const { return f0_; }

    SpikeFactorState initial_state() const { return SpikeFactorState(factor_count()); }

    double forward_rate(const SpikeFactorState& state, double t, double T) const;
    double short_rate(const SpikeFactorState& state, double t) const;
    double bond_price(const SpikeFactorState& state, double t, double T) const;
    double log_bond_price(const SpikeFactorState& state, double t, double T) const;
    double expected_short_rate(const SpikeFactorState& state, double s) const;
    double integrated_short_rate(const SpikeFactorState& state, double t) const;

    /// Deterministic short-rate term net of f^Z(0,t).
    double short_rate_drift(double t) const;
    double short_rate_stochastic(const SpikeFactorState& state, double t) const;

    /// Length of [t,T] intersected with H_i, in the closed form used by the
    /// bond price: [(T-z) ^ (T-t) ^ h ^ (z+h-t)] v 0.
    double window_overlap(std::size_t i, double t, double T) const;

    SpikeFactorState evolve(const SpikeFactorState& state, double dt,
                            std::span<const double> normals) const;

private:
    void check_state(const SpikeFactorState& state) const;
    void check_frozen(const SpikeFactorState& state, double t) const;
    /// Index of the window containing t, or size() when none does.
    std::size_t window_at(double t) const;

    JumpSchedule schedule_;
    std::vector<double> sigma_;
    PiecewiseFlatCurve f0_;
};

}  // namespace stepspike
