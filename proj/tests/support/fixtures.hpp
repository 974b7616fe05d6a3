#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "stepspike/calendar.hpp"
#include "stepspike/composite_model.hpp"
#include "stepspike/curve.hpp"
#include "stepspike/spike_model.hpp"
#include "stepspike/step_model.hpp"

namespace stepspike::fixtures {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline std::vector<double> sorted_distinct(Rng& rng, int n, double lo, double hi, double min_gap) {
    while (true) {
        std::vector<double> v;
        for (int i = 0; i < n; ++i) v.push_back(uniform(rng, lo, hi));
        std::sort(v.begin(), v.end());
        bool ok = true;
        for (std::size_t i = 1; i < v.size(); ++i) ok = ok && v[i] - v[i - 1] > min_gap;
        if (ok) return v;
    }
}

/// Random correlation matrix of the given rank (rank <= n), unit diagonal.
inline Eigen::MatrixXd random_correlation(Rng& rng, int n, int rank) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd a(n, rank);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < rank; ++k) a(i, k) = normal(rng);
    }
    Eigen::MatrixXd c = a * a.transpose();
    Eigen::VectorXd d = c.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd r = d.asDiagonal() * c * d.asDiagonal();
    r = 0.5 * (r + r.transpose());
    r.diagonal().setOnes();
    return r;
}

inline PiecewiseFlatCurve random_curve(Rng& rng, int n_breaks, double horizon, double lo, double hi) {
    auto breaks = sorted_distinct(rng, n_breaks, 0.01, horizon, 1e-3);
    std::vector<double> levels;
    for (int i = 0; i <= n_breaks; ++i) levels.push_back(uniform(rng, lo, hi));
    return PiecewiseFlatCurve(std::move(breaks), std::move(levels));
}

inline StepModel random_step_model(Rng& rng, int n, double vol_hi = 0.02) {
    auto x = sorted_distinct(rng, n, 0.05, 2.5, 0.02);
    std::vector<double> xi;
    for (int i = 0; i < n; ++i) xi.push_back(uniform(rng, 0.0, vol_hi));
    const int rank = uniform_int(rng, 1, n);
    return StepModel(JumpSchedule::steps(x), xi, random_correlation(rng, n, rank),
                     random_curve(rng, uniform_int(rng, 0, 5), 3.0, 0.0, 0.05));
}

inline SpikeModel random_spike_model(Rng& rng, int n, double vol_hi = 0.05) {
    std::vector<double> z, h;
    double t = 0.02;
    for (int i = 0; i < n; ++i) {
        t += uniform(rng, 0.03, 0.3);
        z.push_back(t);
        const double w = uniform(rng, 1.0 / 365.0, 0.05);
        h.push_back(w);
        t += w;
    }
    std::vector<double> sigma, levels;
    for (int i = 0; i < n; ++i) {
        sigma.push_back(uniform(rng, 0.0, vol_hi));
        levels.push_back(uniform(rng, -0.005, 0.01));
    }
    auto schedule = JumpSchedule::spikes(z, h);
    auto f0 = SpikeModel::window_curve(schedule, levels);
    return SpikeModel(std::move(schedule), sigma, std::move(f0));
}

/// Exact integral of a function that is at most quadratic between knots.
/// Each piece is sampled at interior points only, so right-continuous jumps
/// at the knots do not leak across.
inline double piecewise_integral(const std::function<double(double)>& f, double a, double b,
                                 std::vector<double> knots) {
    knots.push_back(a);
    knots.push_back(b);
    std::sort(knots.begin(), knots.end());
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double lo = std::max(a, knots[k]);
        const double hi = std::min(b, knots[k + 1]);
        if (hi <= lo) continue;
        const double len = hi - lo;
        const double f1 = f(lo + 0.25 * len), f2 = f(lo + 0.5 * len), f3 = f(lo + 0.75 * len);
        const double curvature = (f3 - 2.0 * f2 + f1) / (0.125 * len * len);
        sum += len * f2 + curvature * len * len * len / 12.0;
    }
    return sum;
}

/// Event-aware grid from 0 to t: the given events below t, then t.
inline std::vector<double> grid_to(double t, std::span<const double> events) {
    std::vector<double> g;
    for (double e : events) {
        if (e < t - 1e-12) g.push_back(e);
    }
    g.push_back(t);
    return g;
}

/// Random step-model state at time t, built by exact stopped-factor steps.
inline StepFactorState random_step_state(const StepModel& m, double t, Rng& rng) {
    std::normal_distribution<double> normal;
    StepFactorState s = m.initial_state();
    std::vector<double> z(m.factor_count());
    double now = 0.0;
    for (double next : grid_to(t, m.schedule().times())) {
        if (next <= now) continue;
        for (double& v : z) v = normal(rng);
        s = m.evolve(s, next - now, z);
        now = next;
    }
    return s;
}

inline SpikeFactorState random_spike_state(const SpikeModel& m, double t, Rng& rng) {
    std::normal_distribution<double> normal;
    SpikeFactorState s = m.initial_state();
    std::vector<double> z(m.factor_count());
    double now = 0.0;
    for (double next : grid_to(t, m.schedule().times())) {
        if (next <= now) continue;
        for (double& v : z) v = normal(rng);
        s = m.evolve(s, next - now, z);
        now = next;
    }
    return s;
}

}  // namespace stepspike::fixtures
