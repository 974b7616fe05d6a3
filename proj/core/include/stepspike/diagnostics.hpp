#pragma once

#include <array>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "stepspike/calendar.hpp"
#include "stepspike/futures.hpp"

namespace stepspike {

inline constexpr double kDefaultSpikeThreshold = 0.002;

struct DecomposeOptions {
    /// Unexplained jumps above this size on other days count as non-EOM
    /// spikes; unset disables the component (EFFR mode).
    std::optional<double> spike_threshold;
};

/// Daily components whose left-to-right sum
/// target + eom_spike + non_eom_spike + residual reproduces the series to
/// machine precision: bitwise whenever some double residual closes the sum,
/// otherwise within one ulp of the largest component (for example a series
/// far below its target, where the cancellation lands on the target's grid).
struct Decomposition {
    std::vector<Date> dates;
    std::vector<double> series;
    std::vector<double> target;
    std::vector<double> eom_spike;
    std::vector<double> non_eom_spike;
    std::vector<double> residual;

    static constexpr std::array<const char*, 4> component_names{"target", "eom_spike", "non_eom_spike", "residual"};
    const std::vector<double>& component(std::size_t k) const;
};

/// Last observation date of every calendar month in the series.
std::set<Date> month_end_observations(const FixingSeries& series);

/// Split a daily rate series into the target rate, spikes on EOM dates,
/// other large transient spikes and a residual. A spike day's deviation from
/// the previous residual is attributed to the spike and reverts the next day.
/// Throws ConsistencyError when a target observation is missing.
Decomposition decompose(const FixingSeries& series, const FixingSeries& target, const std::set<Date>& eom_dates,
                        const DecomposeOptions& options = {});

/// Sample variance (n - 1) of the day-over-day changes.
double variance_of_changes(std::span<const double> values);
/// Pearson correlation of day-over-day changes; NaN when either is constant.
double correlation_of_changes(std::span<const double> a, std::span<const double> b);

struct HurstFit {
    std::vector<int> lags;
    std::vector<double> variances;  // of overlapping lagged differences
    double slope = 0.0;
    double intercept = 0.0;
    double h = 0.0;                 // slope / 2

    double fitted_log_variance(int lag) const;
};

/// Least-squares fit of log Var[x(t+tau) - x(t)] against log tau.
/// Requires at least two distinct positive lags and a series at least ten
/// times the largest lag; throws std::domain_error for a zero variance.
HurstFit hurst_fit(std::span<const double> values, std::span<const int> lags);
double hurst_exponent(std::span<const double> values, std::span<const int> lags);

/// Consecutive integer lags lo..hi.
std::vector<int> lag_range(int lo, int hi);

/// Piecewise-flat forward curve observed on one date, as a function of date.
struct CurveObservation {
    Date date{};
    std::vector<Date> breakpoints;
    std::vector<double> levels;  // breakpoints.size() + 1

    double value(Date d) const;
};

struct RealizedChange {
    Date date{};
    double change = 0.0;
};

struct R2Row {
    int bucket_lo = 0;
    int bucket_hi = 0;
    double r2 = 0.0;
    std::size_t n = 0;
};

/// 1 - SSR/SST around the realized mean. When SST is zero the result is 1
/// for a perfect fit and empty otherwise.
std::optional<double> r_squared(std::span<const double> realized, std::span<const double> predicted);

/// Bucket edges 0, 10, ..., 250 days.
std::vector<int> default_horizon_edges();

/// Implied jump f(x) - f(x - 1 day) of each curve for every later event date x,
/// bucketed by days ahead in [edge_k, edge_{k+1}). The naive variant reads the
/// jump at the first day of the month following x (or x itself on a month
/// start). Empty buckets are omitted.
std::vector<R2Row> anticipation_r2(std::span<const CurveObservation> curves, std::span<const RealizedChange> realized,
                                   std::span<const int> edges, bool naive = false);

}  // namespace stepspike
