#include "stepspike/diagnostics.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "stepspike/error.hpp"

namespace stepspike {

const std::vector<double>& Decomposition::component(std::size_t k) const {
    switch (k) {
        case 0: return target;
        case 1: return eom_spike;
        case 2: return non_eom_spike;
        case 3: return residual;
    }
    throw std::out_of_range("component index");
}

std::set<Date> month_end_observations(const FixingSeries& series) {
    std::set<Date> out;
    const auto& v = series.values();
    for (auto it = v.begin(); it != v.end(); ++it) {
        auto next = std::next(it);
        if (next == v.end() || first_of_month(next->first) != first_of_month(it->first)) out.insert(it->first);
    }
    return out;
}

namespace {

/// Doubles mapped to unsigned integers in the same order.
std::uint64_t order_key(double x) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    return (bits >> 63) ? ~bits : bits | (std::uint64_t{1} << 63);
}

double from_order_key(std::uint64_t key) {
    return std::bit_cast<double>((key >> 63) ? key & ~(std::uint64_t{1} << 63) : ~key);
}

/// Residual r with ((a + r) == s) in floating point. a + r is monotone in r,
/// so the smallest r reaching s is found by bisection over ordered doubles.
std::optional<double> closing_residual(double a, double s) {
    const double r0 = s - a;
    if (a + r0 == s) return r0;
    const double width = 4.0 * (std::abs(s) + std::abs(a)) * std::numeric_limits<double>::epsilon();
    std::uint64_t lo = order_key(r0 - width), hi = order_key(r0 + width);
    if (!(a + from_order_key(lo) < s) || !(a + from_order_key(hi) >= s)) return std::nullopt;
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (a + from_order_key(mid) < s) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double r = from_order_key(hi);
    if (a + r == s) return r;
    return std::nullopt;
}

}  // namespace

Decomposition decompose(const FixingSeries& series, const FixingSeries& target, const std::set<Date>& eom_dates,
                        const DecomposeOptions& options) {
    if (options.spike_threshold && !(*options.spike_threshold >= 0.0)) {
        throw InputError("spike threshold must be non-negative");
    }
    Decomposition out;
    double prev_residual = 0.0;
    bool first = true;
    for (const auto& [date, value] : series.values()) {
        auto tv = target.find(date);
        if (!tv) throw ConsistencyError("target series has no observation on " + format_date(date));
        const double deviation = value - *tv;
        const double base = first ? deviation : prev_residual;
        const double jump = deviation - base;
        double z = 0.0, j = 0.0;
        if (eom_dates.count(date)) {
            z = jump;
        } else if (options.spike_threshold && std::abs(jump) > *options.spike_threshold) {
            j = jump;
        }
        // Bitwise closing when some residual reaches the series, dropping the
        // spike split if only that closes; otherwise the nearest residual.
        auto closed = closing_residual(*tv + z + j, value);
        if (!closed && (z != 0.0 || j != 0.0)) {
            if (auto whole = closing_residual(*tv, value)) {
                z = j = 0.0;
                closed = whole;
            }
        }
        const double resid = closed.value_or(value - (*tv + z + j));
        out.dates.push_back(date);
        out.series.push_back(value);
        out.target.push_back(*tv);
        out.eom_spike.push_back(z);
        out.non_eom_spike.push_back(j);
        out.residual.push_back(resid);
        prev_residual = resid;
        first = false;
    }
    return out;
}

double variance_of_changes(std::span<const double> values) {
    if (values.size() < 3) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t n = values.size() - 1;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += values[i + 1] - values[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = values[i + 1] - values[i] - mean;
        ss += d * d;
    }
    return ss / static_cast<double>(n - 1);
}

double correlation_of_changes(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("series lengths differ");
    if (a.size() < 3) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t n = a.size() - 1;
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i + 1] - a[i];
        mb += b[i + 1] - b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i + 1] - a[i] - ma;
        const double db = b[i + 1] - b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

double HurstFit::fitted_log_variance(int lag) const { return intercept + slope * std::log(static_cast<double>(lag)); }

HurstFit hurst_fit(std::span<const double> values, std::span<const int> lags_in) {
    std::vector<int> lags(lags_in.begin(), lags_in.end());
    std::sort(lags.begin(), lags.end());
    lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
    if (lags.size() < 2) throw std::invalid_argument("Hurst fit needs at least two distinct lags");
    if (lags.front() < 1) throw std::invalid_argument("Hurst lags must be positive");
    if (values.size() < 10 * static_cast<std::size_t>(lags.back())) {
        throw std::invalid_argument("series must be at least ten times the largest lag");
    }
    HurstFit fit;
    fit.lags = lags;
    std::vector<double> lx, ly;
    for (int lag : lags) {
        const std::size_t n = values.size() - static_cast<std::size_t>(lag);
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += values[i + lag] - values[i];
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = values[i + lag] - values[i] - mean;
            ss += d * d;
        }
        const double var = ss / static_cast<double>(n - 1);
        if (!(var > 0.0)) throw std::domain_error("lagged differences have zero variance at lag " + std::to_string(lag));
        fit.variances.push_back(var);
        lx.push_back(std::log(static_cast<double>(lag)));
        ly.push_back(std::log(var));
    }
    const double k = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= k;
    my /= k;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.h = fit.slope / 2.0;
    return fit;
}

double hurst_exponent(std::span<const double> values, std::span<const int> lags) { return hurst_fit(values, lags).h; }

std::vector<int> lag_range(int lo, int hi) {
    std::vector<int> out;
    for (int l = lo; l <= hi; ++l) out.push_back(l);
    return out;
}

double CurveObservation::value(Date d) const {
    if (levels.size() != breakpoints.size() + 1) throw std::invalid_argument("curve needs one more level than breakpoints");
    const auto k = std::upper_bound(breakpoints.begin(), breakpoints.end(), d) - breakpoints.begin();
    return levels[static_cast<std::size_t>(k)];
}

std::optional<double> r_squared(std::span<const double> realized, std::span<const double> predicted) {
    if (realized.size() != predicted.size()) throw std::invalid_argument("series lengths differ");
    if (realized.empty()) return std::nullopt;
    double mean = 0.0;
    for (double r : realized) mean += r;
    mean /= static_cast<double>(realized.size());
    double ssr = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < realized.size(); ++i) {
        ssr += (realized[i] - predicted[i]) * (realized[i] - predicted[i]);
        sst += (realized[i] - mean) * (realized[i] - mean);
    }
    if (sst == 0.0) {
        if (ssr == 0.0) return 1.0;
        return std::nullopt;
    }
    return 1.0 - ssr / sst;
}

std::vector<int> default_horizon_edges() {
    std::vector<int> edges;
    for (int d = 0; d <= 250; d += 10) edges.push_back(d);
    return edges;
}

std::vector<R2Row> anticipation_r2(std::span<const CurveObservation> curves, std::span<const RealizedChange> realized,
                                   std::span<const int> edges, bool naive) {
    if (edges.size() < 2) throw std::invalid_argument("need at least two bucket edges");
    for (std::size_t k = 1; k < edges.size(); ++k) {
        if (edges[k] <= edges[k - 1]) throw std::invalid_argument("bucket edges must be strictly increasing");
    }
    const std::size_t nb = edges.size() - 1;
    std::vector<std::vector<double>> actual(nb), implied(nb);
    for (const auto& curve : curves) {
        for (const auto& ev : realized) {
            if (ev.date <= curve.date) continue;
            const long days = (ev.date - curve.date).count();
            const auto it = std::upper_bound(edges.begin(), edges.end(), days);
            if (it == edges.begin() || it == edges.end()) continue;
            const std::size_t b = static_cast<std::size_t>(it - edges.begin()) - 1;
            Date x = ev.date;
            if (naive && x != first_of_month(x)) x = add_months(first_of_month(x), 1);
            actual[b].push_back(ev.change);
            implied[b].push_back(curve.value(x) - curve.value(x - std::chrono::days{1}));
        }
    }
    std::vector<R2Row> rows;
    for (std::size_t b = 0; b < nb; ++b) {
        auto r2 = r_squared(actual[b], implied[b]);
        if (!r2) continue;
        rows.push_back({edges[b], edges[b + 1], *r2, actual[b].size()});
    }
    return rows;
}

}  // namespace stepspike
