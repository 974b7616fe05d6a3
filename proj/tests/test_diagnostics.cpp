#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stepspike/diagnostics.hpp"
#include "stepspike/error.hpp"

using namespace stepspike;

namespace {

using Rng = std::mt19937_64;

std::vector<Date> business_days(Date start, std::size_t n) {
    const BusinessCalendar cal;
    std::vector<Date> out;
    for (Date d = cal.adjust_following(start); out.size() < n; d = cal.next_business_day(d)) out.push_back(d);
    return out;
}

FixingSeries series_of(const std::vector<Date>& dates, const std::vector<double>& values) {
    FixingSeries s;
    for (std::size_t i = 0; i < dates.size(); ++i) s.set(dates[i], values[i]);
    return s;
}

std::vector<double> brownian(Rng& rng, std::size_t n, double scale = 1.0) {
    std::normal_distribution<double> z;
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) x[i] = x[i - 1] + scale * z(rng);
    return x;
}

/// Curve observed on `date` whose jump on each later event is `jump(event)`.
CurveObservation curve_with_jumps(Date date, const std::vector<RealizedChange>& events,
                                  const std::function<double(const RealizedChange&)>& jump) {
    CurveObservation c{date, {}, {0.01}};
    for (const auto& ev : events) {
        if (ev.date <= date) continue;
        c.breakpoints.push_back(ev.date);
        c.levels.push_back(c.levels.back() + jump(ev));
    }
    return c;
}

}  // namespace

TEST(Decompose, SeriesEqualToTargetHasNoOtherComponents) {
    const auto dates = business_days(make_date(2021, 1, 4), 60);
    std::vector<double> v(dates.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = i < 30 ? 0.0025 : 0.005;
    const auto s = series_of(dates, v);
    const auto d = decompose(s, s, month_end_observations(s), {kDefaultSpikeThreshold});
    for (std::size_t i = 0; i < dates.size(); ++i) {
        EXPECT_EQ(d.target[i], v[i]);
        EXPECT_EQ(d.eom_spike[i], 0.0);
        EXPECT_EQ(d.non_eom_spike[i], 0.0);
        EXPECT_EQ(d.residual[i], 0.0);
    }
}

TEST(Decompose, SingleEndOfMonthSpikeIsCarriedByTheSpikeComponent) {
    const auto dates = business_days(make_date(2021, 1, 4), 60);
    std::vector<double> target(dates.size(), 0.001), series(dates.size(), 0.001);
    const auto target_s = series_of(dates, target);
    const auto eom = month_end_observations(target_s);
    const Date spike_day = make_date(2021, 1, 29);
    ASSERT_TRUE(eom.count(spike_day));
    for (std::size_t i = 0; i < dates.size(); ++i) {
        if (dates[i] == spike_day) series[i] += 0.003;
    }
    const auto d = decompose(series_of(dates, series), target_s, eom);
    for (std::size_t i = 0; i < dates.size(); ++i) {
        EXPECT_EQ(d.eom_spike[i], dates[i] == spike_day ? series[i] - target[i] : 0.0);
        EXPECT_EQ(d.residual[i], 0.0);
        EXPECT_EQ(d.non_eom_spike[i], 0.0);
    }
}

TEST(Decompose, UnclosableSumsStayWithinOneUlp) {
    // No double r satisfies target + r == series for either pair: a rounding
    // tie, and a series far below its target.
    const std::vector<std::pair<double, double>> cases{{0.00070588571234263698, 0.0095189831013763552},
                                                       {0.0016051479296883093, 4.399155831342138e-05}};
    for (const auto& [target, value] : cases) {
        const Date d = make_date(2018, 4, 24);
        FixingSeries s, t;
        s.set(d, value);
        t.set(d, target);
        const auto dec = decompose(s, t, {});
        const double sum = dec.target[0] + dec.eom_spike[0] + dec.non_eom_spike[0] + dec.residual[0];
        const double largest = std::max(std::abs(target), std::abs(dec.residual[0]));
        EXPECT_LE(std::abs(sum - value), std::nextafter(largest, 1.0) - largest);
        EXPECT_EQ(dec.eom_spike[0], 0.0);
        EXPECT_EQ(dec.non_eom_spike[0], 0.0);
    }
}

TEST(Decompose, NonEndOfMonthSpikesAboveThreshold) {
    const auto dates = business_days(make_date(2021, 1, 4), 40);
    std::vector<double> target(dates.size(), 0.001), series(dates.size(), 0.001);
    series[10] += 0.01;   // large: non-EOM spike in SOFR mode
    series[20] += 0.001;  // small: residual
    const auto t = series_of(dates, target);
    const auto sofr = decompose(series_of(dates, series), t, month_end_observations(t), {kDefaultSpikeThreshold});
    EXPECT_NEAR(sofr.non_eom_spike[10], 0.01, 1e-15);
    EXPECT_NEAR(sofr.non_eom_spike[11], -0.0, 1e-15);
    EXPECT_EQ(sofr.non_eom_spike[20], 0.0);
    EXPECT_NEAR(sofr.residual[20], 0.001, 1e-15);
    const auto effr = decompose(series_of(dates, series), t, month_end_observations(t));
    for (double j : effr.non_eom_spike) EXPECT_EQ(j, 0.0);
    EXPECT_NEAR(effr.residual[10], 0.01, 1e-15);
}

TEST(Decompose, ReconstructionIsExactToMachinePrecision) {
    Rng rng(61);
    std::uniform_real_distribution<double> u(-0.01, 0.01);
    std::size_t bitwise = 0, points = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto dates = business_days(make_date(2020, 1, 2), 120);
        std::vector<double> target(dates.size()), series(dates.size());
        double level = 0.015;
        for (std::size_t i = 0; i < dates.size(); ++i) {
            if (i % 37 == 0) level += 0.0025 * std::round(u(rng) * 400.0) / 4.0;
            target[i] = level;
            series[i] = level + u(rng) * (i % 5 == 0 ? 1.0 : 0.1);
        }
        const auto t = series_of(dates, target);
        const auto d = decompose(series_of(dates, series), t, month_end_observations(t), {0.002});
        for (std::size_t i = 0; i < dates.size(); ++i) {
            const double sum = d.target[i] + d.eom_spike[i] + d.non_eom_spike[i] + d.residual[i];
            const double largest = std::max({std::abs(d.target[i]), std::abs(d.eom_spike[i]),
                                             std::abs(d.non_eom_spike[i]), std::abs(d.residual[i])});
            EXPECT_LE(std::abs(sum - series[i]), std::nextafter(largest, 1.0) - largest);
            bitwise += sum == series[i];
            ++points;
        }
    }
    EXPECT_GE(bitwise, points * 99 / 100);
}

TEST(Decompose, VarianceContributionsRankAsConstructed) {
    Rng rng(62);
    std::normal_distribution<double> z;
    const auto dates = business_days(make_date(2018, 1, 2), 1500);
    std::vector<double> target(dates.size()), series(dates.size());
    double level = 0.01, ar = 0.0;
    for (std::size_t i = 0; i < dates.size(); ++i) {
        if (i % 40 == 20) level += (z(rng) > 0 ? 1 : -1) * 0.0025;
        ar = 0.5 * ar + 0.00005 * z(rng);
        target[i] = level;
        series[i] = level + ar;
    }
    const auto t = series_of(dates, target);
    const auto eom = month_end_observations(t);
    for (std::size_t i = 0; i < dates.size(); ++i) {
        if (eom.count(dates[i])) series[i] += 0.0005 + 0.0002 * z(rng);
    }
    const auto d = decompose(series_of(dates, series), t, eom);
    const double vt = variance_of_changes(d.target);
    const double vz = variance_of_changes(d.eom_spike);
    const double vr = variance_of_changes(d.residual);
    EXPECT_GT(vt, vz);
    EXPECT_GT(vz, vr);
    EXPECT_GE(vr, 0.0);
}

TEST(Decompose, MissingTargetObservationIsAConsistencyError) {
    const auto dates = business_days(make_date(2021, 1, 4), 10);
    const auto s = series_of(dates, std::vector<double>(10, 0.01));
    FixingSeries t = series_of(std::vector<Date>(dates.begin(), dates.end() - 1), std::vector<double>(9, 0.01));
    EXPECT_THROW(decompose(s, t, {}), ConsistencyError);
}

TEST(ChangeStatistics, VarianceAndCorrelation) {
    const std::vector<double> a{0.0, 1.0, 3.0, 6.0};
    EXPECT_DOUBLE_EQ(variance_of_changes(a), 1.0);
    const std::vector<double> b{0.0, 2.0, 6.0, 12.0};
    EXPECT_DOUBLE_EQ(correlation_of_changes(a, b), 1.0);
    const std::vector<double> c{1.0, 2.0, 3.0, 4.0};
    EXPECT_TRUE(std::isnan(correlation_of_changes(a, c)));
}

TEST(Hurst, BrownianPathIsNearOneHalf) {
    Rng rng(63);
    const auto lags = lag_range(1, 20);
    double mean = 0.0;
    const int reps = 20;
    for (int r = 0; r < reps; ++r) {
        const double h = hurst_exponent(brownian(rng, 5000), lags);
        EXPECT_GT(h, 0.4);
        EXPECT_LT(h, 0.6);
        mean += h / reps;
    }
    EXPECT_NEAR(mean, 0.5, 0.03);
}

TEST(Hurst, MeanRevertingOuIsAntiPersistent) {
    Rng rng(64);
    std::normal_distribution<double> z;
    const double beta = 50.0, dt = 1.0 / 252.0;
    const double a = std::exp(-beta * dt);
    std::vector<double> x(5000, 0.0);
    for (std::size_t i = 1; i < x.size(); ++i) x[i] = a * x[i - 1] + z(rng);
    EXPECT_LT(hurst_exponent(x, lag_range(1, 20)), 0.4);
}

TEST(Hurst, ScaleAndShiftInvariance) {
    Rng rng(65);
    const auto x = brownian(rng, 2000);
    const auto lags = lag_range(1, 20);
    const double h = hurst_exponent(x, lags);
    std::vector<double> scaled(x), scaled_exact(x), shifted(x), trended(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        scaled[i] = 3.7 * x[i];
        scaled_exact[i] = 4.0 * x[i];
        shifted[i] = x[i] + 12.5;
        trended[i] = x[i] + 0.05 * static_cast<double>(i);
    }
    EXPECT_NEAR(hurst_exponent(scaled_exact, lags), h, 1e-12);
    EXPECT_NEAR(hurst_exponent(scaled, lags), h, 1e-12);
    EXPECT_NEAR(hurst_exponent(shifted, lags), h, 1e-9);
    // Lagged differences are demeaned, so a linear trend drops out.
    EXPECT_NEAR(hurst_exponent(trended, lags), h, 1e-9);
}

TEST(Hurst, AlternatingSeries) {
    std::vector<double> x(400);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 == 0 ? 1.0 : -1.0;
    const std::vector<int> odd{1, 3, 5, 7, 9};
    EXPECT_NEAR(hurst_exponent(x, odd), 0.0, 1e-3);
    const std::vector<int> even{2, 4, 6};
    EXPECT_THROW(hurst_exponent(x, even), std::domain_error);
}

TEST(Hurst, RejectsBadInputs) {
    std::vector<double> x(100, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(static_cast<double>(i));
    EXPECT_THROW(hurst_exponent(x, std::vector<int>{3}), std::invalid_argument);
    EXPECT_THROW(hurst_exponent(x, std::vector<int>{0, 1}), std::invalid_argument);
    EXPECT_THROW(hurst_exponent(x, std::vector<int>{1, 20}), std::invalid_argument);
    const auto fit = hurst_fit(x, std::vector<int>{1, 2, 3});
    EXPECT_EQ(fit.variances.size(), 3u);
    EXPECT_DOUBLE_EQ(fit.h, fit.slope / 2.0);
}

TEST(RSquared, Definition) {
    const std::vector<double> r{1.0, 2.0, 3.0};
    EXPECT_EQ(*r_squared(r, r), 1.0);
    EXPECT_LE(*r_squared(r, std::vector<double>{0.0, 0.0, 0.0}), 0.0);
    EXPECT_EQ(*r_squared(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 1.0}), 1.0);
    EXPECT_FALSE(r_squared(std::vector<double>{1.0, 1.0}, std::vector<double>{0.0, 1.0}).has_value());
    EXPECT_FALSE(r_squared(std::vector<double>{}, std::vector<double>{}).has_value());
}

TEST(AnticipationR2, PerfectForesightAndZeroForecast) {
    Rng rng(66);
    std::uniform_int_distribution<int> sign(-2, 2);
    std::vector<RealizedChange> events;
    for (int k = 0; k < 40; ++k) {
        events.push_back({make_date(2019, 1, 15) + std::chrono::days{45 * k}, 0.0025 * sign(rng)});
    }
    std::vector<CurveObservation> perfect, zero;
    for (int k = 0; k < 300; ++k) {
        const Date d = make_date(2019, 1, 2) + std::chrono::days{5 * k};
        perfect.push_back(curve_with_jumps(d, events, [](const RealizedChange& e) { return e.change; }));
        zero.push_back(curve_with_jumps(d, events, [](const RealizedChange&) { return 0.0; }));
    }
    const auto edges = default_horizon_edges();
    const auto rows = anticipation_r2(perfect, events, edges);
    EXPECT_EQ(rows.size(), edges.size() - 1);
    for (const auto& row : rows) {
        EXPECT_NEAR(row.r2, 1.0, 1e-12);
        EXPECT_GT(row.n, 0u);
    }
    for (const auto& row : anticipation_r2(zero, events, edges)) EXPECT_LE(row.r2, 0.0);
}

TEST(AnticipationR2, NoiseGrowingWithHorizonLowersR2) {
    Rng rng(67);
    std::normal_distribution<double> z;
    std::vector<RealizedChange> events;
    for (int k = 0; k < 150; ++k) {
        events.push_back({make_date(2010, 1, 10) + std::chrono::days{23 * k}, 0.0025 * z(rng)});
    }
    std::vector<CurveObservation> curves;
    for (int k = 0; k < 700; ++k) {
        const Date d = make_date(2010, 1, 2) + std::chrono::days{5 * k};
        curves.push_back(curve_with_jumps(d, events, [&](const RealizedChange& e) {
            const double days = static_cast<double>((e.date - d).count());
            return e.change + 0.0025 * (days / 100.0) * z(rng);
        }));
    }
    const std::vector<int> edges{0, 50, 100, 150, 200, 250};
    const auto rows = anticipation_r2(curves, events, edges);
    ASSERT_EQ(rows.size(), 5u);
    for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_LT(rows[k].r2, rows[k - 1].r2);
}

TEST(AnticipationR2, NaiveVariantReadsTheNextMonthStart) {
    const std::vector<RealizedChange> events{{make_date(2021, 3, 18), 0.0025}};
    const CurveObservation c{make_date(2021, 1, 4), {make_date(2021, 3, 18), make_date(2021, 4, 1)},
                             {0.001, 0.0035, 0.0050}};
    const std::vector<int> edges{0, 100};
    const std::vector<CurveObservation> curves{c};
    // A single-sample bucket has SST = 0: R^2 is 1 only for an exact match.
    EXPECT_EQ(anticipation_r2(curves, events, edges).front().r2, 1.0);
    EXPECT_TRUE(anticipation_r2(curves, events, edges, true).empty());
    const std::vector<RealizedChange> april{{make_date(2021, 3, 18), 0.0015}};
    EXPECT_EQ(anticipation_r2(curves, april, edges, true).front().r2, 1.0);
    EXPECT_THROW(anticipation_r2(curves, events, std::vector<int>{5}), std::invalid_argument);
}
