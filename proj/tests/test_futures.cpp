#include <gtest/gtest.h>

#include <cmath>

#include "stepspike/error.hpp"
#include "stepspike/futures.hpp"
#include "support/fixtures.hpp"

using namespace stepspike;
namespace fx = stepspike::fixtures;

namespace {

const Date kAnchor = make_date(2021, 5, 3);

DateGrid grid_at(Date anchor = kAnchor) { return DateGrid(anchor, BusinessCalendar{}); }

/// Deterministic target curve with steps on `dates`, optional spikes and a spread.
CompositeModel deterministic_model(const DateGrid& grid, const std::vector<Date>& dates,
                                   const std::vector<double>& levels, const std::vector<Date>& spike_dates = {},
                                   const std::vector<double>& spike_levels = {}, double spread = 0.0,
                                   const std::vector<double>& xi = {}, const std::vector<double>& sigma = {}) {
    auto steps = JumpSchedule::steps(grid, dates);
    std::vector<double> breaks(steps.times().begin(), steps.times().end());
    std::vector<double> step_vol = xi.empty() ? std::vector<double>(dates.size(), 0.0) : xi;
    StepModel step(steps, step_vol, Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dates.size()),
                                                              static_cast<Eigen::Index>(dates.size())),
                   PiecewiseFlatCurve(breaks, levels));
    std::optional<SpikeModel> spike;
    if (!spike_dates.empty()) {
        auto sched = JumpSchedule::spikes(grid, spike_dates);
        std::vector<double> vols = sigma.empty() ? std::vector<double>(spike_dates.size(), 0.0) : sigma;
        auto curve = SpikeModel::window_curve(sched, spike_levels);
        spike.emplace(sched, vols, curve);
    }
    return CompositeModel(grid, step, spike, ResidualModel::constant_spread(spread));
}

FuturesContract monthly(ContractKind kind, int y, unsigned m) {
    const Date start = make_date(y, m, 1);
    return FuturesContract{kind, start, last_of_month(start), "M", kBackTolerance};
}

FuturesContract quarterly(int y, unsigned m) {
    const Date start = third_wednesday(y, m);
    const Date next = third_wednesday(m == 12 ? y + 1 : y, m == 12 ? 3 : m + 3);
    return FuturesContract{ContractKind::sofr3m, start, next - std::chrono::days{1}, "Q", kBackTolerance};
}

double price_now(const CompositeModel& m, const FuturesContract& c, const FixingSeries& observed = {}) {
    return price_futures(m, m.initial_state(), m.grid().anchor(), c, observed);
}

/// Independent per-calendar-day loop for the compounding product.
double brute_force_sofr3m(const BusinessCalendar& cal, const FuturesContract& c, const std::function<double(Date)>& r) {
    double growth = 1.0;
    Date d = c.ref_start;
    while (d <= c.ref_end) {
        int weight = 1;
        Date next = d + std::chrono::days{1};
        while (next <= c.ref_end && !cal.is_business_day(next)) {
            ++weight;
            next += std::chrono::days{1};
        }
        growth *= 1.0 + weight * r(d) / 360.0;
        d = next;
    }
    const double n = static_cast<double>((c.ref_end - c.ref_start).count() + 1);
    return 100.0 * (1.0 - (360.0 / n) * (growth - 1.0));
}

}  // namespace

TEST(FuturesContract, KindParsingAndValidation) {
    EXPECT_EQ(parse_contract_kind("ff30d"), ContractKind::ff30d);
    EXPECT_EQ(parse_contract_kind("SOFR1M"), ContractKind::sofr1m);
    EXPECT_EQ(parse_contract_kind("Sofr3m"), ContractKind::sofr3m);
    EXPECT_THROW(parse_contract_kind("ED"), InputError);
    EXPECT_EQ(to_string(ContractKind::sofr3m), "SOFR3M");

    EXPECT_NO_THROW(validate_contract(monthly(ContractKind::ff30d, 2021, 2)));
    EXPECT_NO_THROW(validate_contract(quarterly(2021, 6)));
    auto bad = monthly(ContractKind::ff30d, 2021, 2);
    bad.ref_end = make_date(2021, 2, 27);
    EXPECT_THROW(validate_contract(bad), InputError);
    auto bad_q = quarterly(2021, 6);
    bad_q.ref_start += std::chrono::days{1};
    EXPECT_THROW(validate_contract(bad_q), InputError);

    const auto june = monthly(ContractKind::ff30d, 2021, 6);
    EXPECT_EQ(june.days(), 30);
    EXPECT_EQ(default_tolerance(june, make_date(2021, 6, 15)), kFrontTolerance);
    EXPECT_EQ(default_tolerance(june, make_date(2021, 5, 31)), kBackTolerance);
}

TEST(FuturesPricing, ReferenceDaysFillWeekendsWithPriorBusinessDay) {
    const BusinessCalendar cal({make_date(2021, 5, 31)});
    const auto days = reference_days(cal, make_date(2021, 5, 1), make_date(2021, 5, 31));
    int total = 0;
    for (const auto& d : days) {
        EXPECT_TRUE(cal.is_business_day(d.fixing_date));
        total += d.weight;
    }
    EXPECT_EQ(total, 31);
    // May 1-2 2021 is a weekend: attributed to Friday April 30.
    EXPECT_EQ(days.front().fixing_date, make_date(2021, 4, 30));
    EXPECT_EQ(days.front().weight, 2);
    // Friday May 28 covers the weekend and the Memorial Day holiday.
    EXPECT_EQ(days.back().fixing_date, make_date(2021, 5, 28));
    EXPECT_EQ(days.back().weight, 4);
    EXPECT_EQ(settlement_date(cal, monthly(ContractKind::ff30d, 2021, 5)), make_date(2021, 6, 1));
}

TEST(FuturesPricing, FlatTwoPercentMonthIsNinetyEight) {
    const auto g = grid_at();
    const auto m = deterministic_model(g, {}, {0.02});
    EXPECT_NEAR(price_now(m, monthly(ContractKind::ff30d, 2021, 6)), 98.0, 1e-12);
    EXPECT_NEAR(price_now(m, monthly(ContractKind::sofr1m, 2021, 7)), 98.0, 1e-12);
}

TEST(FuturesPricing, MidMonthStepAveragesByDay) {
    const auto g = grid_at();
    const auto m = deterministic_model(g, {make_date(2021, 6, 11)}, {0.01, 0.015});
    EXPECT_NEAR(price_now(m, monthly(ContractKind::ff30d, 2021, 6)), 100.0 - (10 * 1.0 + 20 * 1.5) / 30.0, 1e-12);
    EXPECT_NEAR(price_now(m, monthly(ContractKind::ff30d, 2021, 6)), 98.6667, 5e-5);
}

TEST(FuturesPricing, EndOfMonthSpikeLowersSofr1m) {
    const auto g = grid_at();
    const auto plain = deterministic_model(g, {}, {0.01}, {}, {}, 0.0005);
    const auto spiked = deterministic_model(g, {}, {0.01}, {make_date(2021, 6, 30)}, {0.005}, 0.0005);
    const auto c = monthly(ContractKind::sofr1m, 2021, 6);
    const double diff = price_now(plain, c) - price_now(spiked, c);
    EXPECT_NEAR(diff, 100.0 * 0.005 / 30.0, 1e-12);
    EXPECT_NEAR(diff, 0.01667, 5e-6);
}

TEST(FuturesPricing, Sofr1mWithoutSpikesMatchesFf30dWithSameSpread) {
    const auto g = grid_at();
    const auto m = deterministic_model(g, {make_date(2021, 6, 17), make_date(2021, 7, 29)}, {0.01, 0.0125, 0.015},
                                       {make_date(2021, 9, 30)}, {0.003}, 0.0004);
    for (unsigned month = 6; month <= 8; ++month) {
        EXPECT_EQ(price_now(m, monthly(ContractKind::sofr1m, 2021, month)),
                  price_now(m, monthly(ContractKind::ff30d, 2021, month)));
    }
}

TEST(FuturesPricing, ElapsedPeriodUsesFixingsOnly) {
    const BusinessCalendar cal;
    const auto c = monthly(ContractKind::ff30d, 2021, 4);
    FixingSeries fixings;
    fx::Rng rng(51);
    const auto days = reference_days(cal, c.ref_start, c.ref_end);
    double weighted = 0.0;
    for (const auto& d : days) {
        const double r = fx::uniform(rng, 0.0, 0.02);
        fixings.set(d.fixing_date, r);
        weighted += d.weight * r;
    }
    const auto g = grid_at(make_date(2021, 5, 3));
    const auto m = deterministic_model(g, {}, {0.05});
    EXPECT_NEAR(price_now(m, c, fixings), 100.0 * (1.0 - weighted / 30.0), 1e-12);

    const auto q = quarterly(2021, 3);
    const auto g2 = grid_at(make_date(2021, 6, 16));
    FixingSeries qfix;
    for (const auto& d : reference_days(cal, q.ref_start, q.ref_end)) qfix.set(d.fixing_date, fx::uniform(rng, 0.0, 0.02));
    const auto m2 = deterministic_model(g2, {}, {0.05});
    EXPECT_NEAR(price_now(m2, q, qfix), brute_force_sofr3m(cal, q, [&](Date d) { return qfix.at(d); }), 1e-12);
}

TEST(FuturesPricing, FrontMonthMixesFixingsAndExpectations) {
    const auto g = grid_at(make_date(2021, 6, 14));
    const auto m = deterministic_model(g, {}, {0.02});
    FixingSeries fixings;
    const BusinessCalendar cal;
    double weighted = 0.0;
    for (const auto& d : reference_days(cal, make_date(2021, 6, 1), make_date(2021, 6, 30))) {
        const double r = d.fixing_date < g.anchor() ? 0.01 : 0.02;
        if (d.fixing_date < g.anchor()) fixings.set(d.fixing_date, r);
        weighted += d.weight * r;
    }
    const auto c = monthly(ContractKind::ff30d, 2021, 6);
    EXPECT_NEAR(price_now(m, c, fixings), 100.0 * (1.0 - weighted / 30.0), 1e-12);
    FixingSeries partial;
    partial.set(make_date(2021, 6, 1), 0.01);
    EXPECT_THROW(price_now(m, c, partial), InputError);
}

TEST(FuturesPricing, SettledContractIsRejected) {
    const auto g = grid_at(make_date(2021, 7, 2));
    const auto m = deterministic_model(g, {}, {0.02});
    FixingSeries fixings;
    for (const auto& d : reference_days(BusinessCalendar{}, make_date(2021, 5, 1), make_date(2021, 5, 31))) {
        fixings.set(d.fixing_date, 0.01);
    }
    EXPECT_THROW(price_now(m, monthly(ContractKind::ff30d, 2021, 5), fixings), std::invalid_argument);
    EXPECT_THROW(price_ff30d(m, m.initial_state(), g.anchor(), monthly(ContractKind::sofr1m, 2021, 8), {}),
                 std::invalid_argument);
}

TEST(FuturesPricing, Sofr3mTrivialAndBruteForce) {
    const auto g = grid_at();
    const BusinessCalendar cal;
    const auto q = quarterly(2021, 6);
    EXPECT_EQ(price_now(deterministic_model(g, {}, {0.0}), q), 100.0);
    const auto flat = deterministic_model(g, {}, {0.02});
    EXPECT_NEAR(price_now(flat, q), brute_force_sofr3m(cal, q, [](Date) { return 0.02; }), 1e-12);

    const auto stepped = deterministic_model(g, {make_date(2021, 7, 28), make_date(2021, 9, 22)},
                                             {0.001, 0.0035, 0.006}, {make_date(2021, 6, 30), make_date(2021, 7, 30)},
                                             {0.004, 0.002}, 0.0003);
    const auto s0 = stepped.initial_state();
    const auto r = [&](Date d) { return stepped.expected_short_rate(s0, 0.0, g.time(d)); };
    EXPECT_NEAR(price_now(stepped, q), brute_force_sofr3m(cal, q, r), 1e-12);
}

TEST(FuturesPricing, CompoundedTermRate) {
    const BusinessCalendar cal;
    const Date start = make_date(2021, 6, 16);
    const Date end = make_date(2021, 9, 14);
    ASSERT_EQ((end - start).count() + 1, 91);
    EXPECT_EQ(compounded_term_rate(cal, start, end, [](Date) { return 0.0; }), 0.0);
    const Date wed = make_date(2021, 6, 16);
    EXPECT_NEAR(compounded_term_rate(cal, wed, wed, [](Date) { return 0.031; }), 0.031, 1e-13);

    FuturesContract c{ContractKind::sofr3m, start, end, "Q", kBackTolerance};
    const double brute = (100.0 - brute_force_sofr3m(cal, c, [](Date) { return 0.03; })) / 100.0;
    EXPECT_NEAR(compounded_term_rate(cal, start, end, [](Date) { return 0.03; }), brute, 1e-12);

    FixingSeries forwards;
    for (const auto& d : reference_days(cal, start, end)) forwards.set(d.fixing_date, 0.03);
    EXPECT_NEAR(compounded_term_rate(cal, start, end, forwards), brute, 1e-12);
    FixingSeries missing;
    missing.set(start, 0.03);
    EXPECT_THROW(compounded_term_rate(cal, start, end, missing), InputError);
}

TEST(FuturesPricing, RaisingRatesLowersEveryPrice) {
    fx::Rng rng(52);
    const auto g = grid_at();
    const std::vector<Date> fomc{make_date(2021, 6, 17), make_date(2021, 7, 29), make_date(2021, 9, 23)};
    const std::vector<FuturesContract> contracts{monthly(ContractKind::ff30d, 2021, 6),
                                                 monthly(ContractKind::sofr1m, 2021, 8), quarterly(2021, 6),
                                                 quarterly(2021, 9)};
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> levels(4);
        for (double& l : levels) l = fx::uniform(rng, 0.0, 0.05);
        std::vector<double> higher = levels;
        for (double& l : higher) l += fx::uniform(rng, 1e-5, 0.01);
        const auto lo = deterministic_model(g, fomc, levels);
        const auto hi = deterministic_model(g, fomc, higher);
        for (const auto& c : contracts) EXPECT_LT(price_now(hi, c), price_now(lo, c));
    }
}

TEST(FuturesPricing, ZeroVolMonteCarloIsExact) {
    const auto g = grid_at();
    const auto m = deterministic_model(g, {make_date(2021, 6, 17)}, {0.01, 0.0125}, {make_date(2021, 6, 30)},
                                       {0.004}, 0.0002);
    for (const auto& c : {monthly(ContractKind::ff30d, 2021, 6), quarterly(2021, 6)}) {
        const auto est = mc_price_futures(m, c, {}, 64);
        EXPECT_NEAR(est.mean, price_now(m, c), 1e-12);
        EXPECT_LT(est.std_error, 1e-13);
    }
}

TEST(FuturesPricing, LinearPayoffsMatchMonteCarlo) {
    const auto g = grid_at();
    const auto m = deterministic_model(g, {make_date(2021, 6, 17), make_date(2021, 7, 29)}, {0.01, 0.0125, 0.015},
                                       {make_date(2021, 7, 30)}, {0.004}, 0.0002, {0.01, 0.015}, {0.05});
    for (const auto& c : {monthly(ContractKind::ff30d, 2021, 7), monthly(ContractKind::sofr1m, 2021, 8)}) {
        const auto est = mc_price_futures(m, c, {}, 10000, {11, 2, false});
        EXPECT_NEAR(est.mean, price_now(m, c), 3.0 * est.std_error);
        EXPECT_GT(est.std_error, 0.0);
    }
}

TEST(FuturesPricing, Sofr3mConvexityGapShrinksWithVolSquared) {
    const auto g = grid_at();
    const auto q = quarterly(2021, 9);
    std::vector<double> gaps;
    for (double scale : {0.04, 0.02}) {
        const auto m = deterministic_model(g, {make_date(2021, 9, 23), make_date(2021, 11, 4)}, {0.01, 0.02, 0.03}, {},
                                           {}, 0.0, {scale, scale});
        const auto est = mc_price_futures(m, q, {}, 20000, {3, 1, true});
        gaps.push_back(price_now(m, q) - est.mean);
    }
    // Common random numbers keep the noise well below the gap itself.
    ASSERT_GT(std::abs(gaps[1]), 0.0);
    EXPECT_NEAR(gaps[0] / gaps[1], 4.0, 0.6);
}
