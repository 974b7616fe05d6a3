#pragma once

#include <algorithm>
#include <random>
#include <utility>
#include <vector>

#include "stepspike/calibration.hpp"
#include "stepspike/futures.hpp"

namespace stepspike::fixtures {

/// Monthly contract covering the whole calendar month of `first_day`.
inline FuturesContract month_contract(ContractKind kind, Date first_day) {
    return FuturesContract{kind, first_day, last_of_month(first_day), format_date(first_day).substr(0, 7),
                           kBackTolerance};
}

/// IMM quarter starting on the third Wednesday of `month`.
inline FuturesContract quarter_contract(int year, unsigned month) {
    const Date start = third_wednesday(year, month);
    const Date next = month >= 10 ? third_wednesday(year + 1, month - 9) : third_wednesday(year, month + 3);
    return FuturesContract{ContractKind::sofr3m, start, next - std::chrono::days{1},
                           "Q" + format_date(start).substr(0, 7), kBackTolerance};
}

/// Synthetic market generated from a known target curve, EFFR and SOFR spreads
/// and end-of-month spikes.
struct SyntheticMarket {
    DateGrid grid{make_date(2021, 1, 4), BusinessCalendar{}};
    std::vector<Date> fomc;
    std::vector<double> levels;
    double effr_spread = 0.0;
    double sofr_spread = 0.0;
    std::vector<Date> spike_dates;
    std::vector<double> spike_levels;
    FixingSeries effr_fixings;
    FixingSeries sofr_fixings;
    std::vector<FuturesQuote> ff_quotes;
    std::vector<FuturesQuote> sofr_quotes;

    Date valuation() const { return grid.anchor(); }

    FfProblem ff_problem() const {
        return FfProblem{valuation(), fomc, ff_quotes, effr_fixings, levels.front(), 0.0};
    }
    SofrProblem sofr_problem() const { return SofrProblem{valuation(), spike_dates, {}, sofr_quotes, sofr_fixings}; }
};

/// Truth model prices come from `price_futures`, independently of the
/// calibration's own pricing path.
inline SyntheticMarket make_market(std::uint64_t seed, double injected_spike = -1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> move(-0.005, 0.005);
    SyntheticMarket mk;
    const BusinessCalendar& cal = mk.grid.calendar();
    // Effective dates of eight scheduled meetings, the day after each decision.
    for (auto [m, d] : std::vector<std::pair<unsigned, unsigned>>{
             {1, 28}, {3, 18}, {4, 29}, {6, 17}, {7, 29}, {9, 23}, {11, 4}, {12, 16}}) {
        mk.fomc.push_back(make_date(2021, m, d));
    }
    double level = std::uniform_real_distribution<double>(0.005, 0.03)(rng);
    mk.levels.push_back(level);
    for (std::size_t i = 0; i < mk.fomc.size(); ++i) {
        level = std::clamp(level + move(rng), 0.0, 0.06);
        mk.levels.push_back(level);
    }
    mk.effr_spread = std::uniform_real_distribution<double>(-0.0005, 0.001)(rng);
    mk.sofr_spread = std::uniform_real_distribution<double>(-0.001, 0.0005)(rng);
    mk.spike_dates = month_end_dates(cal, mk.valuation(), make_date(2021, 12, 31));
    std::uniform_real_distribution<double> spike(0.0, 0.003);
    for (std::size_t i = 0; i < mk.spike_dates.size(); ++i) mk.spike_levels.push_back(spike(rng));
    if (injected_spike >= 0.0) mk.spike_levels[5] = injected_spike;

    FfCalibration ff;
    ff.valuation = mk.valuation();
    ff.breakpoints = mk.fomc;
    ff.levels = mk.levels;
    ff.identified.assign(mk.levels.size(), true);
    ff.spread = mk.effr_spread;
    SofrCalibration sofr;
    sofr.valuation = mk.valuation();
    sofr.spike_dates = mk.spike_dates;
    for (Date z : mk.spike_dates) sofr.spike_widths.push_back(days_to_next_business_day(cal, z));
    sofr.spike_levels = mk.spike_levels;
    sofr.identified.assign(mk.spike_dates.size(), true);
    sofr.spread = mk.sofr_spread;

    const auto effr = make_effr_model(mk.grid, ff);
    const auto sofr_model = make_sofr_model(mk.grid, ff, sofr);
    for (Date d = make_date(2020, 12, 1); d < mk.valuation(); d += std::chrono::days{1}) {
        mk.effr_fixings.set(d, mk.levels.front() + mk.effr_spread);
        mk.sofr_fixings.set(d, mk.levels.front() + mk.sofr_spread);
    }

    std::vector<FuturesContract> monthly;
    for (unsigned m = 1; m <= 12; ++m) monthly.push_back(month_contract(ContractKind::ff30d, make_date(2021, m, 1)));
    for (auto c : monthly) {
        c.tolerance = default_tolerance(c, mk.valuation());
        const double p = price_futures(effr, effr.initial_state(), mk.valuation(), c, mk.effr_fixings);
        mk.ff_quotes.push_back({c, mk.valuation(), p});
        c.kind = ContractKind::sofr1m;
        const double s = price_futures(sofr_model, sofr_model.initial_state(), mk.valuation(), c, mk.sofr_fixings);
        mk.sofr_quotes.push_back({c, mk.valuation(), s});
    }
    for (unsigned m : {3u, 6u, 9u}) {
        auto q = quarter_contract(2021, m);
        const double p = price_futures(sofr_model, sofr_model.initial_state(), mk.valuation(), q, mk.sofr_fixings);
        mk.sofr_quotes.push_back({q, mk.valuation(), p});
    }
    return mk;
}

}  // namespace stepspike::fixtures
