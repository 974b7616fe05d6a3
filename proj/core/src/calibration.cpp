#include "stepspike/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stepspike/error.hpp"

namespace stepspike {

double calibration_error(double model_price, double market_price, double tolerance) {
    return std::max(std::abs(model_price - market_price) - tolerance, 0.0);
}

namespace {

/// One weighted fixing of a contract: either an observed rate or a model rate
/// that depends on the unknowns.
struct Term {
    int weight = 1;
    bool observed = false;
    double fixed = 0.0;   // observed rate, or the known part of the model rate
    int level = -1;       // index into the level unknowns
    int spike = -1;       // index into the spike unknowns
};

struct PricedQuote {
    FuturesQuote quote;
    double tolerance = 0.0;
    std::vector<Term> terms;
};

double price_terms(const PricedQuote& q, std::span<const double> levels, std::span<const double> spikes,
                   double spread) {
    const double n = static_cast<double>(q.quote.contract.days());
    if (q.quote.contract.kind == ContractKind::sofr3m) {
        double growth = 1.0;
        for (const Term& t : q.terms) {
            double r = t.fixed;
            if (!t.observed) {
                if (t.level >= 0) r += levels[static_cast<std::size_t>(t.level)];
                if (t.spike >= 0) r += spikes[static_cast<std::size_t>(t.spike)];
                r += spread;
            }
            growth *= 1.0 + t.weight * r / 360.0;
        }
        return 100.0 * (1.0 - (360.0 / n) * (growth - 1.0));
    }
    double sum = 0.0;
    for (const Term& t : q.terms) {
        double r = t.fixed;
        if (!t.observed) {
            if (t.level >= 0) r += levels[static_cast<std::size_t>(t.level)];
            if (t.spike >= 0) r += spikes[static_cast<std::size_t>(t.spike)];
            r += spread;
        }
        sum += t.weight * r;
    }
    return 100.0 * (1.0 - sum / n);
}

double quote_tolerance(const FuturesContract& c, Date valuation, const CalibrationConfig& config) {
    return default_tolerance(c, valuation) == kFrontTolerance ? config.tolerance_front : config.tolerance_back;
}

void check_quote(const FuturesQuote& q, Date valuation, const BusinessCalendar& calendar) {
    validate_contract(q.contract);
    if (q.observe_date != valuation) {
        throw ConsistencyError("quote " + q.contract.code + " observed on " + format_date(q.observe_date) +
                               " does not match valuation date " + format_date(valuation));
    }
    if (!std::isfinite(q.price)) throw InputError("quote " + q.contract.code + " has a non-finite price");
    if (valuation > settlement_date(calendar, q.contract)) {
        throw ConsistencyError("quote " + q.contract.code + " refers to a settled contract");
    }
}

std::size_t interval_of(std::span<const Date> breaks, Date d) {
    return static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), d) - breaks.begin());
}

void fill_unidentified(std::vector<double>& values, const std::vector<bool>& identified, double fallback) {
    const auto first = std::find(identified.begin(), identified.end(), true);
    double carry = first == identified.end() ? fallback : values[static_cast<std::size_t>(first - identified.begin())];
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (identified[k]) {
            carry = values[k];
        } else {
            values[k] = carry;
        }
    }
}

}  // namespace

PiecewiseFlatCurve FfCalibration::curve(const DateGrid& grid) const {
    std::vector<double> breaks;
    breaks.reserve(breakpoints.size());
    for (Date d : breakpoints) breaks.push_back(grid.time(d));
    return PiecewiseFlatCurve(std::move(breaks), levels);
}

FfCalibration calibrate_ff(const DateGrid& grid, const FfProblem& problem, const CalibrationConfig& config) {
    const Date valuation = problem.valuation;
    const auto& calendar = grid.calendar();
    for (std::size_t i = 0; i < problem.breakpoints.size(); ++i) {
        if (problem.breakpoints[i] <= valuation) throw InputError("breakpoints must lie after the valuation date");
        if (i > 0 && problem.breakpoints[i] <= problem.breakpoints[i - 1]) {
            throw InputError("breakpoints must be strictly increasing");
        }
    }

    std::vector<FuturesQuote> quotes;
    for (const auto& q : problem.quotes) {
        if (q.contract.kind != ContractKind::ff30d) continue;
        check_quote(q, valuation, calendar);
        quotes.push_back(q);
    }
    if (quotes.empty()) throw InputError("no Fed Funds quotes to calibrate");
    std::stable_sort(quotes.begin(), quotes.end(),
                     [](const auto& a, const auto& b) { return a.contract.ref_start < b.contract.ref_start; });
    if (quotes.size() > config.max_ff_contracts) quotes.resize(config.max_ff_contracts);

    const std::size_t n_levels = problem.breakpoints.size() + 1;
    FfCalibration out;
    out.valuation = valuation;
    out.breakpoints = problem.breakpoints;
    out.levels.assign(n_levels, 0.0);
    out.identified.assign(n_levels, false);
    out.seed = config.optimizer.seed;
    out.spread_fitted = problem.target_rate.has_value();
    if (problem.target_rate) {
        out.levels[0] = *problem.target_rate;
        out.identified[0] = true;
    }

    std::vector<PricedQuote> priced;
    for (const auto& q : quotes) {
        PricedQuote pq{q, quote_tolerance(q.contract, valuation, config), {}};
        for (const auto& day : reference_days(calendar, q.contract.ref_start, q.contract.ref_end)) {
            Term t;
            t.weight = day.weight;
            if (day.fixing_date < valuation) {
                t.observed = true;
                t.fixed = problem.fixings.at(day.fixing_date);
            } else {
                t.level = static_cast<int>(interval_of(problem.breakpoints, day.fixing_date));
                out.identified[static_cast<std::size_t>(t.level)] = true;
            }
            pq.terms.push_back(t);
        }
        priced.push_back(std::move(pq));
    }

    // Unknown layout: free identified levels, then the spread when fitted.
    std::vector<std::size_t> free_levels;
    for (std::size_t k = 0; k < n_levels; ++k) {
        if (out.identified[k] && !(k == 0 && problem.target_rate)) free_levels.push_back(k);
    }
    const std::size_t dim = free_levels.size() + (out.spread_fitted ? 1 : 0);
    const double spread_seed = out.spread_fitted ? 0.0 : problem.fixed_spread;

    auto unpack = [&](std::span<const double> x, std::vector<double>& levels, double& spread) {
        levels = out.levels;
        for (std::size_t i = 0; i < free_levels.size(); ++i) levels[free_levels[i]] = x[i];
        spread = out.spread_fitted ? x[free_levels.size()] : problem.fixed_spread;
    };

    std::vector<double> x0;
    for (std::size_t k : free_levels) {
        const Date start = k == 0 ? valuation : std::max(valuation, problem.breakpoints[k - 1]);
        const FuturesQuote* best = &quotes.front();
        long best_gap = -1;
        for (const auto& q : quotes) {
            long gap = 0;
            if (start < q.contract.ref_start) gap = (q.contract.ref_start - start).count();
            if (start > q.contract.ref_end) gap = (start - q.contract.ref_end).count();
            if (best_gap < 0 || gap < best_gap) {
                best_gap = gap;
                best = &q;
            }
        }
        x0.push_back(std::clamp((100.0 - best->price) / 100.0 - spread_seed, config.bounds.level_lo, config.bounds.level_hi));
    }
    if (out.spread_fitted) x0.push_back(std::clamp(0.0, config.bounds.spread_lo, config.bounds.spread_hi));

    auto model_prices = [&](std::span<const double> x, std::span<double> prices) {
        std::vector<double> levels;
        double spread = 0.0;
        unpack(x, levels, spread);
        for (std::size_t m = 0; m < priced.size(); ++m) prices[m] = price_terms(priced[m], levels, {}, spread);
    };

    std::vector<double> solution = x0;
    if (dim > 0) {
        BandedProblem bp;
        bp.dimension = dim;
        bp.residual_count = priced.size();
        bp.evaluate = [&](std::span<const double> x, std::span<double> r) {
            model_prices(x, r);
            for (std::size_t m = 0; m < priced.size(); ++m) r[m] -= priced[m].quote.price;
        };
        for (const auto& pq : priced) bp.tolerance.push_back(pq.tolerance);
        bp.lower.assign(free_levels.size(), config.bounds.level_lo);
        bp.upper.assign(free_levels.size(), config.bounds.level_hi);
        if (out.spread_fitted) {
            bp.lower.push_back(config.bounds.spread_lo);
            bp.upper.push_back(config.bounds.spread_hi);
        }
        auto res = minimize_banded(bp, x0, config.optimizer);
        solution = res.x;
        out.iterations = res.iterations;
        out.evaluations = res.evaluations;
    }

    unpack(solution, out.levels, out.spread);
    fill_unidentified(out.levels, out.identified, problem.target_rate.value_or(0.0));

    std::vector<double> prices(priced.size());
    model_prices(solution, prices);
    for (std::size_t m = 0; m < priced.size(); ++m) {
        ContractFit fit{priced[m].quote, prices[m], priced[m].tolerance,
                        calibration_error(prices[m], priced[m].quote.price, priced[m].tolerance)};
        out.objective += fit.error * fit.error;
        const double d = prices[m] - priced[m].quote.price;
        out.squared_error += d * d;
        out.fits.push_back(std::move(fit));
    }
    out.converged = out.objective <= config.convergence_threshold;
    return out;
}

JumpSchedule SofrCalibration::schedule(const DateGrid& grid) const {
    return JumpSchedule::spikes(grid, spike_dates, spike_widths);
}

SofrCalibration calibrate_sofr(const DateGrid& grid, const SofrProblem& problem, const FfCalibration& target,
                               const CalibrationConfig& config) {
    const Date valuation = problem.valuation;
    const auto& calendar = grid.calendar();
    if (target.valuation != valuation) throw ConsistencyError("Fed Funds calibration has a different valuation date");

    SofrCalibration out;
    out.valuation = valuation;
    out.seed = config.optimizer.seed;
    for (std::size_t i = 0; i < problem.spike_dates.size(); ++i) {
        const Date z = problem.spike_dates[i];
        if (z <= valuation) continue;
        const int w = problem.spike_widths.empty() ? days_to_next_business_day(calendar, z) : problem.spike_widths.at(i);
        out.spike_dates.push_back(z);
        out.spike_widths.push_back(w);
    }
    if (!problem.spike_widths.empty() && problem.spike_widths.size() != problem.spike_dates.size()) {
        throw InputError("one spike width per spike date required");
    }
    if (!out.spike_dates.empty()) (void)out.schedule(grid);  // validates ordering and disjointness

    std::vector<FuturesQuote> quotes;
    for (const auto& q : problem.quotes) {
        if (q.contract.kind == ContractKind::ff30d) continue;
        check_quote(q, valuation, calendar);
        quotes.push_back(q);
    }
    if (quotes.empty()) throw InputError("no SOFR quotes to calibrate");

    const std::size_t n_spikes = out.spike_dates.size();
    out.spike_levels.assign(n_spikes, 0.0);
    out.identified.assign(n_spikes, false);
    auto spike_of = [&](Date d) -> int {
        for (std::size_t i = 0; i < n_spikes; ++i) {
            if (d >= out.spike_dates[i] && d < out.spike_dates[i] + std::chrono::days{out.spike_widths[i]}) {
                return static_cast<int>(i);
            }
        }
        return -1;
    };

    std::vector<PricedQuote> priced;
    for (const auto& q : quotes) {
        PricedQuote pq{q, quote_tolerance(q.contract, valuation, config), {}};
        for (const auto& day : reference_days(calendar, q.contract.ref_start, q.contract.ref_end)) {
            Term t;
            t.weight = day.weight;
            if (day.fixing_date < valuation) {
                t.observed = true;
                t.fixed = problem.fixings.at(day.fixing_date);
            } else {
                t.fixed = target.levels[interval_of(target.breakpoints, day.fixing_date)];
                t.spike = spike_of(day.fixing_date);
                if (t.spike >= 0) out.identified[static_cast<std::size_t>(t.spike)] = true;
            }
            pq.terms.push_back(t);
        }
        priced.push_back(std::move(pq));
    }

    std::vector<std::size_t> free_spikes;
    for (std::size_t i = 0; i < n_spikes; ++i) {
        if (out.identified[i]) free_spikes.push_back(i);
    }
    auto unpack = [&](std::span<const double> x, std::vector<double>& spikes, double& spread) {
        spikes.assign(n_spikes, 0.0);
        for (std::size_t i = 0; i < free_spikes.size(); ++i) spikes[free_spikes[i]] = x[i];
        spread = x[free_spikes.size()];
    };
    auto model_prices = [&](std::span<const double> x, std::span<double> prices) {
        std::vector<double> spikes;
        double spread = 0.0;
        unpack(x, spikes, spread);
        for (std::size_t m = 0; m < priced.size(); ++m) prices[m] = price_terms(priced[m], {}, spikes, spread);
    };

    std::vector<double> x0(free_spikes.size(), std::clamp(0.0, config.bounds.spike_lo, config.bounds.spike_hi));
    x0.push_back(std::clamp(0.0, config.bounds.spread_lo, config.bounds.spread_hi));

    BandedProblem bp;
    bp.dimension = x0.size();
    bp.residual_count = priced.size();
    bp.evaluate = [&](std::span<const double> x, std::span<double> r) {
        model_prices(x, r);
        for (std::size_t m = 0; m < priced.size(); ++m) r[m] -= priced[m].quote.price;
    };
    for (const auto& pq : priced) bp.tolerance.push_back(pq.tolerance);
    bp.lower.assign(free_spikes.size(), config.bounds.spike_lo);
    bp.upper.assign(free_spikes.size(), config.bounds.spike_hi);
    bp.lower.push_back(config.bounds.spread_lo);
    bp.upper.push_back(config.bounds.spread_hi);
    auto res = minimize_banded(bp, x0, config.optimizer);
    out.iterations = res.iterations;
    out.evaluations = res.evaluations;

    unpack(res.x, out.spike_levels, out.spread);
    std::vector<double> prices(priced.size());
    model_prices(res.x, prices);
    for (std::size_t m = 0; m < priced.size(); ++m) {
        ContractFit fit{priced[m].quote, prices[m], priced[m].tolerance,
                        calibration_error(prices[m], priced[m].quote.price, priced[m].tolerance)};
        out.objective += fit.error * fit.error;
        const double d = prices[m] - priced[m].quote.price;
        out.squared_error += d * d;
        out.fits.push_back(std::move(fit));
    }
    out.converged = out.objective <= config.convergence_threshold;
    return out;
}

std::vector<Date> month_end_dates(const BusinessCalendar& calendar, Date valuation, Date until) {
    std::vector<Date> out;
    for (Date m = first_of_month(valuation); m <= until; m = add_months(m, 1)) {
        const Date eom = calendar.last_business_day_of_month(m);
        if (eom > valuation && eom <= until) out.push_back(eom);
    }
    return out;
}

std::vector<Date> month_start_dates(Date valuation, Date until) {
    std::vector<Date> out;
    for (Date m = add_months(first_of_month(valuation), 1); m <= until; m = add_months(m, 1)) out.push_back(m);
    return out;
}

StepModel make_step_model(const DateGrid& grid, const FfCalibration& ff, std::span<const double> xi,
                          const Eigen::MatrixXd& rho) {
    const std::size_t n = ff.breakpoints.size();
    std::vector<double> vols(n, 0.0);
    if (!xi.empty()) {
        if (xi.size() != n) throw ConsistencyError("need one step volatility per FOMC date");
        vols.assign(xi.begin(), xi.end());
    }
    Eigen::MatrixXd corr = rho.size() == 0 ? Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) : rho;
    return StepModel(JumpSchedule::steps(grid, ff.breakpoints), std::move(vols), std::move(corr), ff.curve(grid));
}

SpikeModel make_spike_model(const DateGrid& grid, const SofrCalibration& sofr, std::span<const double> sigma) {
    const std::size_t n = sofr.spike_dates.size();
    std::vector<double> vols(n, 0.0);
    if (!sigma.empty()) {
        if (sigma.size() != n) throw ConsistencyError("need one spike volatility per spike date");
        vols.assign(sigma.begin(), sigma.end());
    }
    auto schedule = sofr.schedule(grid);
    auto f0 = SpikeModel::window_curve(schedule, sofr.spike_levels);
    return SpikeModel(std::move(schedule), std::move(vols), std::move(f0));
}

CompositeModel make_effr_model(const DateGrid& grid, const FfCalibration& ff, std::span<const double> xi,
                               const Eigen::MatrixXd& rho) {
    return CompositeModel(grid, make_step_model(grid, ff, xi, rho), std::nullopt,
                          ResidualModel::constant_spread(ff.spread));
}

CompositeModel make_sofr_model(const DateGrid& grid, const FfCalibration& ff, const SofrCalibration& sofr,
                               std::span<const double> xi, const Eigen::MatrixXd& rho, std::span<const double> sigma) {
    std::optional<SpikeModel> spike;
    if (!sofr.spike_dates.empty()) spike = make_spike_model(grid, sofr, sigma);
    return CompositeModel(grid, make_step_model(grid, ff, xi, rho), std::move(spike),
                          ResidualModel::constant_spread(sofr.spread));
}

}  // namespace stepspike
