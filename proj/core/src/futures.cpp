#include "stepspike/futures.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "stepspike/error.hpp"

namespace stepspike {

namespace {

constexpr double kTimeEps = 1e-12;

std::string upper(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

ContractKind parse_contract_kind(std::string_view text) {
    const std::string u = upper(text);
    if (u == "FF30D") return ContractKind::ff30d;
    if (u == "SOFR1M") return ContractKind::sofr1m;
    if (u == "SOFR3M") return ContractKind::sofr3m;
    throw InputError("unknown contract kind '" + std::string(text) + "'");
}

std::string to_string(ContractKind kind) {
    switch (kind) {
        case ContractKind::ff30d: return "FF30D";
        case ContractKind::sofr1m: return "SOFR1M";
        case ContractKind::sofr3m: return "SOFR3M";
    }
    return "?";
}

int FuturesContract::days() const { return static_cast<int>((ref_end - ref_start).count()) + 1; }

void validate_contract(const FuturesContract& c) {
    if (c.ref_end < c.ref_start) throw InputError("contract " + c.code + ": reference period ends before it starts");
    if (c.kind == ContractKind::sofr3m) {
        if (!is_imm_date(c.ref_start)) {
            throw InputError("contract " + c.code + ": SOFR3M reference period must start on an IMM date");
        }
        const auto ymd = std::chrono::year_month_day{add_months(first_of_month(c.ref_start), 3)};
        const Date next_imm = third_wednesday(int(ymd.year()), unsigned(ymd.month()));
        if (c.ref_end + std::chrono::days{1} != next_imm) {
            throw InputError("contract " + c.code + ": SOFR3M reference period must end the day before the next IMM date");
        }
    } else if (c.ref_start != first_of_month(c.ref_start) || c.ref_end != last_of_month(c.ref_start)) {
        throw InputError("contract " + c.code + ": monthly reference period must be a whole calendar month");
    }
}

double default_tolerance(const FuturesContract& c, Date observe_date) {
    return (observe_date >= c.ref_start && observe_date <= c.ref_end) ? kFrontTolerance : kBackTolerance;
}

std::optional<double> FixingSeries::find(Date d) const {
    auto it = values_.find(d);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

double FixingSeries::at(Date d) const {
    auto it = values_.find(d);
    if (it == values_.end()) throw InputError("missing fixing for " + format_date(d));
    return it->second;
}

std::vector<ReferenceDay> reference_days(const BusinessCalendar& calendar, Date start, Date end) {
    if (end < start) throw std::invalid_argument("reference period ends before it starts");
    std::vector<ReferenceDay> out;
    for (Date d = start; d <= end; d += std::chrono::days{1}) {
        const Date fix = calendar.adjust_preceding(d);
        if (!out.empty() && out.back().fixing_date == fix) {
            ++out.back().weight;
        } else {
            out.push_back({fix, 1});
        }
    }
    return out;
}

Date settlement_date(const BusinessCalendar& calendar, const FuturesContract& contract) {
    return calendar.next_business_day(calendar.adjust_preceding(contract.ref_end));
}

double terminal_price(ContractKind kind, std::span<const ReferenceDay> days, std::span<const double> rates,
                      int total_days) {
    if (days.size() != rates.size()) throw std::invalid_argument("one rate per reference day required");
    if (total_days <= 0) throw std::invalid_argument("reference period must contain at least one day");
    const double n = static_cast<double>(total_days);
    if (kind == ContractKind::sofr3m) {
        double growth = 1.0;
        for (std::size_t i = 0; i < days.size(); ++i) growth *= 1.0 + days[i].weight * rates[i] / 360.0;
        return 100.0 * (1.0 - (360.0 / n) * (growth - 1.0));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < days.size(); ++i) sum += days[i].weight * rates[i];
    return 100.0 * (1.0 - sum / n);
}

double price_from_rates(const FuturesContract& contract, const BusinessCalendar& calendar, Date valuation,
                        const FixingSeries& observed, const RateFunction& expected) {
    if (valuation > settlement_date(calendar, contract)) {
        throw std::invalid_argument("contract " + contract.code + " has settled before " + format_date(valuation));
    }
    const auto days = reference_days(calendar, contract.ref_start, contract.ref_end);
    std::vector<double> rates(days.size());
    for (std::size_t i = 0; i < days.size(); ++i) {
        const Date fix = days[i].fixing_date;
        rates[i] = fix < valuation ? observed.at(fix) : expected(fix);
    }
    return terminal_price(contract.kind, days, rates, contract.days());
}

double price_futures(const CompositeModel& model, const CompositeState& state, Date valuation,
                     const FuturesContract& contract, const FixingSeries& observed) {
    const double t = model.grid().time(valuation);
    if (std::abs(state.t - t) > kTimeEps) throw std::invalid_argument("state is not at the valuation date");
    return price_from_rates(contract, model.grid().calendar(), valuation, observed, [&](Date fix) {
        return model.expected_short_rate(state, t, model.grid().time(fix));
    });
}

static void require_kind(const FuturesContract& c, ContractKind kind) {
    if (c.kind != kind) throw std::invalid_argument("contract " + c.code + " is not " + to_string(kind));
}

double price_ff30d(const CompositeModel& model, const CompositeState& state, Date valuation,
                   const FuturesContract& contract, const FixingSeries& observed) {
    require_kind(contract, ContractKind::ff30d);
    return price_futures(model, state, valuation, contract, observed);
}

double price_sofr1m(const CompositeModel& model, const CompositeState& state, Date valuation,
                    const FuturesContract& contract, const FixingSeries& observed) {
    require_kind(contract, ContractKind::sofr1m);
    return price_futures(model, state, valuation, contract, observed);
}

double price_sofr3m(const CompositeModel& model, const CompositeState& state, Date valuation,
                    const FuturesContract& contract, const FixingSeries& observed) {
    require_kind(contract, ContractKind::sofr3m);
    return price_futures(model, state, valuation, contract, observed);
}

McEstimate mc_price_futures(const CompositeModel& model, const FuturesContract& contract,
                            const FixingSeries& observed, std::size_t n_paths, SimulationOptions options) {
    if (n_paths == 0) throw std::invalid_argument("at least one path required");
    if (options.antithetic && n_paths % 2 != 0) throw std::invalid_argument("antithetic sampling needs an even path count");
    const Date valuation = model.grid().anchor();
    const auto& calendar = model.grid().calendar();
    if (valuation > settlement_date(calendar, contract)) {
        throw std::invalid_argument("contract " + contract.code + " has settled before " + format_date(valuation));
    }
    const auto days = reference_days(calendar, contract.ref_start, contract.ref_end);

    std::vector<double> fixed(days.size(), 0.0);
    std::vector<double> future_times;
    for (std::size_t i = 0; i < days.size(); ++i) {
        if (days[i].fixing_date < valuation) {
            fixed[i] = observed.at(days[i].fixing_date);
        } else {
            future_times.push_back(model.grid().time(days[i].fixing_date));
        }
    }
    const auto times = simulation_times(model, future_times);
    std::vector<std::ptrdiff_t> index(days.size(), -1);
    for (std::size_t i = 0; i < days.size(); ++i) {
        if (days[i].fixing_date < valuation) continue;
        const double t = model.grid().time(days[i].fixing_date);
        auto it = std::lower_bound(times.begin(), times.end(), t - kTimeEps);
        index[i] = it - times.begin();
    }
    std::vector<char> wanted(times.size(), 0);
    for (auto k : index) {
        if (k >= 0) wanted[static_cast<std::size_t>(k)] = 1;
    }

    PathSimulator sim(model, times, options);
    const int total = contract.days();
    auto payoffs = map_paths(n_paths, options.threads, [&](std::size_t p) {
        std::vector<double> r_at(times.size(), 0.0);
        sim.run(p, [&](std::size_t k, const CompositeState&, double r, double) {
            if (wanted[k]) r_at[k] = r;
        });
        std::vector<double> rates(fixed);
        for (std::size_t i = 0; i < days.size(); ++i) {
            if (index[i] >= 0) rates[i] = r_at[static_cast<std::size_t>(index[i])];
        }
        return terminal_price(contract.kind, days, rates, total);
    });
    if (options.antithetic) {
        std::vector<double> pairs(n_paths / 2);
        for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i] = 0.5 * (payoffs[2 * i] + payoffs[2 * i + 1]);
        return mc_estimate(pairs);
    }
    return mc_estimate(payoffs);
}

double compounded_term_rate(const BusinessCalendar& calendar, Date start, Date end, const RateFunction& rate) {
    const auto days = reference_days(calendar, start, end);
    const double n = static_cast<double>((end - start).count() + 1);
    double growth = 1.0;
    for (const auto& d : days) growth *= 1.0 + d.weight * rate(d.fixing_date) / 360.0;
    return (360.0 / n) * (growth - 1.0);
}

double compounded_term_rate(const BusinessCalendar& calendar, Date start, Date end, const FixingSeries& forwards) {
    return compounded_term_rate(calendar, start, end, [&](Date d) { return forwards.at(d); });
}

}  // namespace stepspike
