#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stepspike/calendar.hpp"
#include "stepspike/composite_model.hpp"
#include "stepspike/parallel.hpp"
#include "stepspike/simulation.hpp"

namespace stepspike {

enum class ContractKind { ff30d, sofr1m, sofr3m };

/// Parses FF30D, SOFR1M or SOFR3M (case-insensitive). Throws InputError.
ContractKind parse_contract_kind(std::string_view text);
std::string to_string(ContractKind kind);

inline constexpr double kFrontTolerance = 0.0025;
inline constexpr double kBackTolerance = 0.005;

struct FuturesContract {
    ContractKind kind = ContractKind::ff30d;
    Date ref_start{};
    Date ref_end{};  // inclusive
    std::string code;
    double tolerance = kBackTolerance;

    /// Calendar days in the reference period.
    int days() const;
};

/// Validates the reference period for the contract kind: whole calendar month
/// for monthly contracts, IMM date to the day before the next IMM date for
/// SOFR3M. Throws InputError.
void validate_contract(const FuturesContract& contract);

/// Half a tick: the tighter band applies when the reference period contains
/// the observation date.
double default_tolerance(const FuturesContract& contract, Date observe_date);

struct FuturesQuote {
    FuturesContract contract;
    Date observe_date{};
    double price = 0.0;
};

/// Published daily fixings keyed by fixing date.
class FixingSeries {
public:
    FixingSeries() = default;
    explicit FixingSeries(std::map<Date, double> values) : values_(std::move(values)) {}

    void set(Date d, double rate) { values_[d] = rate; }
    std::optional<double> find(Date d) const;
    /// Throws InputError when the fixing is missing.
    double at(Date d) const;
    bool empty() const { return values_.empty(); }
    const std::map<Date, double>& values() const { return values_; }

private:
    std::map<Date, double> values_;
};

/// One business-day fixing and the number of calendar days it covers.
struct ReferenceDay {
    Date fixing_date;
    int weight;
};

/// Every calendar day of [start, end] attributed to the latest business day on
/// or before it, grouped into weighted fixings.
std::vector<ReferenceDay> reference_days(const BusinessCalendar& calendar, Date start, Date end);

/// First business day after the last fixing of the reference period.
Date settlement_date(const BusinessCalendar& calendar, const FuturesContract& contract);

/// Rate assumed for a fixing date that has not been published yet.
using RateFunction = std::function<double(Date fixing_date)>;

/// Futures price from past fixings (dates before `valuation`) and expected
/// rates for the rest. Throws InputError for a missing past fixing and
/// std::invalid_argument when `valuation` is after settlement.
double price_from_rates(const FuturesContract& contract, const BusinessCalendar& calendar, Date valuation,
                        const FixingSeries& observed, const RateFunction& expected);

/// Terminal index from realized rates, one per reference day.
double terminal_price(ContractKind kind, std::span<const ReferenceDay> days, std::span<const double> rates,
                      int total_days);

/// Prices off the composite model with `state` at the model time of `valuation`.
double price_futures(const CompositeModel& model, const CompositeState& state, Date valuation,
                     const FuturesContract& contract, const FixingSeries& observed);
double price_ff30d(const CompositeModel& model, const CompositeState& state, Date valuation,
                   const FuturesContract& contract, const FixingSeries& observed);
double price_sofr1m(const CompositeModel& model, const CompositeState& state, Date valuation,
                    const FuturesContract& contract, const FixingSeries& observed);
/// Uses the product of expected daily factors; see `mc_price_futures` for the
/// expectation of the product.
double price_sofr3m(const CompositeModel& model, const CompositeState& state, Date valuation,
                    const FuturesContract& contract, const FixingSeries& observed);

/// Monte Carlo average of the terminal index, valued at the model anchor.
/// With antithetic sampling the standard error is computed over pair means.
McEstimate mc_price_futures(const CompositeModel& model, const FuturesContract& contract,
                            const FixingSeries& observed, std::size_t n_paths, SimulationOptions options = {});

/// (360/n)[prod(1 + d_i f_i / 360) - 1] over the reference days of [start, end].
double compounded_term_rate(const BusinessCalendar& calendar, Date start, Date end, const RateFunction& rate);
double compounded_term_rate(const BusinessCalendar& calendar, Date start, Date end, const FixingSeries& forwards);

}  // namespace stepspike
