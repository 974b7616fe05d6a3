#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stepspike/calendar.hpp"
#include "stepspike/composite_model.hpp"
#include "stepspike/curve.hpp"
#include "stepspike/futures.hpp"
#include "stepspike/optimizer.hpp"

namespace stepspike {

struct CalibrationBounds {
    double level_lo = -0.01;
    double level_hi = 0.10;
    double spike_lo = -0.02;
    double spike_hi = 0.05;
    double spread_lo = -0.01;
    double spread_hi = 0.01;
};

struct CalibrationConfig {
    CalibrationBounds bounds;
    OptimizerOptions optimizer;
    double tolerance_front = kFrontTolerance;
    double tolerance_back = kBackTolerance;
    std::size_t max_ff_contracts = 12;
    double convergence_threshold = 1e-8;
};

/// e_m = (|F_model - F_market| - h)^+.
double calibration_error(double model_price, double market_price, double tolerance);

/// Fed Funds stage: piecewise-flat target levels between breakpoints plus a
/// constant EFFR spread.
///
/// With `target_rate` set, the level before the first breakpoint is fixed to
/// it and the spread is fitted; otherwise the spread is held at `fixed_spread`
/// and every level is fitted.
struct FfProblem {
    Date valuation{};
    std::vector<Date> breakpoints;  // FOMC effective dates after valuation
    std::vector<FuturesQuote> quotes;
    FixingSeries fixings;
    std::optional<double> target_rate;
    double fixed_spread = 0.0;
};

struct ContractFit {
    FuturesQuote quote;
    double model_price = 0.0;
    double tolerance = 0.0;
    double error = 0.0;  // e_m
};

struct FfCalibration {
    Date valuation{};
    std::vector<Date> breakpoints;
    std::vector<double> levels;       // breakpoints.size() + 1 levels
    std::vector<bool> identified;     // false: no contract fixes that interval
    double spread = 0.0;
    bool spread_fitted = false;
    std::vector<ContractFit> fits;
    double objective = 0.0;           // sum of e_m^2
    double squared_error = 0.0;       // sum of (F_model - F_market)^2
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
    std::uint64_t seed = 0;

    PiecewiseFlatCurve curve(const DateGrid& grid) const;
};

FfCalibration calibrate_ff(const DateGrid& grid, const FfProblem& problem, const CalibrationConfig& config = {});

/// SOFR stage: spike forward levels on known dates plus a SOFR spread, with the
/// target curve held at a Fed Funds calibration.
struct SofrProblem {
    Date valuation{};
    std::vector<Date> spike_dates;
    std::vector<int> spike_widths;  // calendar days; empty selects days to next business day
    std::vector<FuturesQuote> quotes;
    FixingSeries fixings;
};

struct SofrCalibration {
    Date valuation{};
    std::vector<Date> spike_dates;
    std::vector<int> spike_widths;
    std::vector<double> spike_levels;
    std::vector<bool> identified;
    double spread = 0.0;
    std::vector<ContractFit> fits;
    double objective = 0.0;
    double squared_error = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
    std::uint64_t seed = 0;

    JumpSchedule schedule(const DateGrid& grid) const;
};

SofrCalibration calibrate_sofr(const DateGrid& grid, const SofrProblem& problem, const FfCalibration& target,
                               const CalibrationConfig& config = {});

/// Last business day of every month from the valuation month to `until`,
/// keeping only dates after `valuation`.
std::vector<Date> month_end_dates(const BusinessCalendar& calendar, Date valuation, Date until);

/// First day of each month after `valuation` up to `until`: breakpoints of the
/// naive monthly curve.
std::vector<Date> month_start_dates(Date valuation, Date until);

/// Step schedule and initial curve of a Fed Funds calibration, with optional
/// step volatilities (zero when empty) and correlation (identity when empty).
StepModel make_step_model(const DateGrid& grid, const FfCalibration& ff, std::span<const double> xi = {},
                          const Eigen::MatrixXd& rho = {});
SpikeModel make_spike_model(const DateGrid& grid, const SofrCalibration& sofr, std::span<const double> sigma = {});

/// EFFR model: target curve plus the EFFR spread.
CompositeModel make_effr_model(const DateGrid& grid, const FfCalibration& ff, std::span<const double> xi = {},
                               const Eigen::MatrixXd& rho = {});
/// SOFR model: target curve, spikes and the SOFR spread.
CompositeModel make_sofr_model(const DateGrid& grid, const FfCalibration& ff, const SofrCalibration& sofr,
                               std::span<const double> xi = {}, const Eigen::MatrixXd& rho = {},
                               std::span<const double> sigma = {});

}  // namespace stepspike
