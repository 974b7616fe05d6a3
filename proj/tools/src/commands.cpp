#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>

#include "stepspike/calibration.hpp"
#include "stepspike/cli/cli.hpp"
#include "stepspike/cli/snapshot.hpp"
#include "stepspike/diagnostics.hpp"
#include "stepspike/error.hpp"
#include "stepspike/futures.hpp"
#include "stepspike/io.hpp"
#include "stepspike/parallel.hpp"
#include "stepspike/simulation.hpp"

namespace stepspike::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Comma-separated rows; numbers through format_number.
class Csv {
public:
    explicit Csv(std::initializer_list<std::string> header) { row(header); }
    explicit Csv(const std::vector<std::string>& header) { row(header); }

    void row(std::initializer_list<std::string> fields) {
        bool first = true;
        for (const auto& f : fields) {
            if (!first) text_ += ',';
            text_ += f;
            first = false;
        }
        text_ += '\n';
    }
    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) text_ += ',';
            text_ += fields[i];
        }
        text_ += '\n';
    }
    void write(const fs::path& path) const { write_text_file(path, text_); }

private:
    std::string text_;
};

std::string num(double v) { return format_number(v); }

std::string text(const json& cfg, const char* key) {
    const json& v = cfg.at(key);
    if (v.is_null()) return {};
    if (!v.is_string()) throw InputError(std::string("configuration key '") + key + "' must be a string");
    return v.get<std::string>();
}

std::string required_path(const json& cfg, const char* key) {
    std::string p = text(cfg, key);
    if (p.empty()) throw InputError(std::string("missing required input '") + key + "'");
    return p;
}

double number(const json& cfg, const char* key) {
    const json& v = cfg.at(key);
    if (!v.is_number()) throw InputError(std::string("configuration key '") + key + "' must be a number");
    return v.get<double>();
}

long long integer(const json& cfg, const char* key) {
    const json& v = cfg.at(key);
    if (!v.is_number_integer()) throw InputError(std::string("configuration key '") + key + "' must be an integer");
    return v.get<long long>();
}

long long positive(const json& cfg, const char* key) {
    const long long v = integer(cfg, key);
    if (v <= 0) throw InputError(std::string("configuration key '") + key + "' must be positive");
    return v;
}

unsigned threads_of(const json& cfg) {
    const long long t = integer(cfg, "threads");
    if (t < 0) throw InputError("threads must be >= 0");
    return static_cast<unsigned>(t);
}

std::uint64_t seed_of(const json& cfg) {
    const json& v = cfg.at("seed");
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        if (!v.is_number_unsigned()) throw InputError("seed must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

/// Scalar broadcast to n entries, or an array of exactly n.
std::vector<double> vector_param(const json& cfg, const char* key, std::size_t n) {
    const json& v = cfg.at(key);
    if (v.is_number()) return std::vector<double>(n, v.get<double>());
    if (v.is_array()) {
        std::vector<double> out;
        for (const auto& e : v) out.push_back(e.get<double>());
        if (out.size() != n) {
            throw ConsistencyError(std::string("'") + key + "' needs " + std::to_string(n) + " entries");
        }
        return out;
    }
    throw InputError(std::string("'") + key + "' must be a number or an array");
}

Eigen::MatrixXd correlation_param(const json& cfg, std::size_t n) {
    const json& v = cfg.at("rho");
    const auto en = static_cast<Eigen::Index>(n);
    if (v.is_number()) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Constant(en, en, v.get<double>());
        m.diagonal().setOnes();
        return m;
    }
    if (v.is_array()) {
        if (v.size() != n) throw ConsistencyError("'rho' needs " + std::to_string(n) + " rows");
        Eigen::MatrixXd m(en, en);
        for (std::size_t i = 0; i < n; ++i) {
            if (v[i].size() != n) throw ConsistencyError("'rho' must be square");
            for (std::size_t j = 0; j < n; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[i][j].get<double>();
        }
        return m;
    }
    throw InputError("'rho' must be a number or a matrix");
}

void echo_config(const json& cfg, const fs::path& out) { write_json(out / "config.json", cfg); }

std::vector<std::string> quote_fields(const FuturesQuote& q) {
    return {format_date(q.observe_date), to_string(q.contract.kind), q.contract.code,
            format_date(q.contract.ref_start), format_date(q.contract.ref_end), num(q.price)};
}

// ---------------------------------------------------------------- decompose

void write_hurst(const HurstFit& fit, const fs::path& out) {
    Csv csv({"lag", "variance", "fitted_variance"});
    for (std::size_t i = 0; i < fit.lags.size(); ++i) {
        csv.row({std::to_string(fit.lags[i]), num(fit.variances[i]), num(std::exp(fit.fitted_log_variance(fit.lags[i])))});
    }
    csv.write(out / "hurst.csv");
}

json hurst_summary(const HurstFit& fit, const std::string& series) {
    return {{"series", series}, {"h", round12(fit.h)}, {"slope", round12(fit.slope)},
            {"intercept", round12(fit.intercept)}, {"lag_min", fit.lags.front()}, {"lag_max", fit.lags.back()}};
}

int cmd_decompose(const json& cfg, const fs::path& out, std::ostream& log) {
    const auto series = read_fixings(required_path(cfg, "series"));
    const auto target = read_fixings(required_path(cfg, "target"));
    if (series.empty()) throw InputError("series file has no observations");
    std::set<Date> eom;
    if (const auto p = text(cfg, "eom_dates"); !p.empty()) {
        for (Date d : read_date_list(p)) eom.insert(d);
    } else {
        eom = month_end_observations(series);
    }
    DecomposeOptions opts;
    const std::string mode = text(cfg, "mode");
    if (mode == "sofr") {
        opts.spike_threshold = number(cfg, "spike_threshold");
    } else if (mode != "effr") {
        throw InputError("mode must be effr or sofr");
    }
    const auto d = decompose(series, target, eom, opts);

    Csv dec({"date", "series", "target", "eom_spike", "non_eom_spike", "residual"});
    for (std::size_t i = 0; i < d.dates.size(); ++i) {
        dec.row({format_date(d.dates[i]), num(d.series[i]), num(d.target[i]), num(d.eom_spike[i]),
                 num(d.non_eom_spike[i]), num(d.residual[i])});
    }
    dec.write(out / "decomposition.csv");

    std::vector<double> var;
    for (std::size_t k = 0; k < 4; ++k) var.push_back(variance_of_changes(d.component(k)));
    const double total_var = variance_of_changes(d.series);
    Csv vc({"component", "variance", "share_of_series_variance"});
    for (std::size_t k = 0; k < 4; ++k) {
        const double share = total_var > 0.0 ? var[k] / total_var : std::nan("");
        vc.row({Decomposition::component_names[k], num(var[k]), num(share)});
    }
    vc.write(out / "variance_contribution.csv");

    Csv corr({"component_a", "component_b", "correlation"});
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = a + 1; b < 4; ++b) {
            corr.row({Decomposition::component_names[a], Decomposition::component_names[b],
                      num(correlation_of_changes(d.component(a), d.component(b)))});
        }
    }
    corr.write(out / "correlations.csv");

    const auto lags = lag_range(static_cast<int>(positive(cfg, "hurst_lag_min")), static_cast<int>(positive(cfg, "hurst_lag_max")));
    json summary = {{"series", "residual"}, {"h", nullptr}};
    try {
        const auto fit = hurst_fit(d.residual, lags);
        write_hurst(fit, out);
        summary = hurst_summary(fit, "residual");
    } catch (const std::exception& e) {
        Csv({"lag", "variance", "fitted_variance"}).write(out / "hurst.csv");
        summary["note"] = e.what();
        log << "warning: residual Hurst exponent not estimated: " << e.what() << "\n";
    }
    write_json(out / "hurst.json", summary);
    echo_config(cfg, out);
    return exit_ok;
}

int cmd_hurst(const json& cfg, const fs::path& out, std::ostream&) {
    const auto rows = read_date_values(required_path(cfg, "input"));
    std::vector<double> values;
    for (const auto& [d, v] : rows) values.push_back(v);
    const auto lags = lag_range(static_cast<int>(positive(cfg, "lag_min")), static_cast<int>(positive(cfg, "lag_max")));
    HurstFit fit;
    try {
        fit = hurst_fit(values, lags);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    write_hurst(fit, out);
    write_json(out / "hurst.json", hurst_summary(fit, "input"));
    echo_config(cfg, out);
    return exit_ok;
}

// ---------------------------------------------------------------- calibrate

CalibrationConfig calibration_config(const json& cfg) {
    CalibrationConfig c;
    const json& b = cfg.at("bounds");
    c.bounds.level_lo = b.at("level_lo").get<double>();
    c.bounds.level_hi = b.at("level_hi").get<double>();
    c.bounds.spike_lo = b.at("spike_lo").get<double>();
    c.bounds.spike_hi = b.at("spike_hi").get<double>();
    c.bounds.spread_lo = b.at("spread_lo").get<double>();
    c.bounds.spread_hi = b.at("spread_hi").get<double>();
    c.optimizer.seed = seed_of(cfg);
    c.optimizer.threads = threads_of(cfg);
    const long long pop = integer(cfg, "population");
    if (pop < 0) throw InputError("population must be >= 0");
    c.optimizer.population = static_cast<std::size_t>(pop);
    c.optimizer.max_iters = static_cast<std::size_t>(positive(cfg, "max_iters"));
    c.tolerance_front = number(cfg, "tolerance_front");
    c.tolerance_back = number(cfg, "tolerance_back");
    c.convergence_threshold = number(cfg, "convergence_threshold");
    c.max_ff_contracts = static_cast<std::size_t>(positive(cfg, "max_ff_contracts"));
    return c;
}

FixingSeries optional_fixings(const json& cfg, const char* key) {
    const auto p = text(cfg, key);
    return p.empty() ? FixingSeries{} : read_fixings(p);
}

void write_fits(const std::vector<std::pair<std::string, const std::vector<ContractFit>*>>& stages, const fs::path& out) {
    Csv res({"stage", "contract_code", "contract_kind", "ref_start", "ref_end", "market_price", "model_price",
             "tolerance", "error"});
    Csv prices({"observe_date", "contract_kind", "contract_code", "ref_start", "ref_end", "price", "model_price", "error"});
    for (const auto& [stage, fits] : stages) {
        for (const auto& f : *fits) {
            const auto& c = f.quote.contract;
            res.row({stage, c.code, to_string(c.kind), format_date(c.ref_start), format_date(c.ref_end),
                     num(f.quote.price), num(f.model_price), num(f.tolerance), num(f.error)});
            auto row = quote_fields(f.quote);
            row.push_back(num(f.model_price));
            row.push_back(num(f.error));
            prices.row(row);
        }
    }
    res.write(out / "residuals.csv");
    prices.write(out / "prices.csv");
}

int cmd_calibrate(const json& cfg, const fs::path& out, std::ostream& log) {
    const std::string stage = text(cfg, "stage");
    if (stage != "ff" && stage != "sofr" && stage != "both") throw InputError("stage must be ff, sofr or both");
    const Date valuation = parse_date(required_path(cfg, "valuation_date"));
    const auto quotes = read_quotes(required_path(cfg, "quotes"));
    std::vector<FuturesQuote> todays;
    for (const auto& q : quotes) {
        if (q.observe_date == valuation) todays.push_back(q);
    }
    if (todays.empty()) throw ConsistencyError("no quotes observed on " + format_date(valuation));
    Date horizon = valuation;
    for (const auto& q : todays) horizon = std::max(horizon, q.contract.ref_end);

    const auto config = calibration_config(cfg);
    ModelSnapshot snap;
    snap.valuation = valuation;
    if (const auto p = text(cfg, "holidays"); !p.empty()) snap.holidays = read_date_list(p);
    const DateGrid grid = snap.grid();

    bool converged = true;
    if (stage == "ff" || stage == "both") {
        FfProblem problem;
        problem.valuation = valuation;
        const std::string mode = text(cfg, "breakpoints");
        if (mode == "fomc") {
            for (Date d : read_date_list(required_path(cfg, "fomc"))) {
                if (d > valuation && d <= horizon) problem.breakpoints.push_back(d);
            }
        } else if (mode == "monthly") {
            problem.breakpoints = month_start_dates(valuation, horizon);
        } else {
            throw InputError("breakpoints must be fomc or monthly");
        }
        problem.quotes = todays;
        problem.fixings = optional_fixings(cfg, "effr_fixings");
        if (!cfg.at("target_rate").is_null()) problem.target_rate = number(cfg, "target_rate");
        problem.fixed_spread = number(cfg, "fixed_spread");
        snap.ff = calibrate_ff(grid, problem, config);
        converged = converged && snap.ff.converged;
    } else {
        fs::path ff_path = text(cfg, "ff_curve");
        if (ff_path.empty()) ff_path = out / "curve.json";
        if (!fs::exists(ff_path)) throw MissingStageError("sofr stage needs an ff calibration (" + ff_path.string() + ")");
        const auto prior = read_snapshot(ff_path);
        if (prior.valuation != valuation) throw ConsistencyError("ff calibration was run for another valuation date");
        snap.ff = prior.ff;
        snap.holidays = prior.holidays;
    }

    const bool has_sofr = std::any_of(todays.begin(), todays.end(),
                                      [](const auto& q) { return q.contract.kind != ContractKind::ff30d; });
    if (stage == "sofr" || (stage == "both" && has_sofr)) {
        SofrProblem problem;
        problem.valuation = valuation;
        if (const auto p = text(cfg, "spike_dates"); !p.empty()) {
            problem.spike_dates = read_date_list(p);
        } else {
            problem.spike_dates = month_end_dates(grid.calendar(), valuation, horizon);
        }
        problem.quotes = todays;
        problem.fixings = optional_fixings(cfg, "sofr_fixings");
        snap.sofr = calibrate_sofr(snap.grid(), problem, snap.ff, config);
        converged = converged && snap.sofr->converged;
    } else if (stage == "both") {
        log << "note: no SOFR quotes on " << format_date(valuation) << "; sofr stage skipped\n";
    }

    write_json(out / "curve.json", to_json(snap));
    std::vector<std::pair<std::string, const std::vector<ContractFit>*>> stages;
    if (stage != "sofr") stages.emplace_back("ff", &snap.ff.fits);
    if (snap.sofr) stages.emplace_back("sofr", &snap.sofr->fits);
    write_fits(stages, out);
    echo_config(cfg, out);
    if (!converged) {
        log << "calibration did not converge (objective above threshold)\n";
        return exit_not_converged;
    }
    return exit_ok;
}

// ---------------------------------------------------------------- price

CompositeModel snapshot_model(const ModelSnapshot& snap, bool sofr, const json& cfg) {
    const DateGrid grid = snap.grid();
    const std::size_t n = snap.ff.breakpoints.size();
    const auto xi = vector_param(cfg, "xi", n);
    const auto rho = correlation_param(cfg, n);
    if (!sofr) return make_effr_model(grid, snap.ff, xi, rho);
    if (!snap.sofr) throw MissingStageError("curve has no sofr stage");
    const auto sigma = vector_param(cfg, "sigma_z", snap.sofr->spike_dates.size());
    return make_sofr_model(grid, snap.ff, *snap.sofr, xi, rho, sigma);
}

int cmd_price(const json& cfg, const fs::path& out, std::ostream&) {
    const auto snap = read_snapshot(required_path(cfg, "curve"));
    const auto quotes = read_quotes(required_path(cfg, "quotes"));
    const auto effr = optional_fixings(cfg, "effr_fixings");
    const auto sofr = optional_fixings(cfg, "sofr_fixings");
    const long long mc_paths = integer(cfg, "mc_paths");
    if (mc_paths < 0) throw InputError("mc_paths must be >= 0");

    std::optional<CompositeModel> effr_model, sofr_model;
    SimulationOptions sim;
    sim.seed = seed_of(cfg);
    sim.threads = threads_of(cfg);
    sim.antithetic = cfg.at("antithetic").get<bool>();

    std::vector<std::string> header{"observe_date", "contract_kind", "contract_code", "ref_start", "ref_end", "price",
                                    "model_price", "error"};
    if (mc_paths > 0) {
        header.push_back("mc_price");
        header.push_back("mc_stderr");
    }
    Csv csv(header);
    std::vector<std::vector<std::string>> rows;
    std::size_t priced = 0;
    for (const auto& q : quotes) {
        if (q.observe_date != snap.valuation) continue;
        const bool is_sofr = q.contract.kind != ContractKind::ff30d;
        auto& model = is_sofr ? sofr_model : effr_model;
        if (!model) model = snapshot_model(snap, is_sofr, cfg);
        const auto& fixings = is_sofr ? sofr : effr;
        const double price = price_futures(*model, model->initial_state(), snap.valuation, q.contract, fixings);
        auto row = quote_fields(q);
        row.push_back(num(price));
        row.push_back(num(calibration_error(price, q.price, q.contract.tolerance)));
        if (mc_paths > 0) {
            const auto est = mc_price_futures(*model, q.contract, fixings, static_cast<std::size_t>(mc_paths), sim);
            row.push_back(num(est.mean));
            row.push_back(num(est.std_error));
        }
        rows.push_back(std::move(row));
        ++priced;
    }
    if (priced == 0) throw ConsistencyError("no quotes observed on the curve valuation date " + format_date(snap.valuation));
    for (const auto& r : rows) csv.row(r);
    csv.write(out / "prices.csv");
    echo_config(cfg, out);
    return exit_ok;
}

// ---------------------------------------------------------------- simulate

double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

int cmd_simulate(const json& cfg, const fs::path& out, std::ostream&) {
    const auto snap = read_snapshot(required_path(cfg, "curve"));
    const std::string which = text(cfg, "model");
    bool sofr = false;
    if (which == "sofr") {
        sofr = true;
    } else if (which == "auto") {
        sofr = snap.sofr.has_value() && !snap.sofr->spike_dates.empty();
    } else if (which != "effr") {
        throw InputError("model must be effr, sofr or auto");
    }
    CompositeModel model = snapshot_model(snap, sofr, cfg);
    const json& residual = cfg.at("residual");
    const std::string rtype = residual.value("type", "constant");
    if (rtype == "vasicek") {
        VasicekParams vp;
        vp.theta = residual.at("theta").get<double>();
        vp.beta = residual.at("beta").get<double>();
        vp.sigma_v = residual.at("sigma_v").get<double>();
        vp.r0 = residual.value("r0", model.residual().spread());
        model = CompositeModel(model.grid(), model.step(),
                               model.has_spikes() ? std::optional<SpikeModel>(model.spike()) : std::nullopt,
                               ResidualModel::vasicek(vp));
    } else if (rtype != "constant") {
        throw InputError("residual type must be constant or vasicek");
    }

    const auto n_paths = static_cast<std::size_t>(positive(cfg, "n_paths"));
    const long long horizon_days = positive(cfg, "horizon_days");
    const int step_days = static_cast<int>(positive(cfg, "grid_step_days"));
    const long long export_paths = integer(cfg, "export_paths");
    SimulationOptions opts;
    opts.seed = seed_of(cfg);
    opts.threads = threads_of(cfg);
    opts.antithetic = cfg.at("antithetic").get<bool>();
    if (opts.antithetic && n_paths % 2 != 0) throw InputError("antithetic sampling needs an even n_paths");

    const double horizon = model.grid().time(snap.valuation + std::chrono::days{horizon_days});
    const auto paths = simulate_paths(model, n_paths, horizon, step_days, opts);

    std::string ptext = "path_id,time,short_rate,discount\n";
    const std::size_t n_export = std::min<std::size_t>(n_paths, static_cast<std::size_t>(std::max<long long>(export_paths, 0)));
    for (std::size_t p = 0; p < n_export; ++p) {
        for (std::size_t k = 0; k < paths[p].times.size(); ++k) {
            ptext += std::to_string(p) + "," + num(paths[p].times[k]) + "," + num(paths[p].short_rate[k]) + "," +
                     num(paths[p].discount[k]) + "\n";
        }
    }
    write_text_file(out / "paths.csv", ptext);

    const auto init = model.initial_state();
    Csv summary({"time", "mean_short_rate", "q05_short_rate", "q50_short_rate", "q95_short_rate", "mc_discount",
                 "mc_stderr", "bond_price", "within_3se"});
    const auto& times = paths.front().times;
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::vector<double> r(n_paths), disc(n_paths);
        for (std::size_t p = 0; p < n_paths; ++p) {
            r[p] = paths[p].short_rate[k];
            disc[p] = paths[p].discount[k];
        }
        McEstimate est;
        if (opts.antithetic) {
            std::vector<double> pairs(n_paths / 2);
            for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i] = 0.5 * (disc[2 * i] + disc[2 * i + 1]);
            est = mc_estimate(pairs);
        } else {
            est = mc_estimate(disc);
        }
        const double bond = model.bond_price(init, 0.0, times[k]);
        const bool within = std::abs(est.mean - bond) <= 3.0 * est.std_error + 1e-12;
        summary.row({num(times[k]), num(mc_estimate(r).mean), num(quantile(r, 0.05)), num(quantile(r, 0.5)),
                     num(quantile(r, 0.95)), num(est.mean), num(est.std_error), num(bond), within ? "true" : "false"});
    }
    summary.write(out / "summary.csv");
    echo_config(cfg, out);
    return exit_ok;
}

// ---------------------------------------------------------------- r2 / termrate

void check_gaps(const std::vector<ModelSnapshot>& snaps, long long max_gap) {
    for (std::size_t i = 1; i < snaps.size(); ++i) {
        const long long gap = (snaps[i].valuation - snaps[i - 1].valuation).count();
        if (gap > max_gap) {
            throw ConsistencyError("gap of " + std::to_string(gap) + " days between snapshots " +
                                   format_date(snaps[i - 1].valuation) + " and " + format_date(snaps[i].valuation));
        }
    }
}

std::vector<ModelSnapshot> read_snapshot_dir(const fs::path& dir, long long max_gap) {
    if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<ModelSnapshot> snaps;
    for (const auto& f : files) snaps.push_back(read_snapshot(f));
    if (snaps.empty()) throw InputError("no curve snapshots in " + dir.string());
    std::stable_sort(snaps.begin(), snaps.end(), [](const auto& a, const auto& b) { return a.valuation < b.valuation; });
    check_gaps(snaps, max_gap);
    return snaps;
}

CurveObservation observation(const ModelSnapshot& s) {
    return CurveObservation{s.valuation, s.ff.breakpoints, s.ff.levels};
}

std::vector<int> bucket_edges(const json& cfg) {
    const int width = static_cast<int>(positive(cfg, "bucket_width"));
    const int max_h = static_cast<int>(positive(cfg, "max_horizon"));
    std::vector<int> edges;
    for (int d = 0; d < max_h; d += width) edges.push_back(d);
    edges.push_back(max_h);
    return edges;
}

void write_r2(const std::vector<R2Row>& rows, const fs::path& path) {
    Csv csv({"bucket_lo", "bucket_hi", "r2", "n"});
    for (const auto& r : rows) csv.row({std::to_string(r.bucket_lo), std::to_string(r.bucket_hi), num(r.r2), std::to_string(r.n)});
    csv.write(path);
}

int cmd_r2(const json& cfg, const fs::path& out, std::ostream&) {
    const long long max_gap = positive(cfg, "max_gap_days");
    std::vector<RealizedChange> realized;
    for (const auto& [d, v] : read_date_values(required_path(cfg, "realized"))) realized.push_back({d, v});
    const auto edges = bucket_edges(cfg);

    std::vector<CurveObservation> curves;
    for (const auto& s : read_snapshot_dir(required_path(cfg, "curves_dir"), max_gap)) curves.push_back(observation(s));
    write_r2(anticipation_r2(curves, realized, edges, false), out / "r2.csv");

    if (const auto naive_dir = text(cfg, "naive_curves_dir"); !naive_dir.empty()) {
        std::vector<CurveObservation> naive;
        for (const auto& s : read_snapshot_dir(naive_dir, max_gap)) naive.push_back(observation(s));
        write_r2(anticipation_r2(naive, realized, edges, true), out / "r2_naive.csv");
    }
    echo_config(cfg, out);
    return exit_ok;
}

int cmd_termrate(const json& cfg, const fs::path& out, std::ostream&) {
    const long long max_gap = positive(cfg, "max_gap_days");
    const int tenor = static_cast<int>(positive(cfg, "tenor_months"));
    std::vector<ModelSnapshot> snaps;
    const auto dir = text(cfg, "curves_dir");
    const auto single = text(cfg, "curve");
    if (!dir.empty()) {
        snaps = read_snapshot_dir(dir, max_gap);
    } else if (!single.empty()) {
        snaps.push_back(read_snapshot(single));
    } else {
        throw InputError("termrate needs 'curves_dir' or 'curve'");
    }
    std::optional<FixingSeries> benchmark;
    if (const auto p = text(cfg, "benchmark"); !p.empty()) benchmark = read_fixings(p);

    std::vector<std::string> header{"date", "start", "end", "term_rate"};
    if (benchmark) {
        header.push_back("benchmark");
        header.push_back("spread");
    }
    Csv csv(header);
    const json zero_vol = {{"xi", 0.0}, {"rho", 0.0}, {"sigma_z", 0.0}};
    for (const auto& s : snaps) {
        const bool sofr = s.sofr.has_value() && !s.sofr->spike_dates.empty();
        const CompositeModel model = snapshot_model(s, sofr, zero_vol);
        const auto state = model.initial_state();
        const Date start = s.valuation;
        const Date end = add_months(start, tenor) - std::chrono::days{1};
        const double rate = compounded_term_rate(model.grid().calendar(), start, end, [&](Date d) {
            return model.expected_short_rate(state, 0.0, model.grid().time(std::max(d, s.valuation)));
        });
        std::vector<std::string> row{format_date(s.valuation), format_date(start), format_date(end), num(rate)};
        if (benchmark) {
            const auto b = benchmark->find(s.valuation);
            row.push_back(b ? num(*b) : "");
            row.push_back(b ? num(rate - *b) : "");
        }
        csv.row(row);
    }
    csv.write(out / "termrate.csv");
    echo_config(cfg, out);
    return exit_ok;
}

}  // namespace

int run_command(std::string_view command, const json& config, const fs::path& out_dir, std::ostream& log) {
    fs::create_directories(out_dir);
    if (command == "decompose") return cmd_decompose(config, out_dir, log);
    if (command == "hurst") return cmd_hurst(config, out_dir, log);
    if (command == "calibrate") return cmd_calibrate(config, out_dir, log);
    if (command == "price") return cmd_price(config, out_dir, log);
    if (command == "simulate") return cmd_simulate(config, out_dir, log);
    if (command == "r2") return cmd_r2(config, out_dir, log);
    if (command == "termrate") return cmd_termrate(config, out_dir, log);
    throw InputError("unknown command '" + std::string(command) + "'");
}

}  // namespace stepspike::cli
