#include "stepspike/cli/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <ostream>

#include "stepspike/error.hpp"
#include "stepspike/io.hpp"

namespace stepspike::cli {

using nlohmann::json;

namespace {

enum class Kind { text, number, integer, flag };

struct OptionSpec {
    const char* flag;
    const char* key;
    Kind kind;
    const char* help;
};

struct CommandSpec {
    const char* name;
    const char* description;
    std::vector<OptionSpec> options;
    json defaults;
};

const std::vector<CommandSpec>& specs() {
    static const std::vector<CommandSpec> all = {
        {"decompose",
         "Split a daily rate series into target, spike and residual components",
         {{"--series", "series", Kind::text, "rate fixings CSV (date,rate)"},
          {"--target", "target", Kind::text, "target rate CSV (date,rate)"},
          {"--eom-dates", "eom_dates", Kind::text, "end-of-month dates, one per line (default: last observation per month)"},
          {"--mode", "mode", Kind::text, "effr or sofr (sofr also separates non-EOM spikes)"},
          {"--spike-threshold", "spike_threshold", Kind::number, "non-EOM spike threshold, decimal rate"},
          {"--hurst-lag-min", "hurst_lag_min", Kind::integer, "smallest Hurst lag"},
          {"--hurst-lag-max", "hurst_lag_max", Kind::integer, "largest Hurst lag"}},
         {{"series", ""}, {"target", ""}, {"eom_dates", ""}, {"mode", "effr"},
          {"spike_threshold", 0.002}, {"hurst_lag_min", 1}, {"hurst_lag_max", 20}}},
        {"hurst",
         "Hurst exponent of a daily series from lagged-difference variances",
         {{"--input", "input", Kind::text, "series CSV (date,value)"},
          {"--lag-min", "lag_min", Kind::integer, "smallest lag"},
          {"--lag-max", "lag_max", Kind::integer, "largest lag"}},
         {{"input", ""}, {"lag_min", 1}, {"lag_max", 20}}},
        {"calibrate",
         "Fit target levels and EFFR spread to Fed Funds futures, then spikes and SOFR spread to SOFR futures",
         {{"--valuation-date", "valuation_date", Kind::text, "valuation date (ISO)"},
          {"--quotes", "quotes", Kind::text, "quotes CSV"},
          {"--fomc", "fomc", Kind::text, "FOMC effective dates, one per line"},
          {"--holidays", "holidays", Kind::text, "holiday list, one date per line"},
          {"--effr-fixings", "effr_fixings", Kind::text, "EFFR fixings CSV (date,rate)"},
          {"--sofr-fixings", "sofr_fixings", Kind::text, "SOFR fixings CSV (date,rate)"},
          {"--target-rate", "target_rate", Kind::number, "current target rate; frees the EFFR spread"},
          {"--fixed-spread", "fixed_spread", Kind::number, "EFFR spread used when no target rate is given"},
          {"--spike-dates", "spike_dates", Kind::text, "spike dates (default: last business day of each month)"},
          {"--stage", "stage", Kind::text, "ff, sofr or both"},
          {"--ff-curve", "ff_curve", Kind::text, "curve.json of an earlier ff stage (default: <out>/curve.json)"},
          {"--breakpoints", "breakpoints", Kind::text, "fomc or monthly"},
          {"--population", "population", Kind::integer, "optimizer population (0 = automatic)"},
          {"--max-iters", "max_iters", Kind::integer, "optimizer generations"},
          {"--tolerance-front", "tolerance_front", Kind::number, "tolerance for the front contract"},
          {"--tolerance-back", "tolerance_back", Kind::number, "tolerance for other contracts"}},
         {{"valuation_date", ""}, {"quotes", ""}, {"fomc", ""}, {"holidays", ""}, {"effr_fixings", ""},
          {"sofr_fixings", ""}, {"target_rate", nullptr}, {"fixed_spread", 0.0}, {"spike_dates", ""},
          {"stage", "both"}, {"ff_curve", ""}, {"breakpoints", "fomc"}, {"population", 0}, {"max_iters", 400},
          {"tolerance_front", 0.0025}, {"tolerance_back", 0.005}, {"convergence_threshold", 1e-8},
          {"max_ff_contracts", 12},
          {"bounds",
           {{"level_lo", -0.01}, {"level_hi", 0.10}, {"spike_lo", -0.02}, {"spike_hi", 0.05},
            {"spread_lo", -0.01}, {"spread_hi", 0.01}}}}},
        {"price",
         "Price futures quotes off a calibrated curve",
         {{"--curve", "curve", Kind::text, "curve.json"},
          {"--quotes", "quotes", Kind::text, "quotes CSV"},
          {"--effr-fixings", "effr_fixings", Kind::text, "EFFR fixings CSV"},
          {"--sofr-fixings", "sofr_fixings", Kind::text, "SOFR fixings CSV"},
          {"--mc-paths", "mc_paths", Kind::integer, "Monte Carlo paths per contract (0 = off)"}},
         {{"curve", ""}, {"quotes", ""}, {"effr_fixings", ""}, {"sofr_fixings", ""}, {"mc_paths", 0},
          {"xi", 0.0}, {"rho", 0.0}, {"sigma_z", 0.0}, {"antithetic", false}}},
        {"simulate",
         "Simulate short-rate and discount paths from a calibrated curve",
         {{"--curve", "curve", Kind::text, "curve.json"},
          {"--model", "model", Kind::text, "effr, sofr or auto"},
          {"--n-paths", "n_paths", Kind::integer, "number of paths"},
          {"--horizon-days", "horizon_days", Kind::integer, "horizon in calendar days"},
          {"--grid-step-days", "grid_step_days", Kind::integer, "output grid step in calendar days"},
          {"--export-paths", "export_paths", Kind::integer, "paths written to paths.csv"},
          {"--xi", "xi", Kind::number, "step volatility for every FOMC date"},
          {"--sigma-z", "sigma_z", Kind::number, "spike volatility for every spike"},
          {"--rho", "rho", Kind::number, "uniform correlation between step factors"},
          {"--antithetic", "antithetic", Kind::flag, "antithetic sampling"}},
         {{"curve", ""}, {"model", "auto"}, {"n_paths", 1000}, {"horizon_days", 365}, {"grid_step_days", 7},
          {"export_paths", 10}, {"xi", 0.0}, {"rho", 0.0}, {"sigma_z", 0.0}, {"antithetic", false},
          {"residual", {{"type", "constant"}}}}},
        {"r2",
         "R-squared of realized target changes against curve-implied jumps by horizon",
         {{"--curves-dir", "curves_dir", Kind::text, "directory of curve.json snapshots"},
          {"--naive-curves-dir", "naive_curves_dir", Kind::text, "snapshots calibrated with monthly breakpoints"},
          {"--realized", "realized", Kind::text, "realized target changes CSV (date,change)"},
          {"--bucket-width", "bucket_width", Kind::integer, "bucket width in days"},
          {"--max-horizon", "max_horizon", Kind::integer, "largest horizon in days"},
          {"--max-gap-days", "max_gap_days", Kind::integer, "largest allowed gap between snapshots"}},
         {{"curves_dir", ""}, {"naive_curves_dir", ""}, {"realized", ""}, {"bucket_width", 10},
          {"max_horizon", 250}, {"max_gap_days", 7}}},
        {"termrate",
         "Compounded term rates from calibrated curves",
         {{"--curves-dir", "curves_dir", Kind::text, "directory of curve.json snapshots"},
          {"--curve", "curve", Kind::text, "single curve.json"},
          {"--benchmark", "benchmark", Kind::text, "benchmark rates CSV (date,rate)"},
          {"--tenor-months", "tenor_months", Kind::integer, "term in months"},
          {"--max-gap-days", "max_gap_days", Kind::integer, "largest allowed gap between snapshots"}},
         {{"curves_dir", ""}, {"curve", ""}, {"benchmark", ""}, {"tenor_months", 3}, {"max_gap_days", 7}}},
    };
    return all;
}

const CommandSpec& spec_for(std::string_view command) {
    for (const auto& s : specs()) {
        if (command == s.name) return s;
    }
    throw InputError("unknown command '" + std::string(command) + "'");
}

void overlay(json& target, const json& source, bool strict, std::string_view command) {
    for (const auto& [key, value] : source.items()) {
        if (!target.contains(key)) {
            if (strict) throw InputError("unknown configuration key '" + key + "' for " + std::string(command));
            continue;
        }
        if (target[key].is_object() && value.is_object()) {
            for (const auto& [k2, v2] : value.items()) {
                if (!target[key].contains(k2)) throw InputError("unknown configuration key '" + key + "." + k2 + "'");
                target[key][k2] = v2;
            }
        } else {
            target[key] = value;
        }
    }
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& s : specs()) n.emplace_back(s.name);
        return n;
    }();
    return names;
}

json default_config(std::string_view command) {
    json j = spec_for(command).defaults;
    j["command"] = std::string(command);
    j["seed"] = 0;
    j["threads"] = 1;
    return j;
}

json resolve_config(std::string_view command, const json& file, const json& overrides) {
    json cfg = default_config(command);
    if (!file.is_null()) {
        if (!file.is_object()) throw InputError("configuration must be a JSON object");
        json top = file;
        for (const auto& name : command_names()) top.erase(name);
        top.erase("command");
        overlay(cfg, top, false, command);
        if (file.contains(std::string(command))) {
            const json& section = file.at(std::string(command));
            if (!section.is_object()) throw InputError("configuration section '" + std::string(command) + "' must be an object");
            overlay(cfg, section, true, command);
        }
    }
    overlay(cfg, overrides, true, command);
    return cfg;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"stepspike: step-and-spike short-rate model: futures calibration, pricing, simulation and diagnostics.\n"
                 "Dates are ISO-8601, rates are decimals (0.0155 = 1.55%), futures prices are index points."};
    app.require_subcommand(1);
    std::string config_path, out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (0 = all cores)");

    struct Bound {
        const OptionSpec* spec;
        CLI::Option* option;
        std::string text;
        bool flag = false;
    };
    std::vector<std::pair<CLI::App*, std::vector<std::unique_ptr<Bound>>>> subs;
    for (const auto& cs : specs()) {
        CLI::App* sub = app.add_subcommand(cs.name, cs.description);
        sub->fallthrough();
        std::vector<std::unique_ptr<Bound>> bound;
        for (const auto& os : cs.options) {
            auto b = std::make_unique<Bound>();
            b->spec = &os;
            if (os.kind == Kind::flag) {
                b->option = sub->add_flag(os.flag, b->flag, os.help);
            } else {
                b->option = sub->add_option(os.flag, b->text, os.help);
            }
            bound.push_back(std::move(b));
        }
        subs.emplace_back(sub, std::move(bound));
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_input_error;
    }

    try {
        for (auto& [sub, bound] : subs) {
            if (!sub->parsed()) continue;
            const std::string command = sub->get_name();
            json overrides = json::object();
            for (const auto& b : bound) {
                if (b->option->count() == 0) continue;
                const char* key = b->spec->key;
                switch (b->spec->kind) {
                    case Kind::text: overrides[key] = b->text; break;
                    case Kind::flag: overrides[key] = b->flag; break;
                    case Kind::number:
                        try {
                            overrides[key] = std::stod(b->text);
                        } catch (const std::exception&) {
                            throw InputError(std::string(b->spec->flag) + " expects a number");
                        }
                        break;
                    case Kind::integer:
                        try {
                            std::size_t used = 0;
                            long long v = std::stoll(b->text, &used);
                            if (used != b->text.size()) throw std::invalid_argument("trailing");
                            overrides[key] = v;
                        } catch (const std::exception&) {
                            throw InputError(std::string(b->spec->flag) + " expects an integer");
                        }
                        break;
                }
            }
            if (seed) overrides["seed"] = *seed;
            if (threads) overrides["threads"] = *threads;
            json file;
            if (!config_path.empty()) {
                try {
                    file = json::parse(read_text_file(config_path));
                } catch (const json::exception& e) {
                    throw InputError(config_path + ": " + e.what());
                }
            }
            const json cfg = resolve_config(command, file, overrides);
            std::filesystem::create_directories(out_dir);
            return run_command(command, cfg, out_dir, err);
        }
        return exit_input_error;
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n";
        return exit_input_error;
    } catch (const ConsistencyError& e) {
        err << "data consistency error: " << e.what() << "\n";
        return exit_consistency_error;
    } catch (const MissingStageError& e) {
        err << "missing stage: " << e.what() << "\n";
        return exit_missing_stage;
    } catch (const nlohmann::json::exception& e) {
        err << "input error: " << e.what() << "\n";
        return exit_input_error;
    } catch (const std::invalid_argument& e) {
        err << "input error: " << e.what() << "\n";
        return exit_input_error;
    } catch (const std::out_of_range& e) {
        err << "input error: " << e.what() << "\n";
        return exit_input_error;
    } catch (const std::domain_error& e) {
        err << "data consistency error: " << e.what() << "\n";
        return exit_consistency_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_failure;
    }
}

}  // namespace stepspike::cli
