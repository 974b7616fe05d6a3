#include "stepspike/cli/snapshot.hpp"

#include <cmath>
#include <cstdlib>

#include "stepspike/error.hpp"
#include "stepspike/io.hpp"

namespace stepspike::cli {

using nlohmann::json;

double round12(double v) {
    if (!std::isfinite(v)) return v;
    return std::strtod(format_number(v).c_str(), nullptr);
}

DateGrid ModelSnapshot::grid() const { return DateGrid(valuation, BusinessCalendar(holidays)); }

namespace {

json dates_json(std::span<const Date> dates) {
    json a = json::array();
    for (Date d : dates) a.push_back(format_date(d));
    return a;
}

json numbers_json(std::span<const double> values) {
    json a = json::array();
    for (double v : values) a.push_back(round12(v));
    return a;
}

json fits_json(const std::vector<ContractFit>& fits) {
    json a = json::array();
    for (const auto& f : fits) {
        a.push_back({{"contract_code", f.quote.contract.code},
                     {"contract_kind", to_string(f.quote.contract.kind)},
                     {"market_price", round12(f.quote.price)},
                     {"model_price", round12(f.model_price)},
                     {"tolerance", round12(f.tolerance)},
                     {"error", round12(f.error)}});
    }
    return a;
}

std::vector<Date> read_dates(const json& j, const char* key) {
    std::vector<Date> out;
    for (const auto& v : j.at(key)) out.push_back(parse_date(v.get<std::string>()));
    return out;
}

std::vector<double> read_numbers(const json& j, const char* key) {
    std::vector<double> out;
    for (const auto& v : j.at(key)) out.push_back(v.get<double>());
    return out;
}

std::vector<bool> read_bools(const json& j, const char* key) {
    std::vector<bool> out;
    for (const auto& v : j.at(key)) out.push_back(v.get<bool>());
    return out;
}

}  // namespace

json to_json(const ModelSnapshot& s) {
    json j;
    j["valuation_date"] = format_date(s.valuation);
    j["day_count"] = "ACT/365F";
    j["holidays"] = dates_json(s.holidays);

    const auto& ff = s.ff;
    json f;
    f["breakpoints"] = dates_json(ff.breakpoints);
    f["levels"] = numbers_json(ff.levels);
    f["identified"] = ff.identified;
    f["spread"] = round12(ff.spread);
    f["spread_fitted"] = ff.spread_fitted;
    f["objective"] = round12(ff.objective);
    f["squared_error"] = round12(ff.squared_error);
    f["iterations"] = ff.iterations;
    f["evaluations"] = ff.evaluations;
    f["converged"] = ff.converged;
    f["seed"] = ff.seed;
    f["fits"] = fits_json(ff.fits);
    j["ff"] = f;

    if (s.sofr) {
        const auto& so = *s.sofr;
        json z;
        z["spike_dates"] = dates_json(so.spike_dates);
        z["spike_widths_days"] = so.spike_widths;
        json levels = json::array();
        for (std::size_t i = 0; i < so.spike_levels.size(); ++i) {
            levels.push_back(so.identified[i] ? json(round12(so.spike_levels[i])) : json(nullptr));
        }
        z["spike_levels"] = levels;
        z["spread"] = round12(so.spread);
        z["objective"] = round12(so.objective);
        z["squared_error"] = round12(so.squared_error);
        z["iterations"] = so.iterations;
        z["evaluations"] = so.evaluations;
        z["converged"] = so.converged;
        z["seed"] = so.seed;
        z["fits"] = fits_json(so.fits);
        j["sofr"] = z;
    }
    return j;
}

ModelSnapshot snapshot_from_json(const json& j) {
    try {
        ModelSnapshot s;
        s.valuation = parse_date(j.at("valuation_date").get<std::string>());
        if (j.contains("holidays")) s.holidays = read_dates(j, "holidays");
        const json& f = j.at("ff");
        s.ff.valuation = s.valuation;
        s.ff.breakpoints = read_dates(f, "breakpoints");
        s.ff.levels = read_numbers(f, "levels");
        s.ff.identified = f.contains("identified") ? read_bools(f, "identified")
                                                   : std::vector<bool>(s.ff.levels.size(), true);
        s.ff.spread = f.at("spread").get<double>();
        s.ff.spread_fitted = f.value("spread_fitted", false);
        s.ff.objective = f.value("objective", 0.0);
        s.ff.squared_error = f.value("squared_error", 0.0);
        s.ff.converged = f.value("converged", true);
        s.ff.seed = f.value("seed", std::uint64_t{0});
        if (s.ff.levels.size() != s.ff.breakpoints.size() + 1 || s.ff.identified.size() != s.ff.levels.size()) {
            throw InputError("ff section needs one more level than breakpoints");
        }
        if (j.contains("sofr")) {
            const json& z = j.at("sofr");
            SofrCalibration so;
            so.valuation = s.valuation;
            so.spike_dates = read_dates(z, "spike_dates");
            for (const auto& w : z.at("spike_widths_days")) so.spike_widths.push_back(w.get<int>());
            for (const auto& v : z.at("spike_levels")) {
                so.identified.push_back(!v.is_null());
                so.spike_levels.push_back(v.is_null() ? 0.0 : v.get<double>());
            }
            so.spread = z.at("spread").get<double>();
            so.objective = z.value("objective", 0.0);
            so.squared_error = z.value("squared_error", 0.0);
            so.converged = z.value("converged", true);
            so.seed = z.value("seed", std::uint64_t{0});
            if (so.spike_widths.size() != so.spike_dates.size() || so.spike_levels.size() != so.spike_dates.size()) {
                throw InputError("sofr section needs one width and level per spike date");
            }
            s.sofr = std::move(so);
        }
        return s;
    } catch (const json::exception& e) {
        throw InputError(std::string("invalid model snapshot: ") + e.what());
    }
}

ModelSnapshot read_snapshot(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    try {
        return snapshot_from_json(j);
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace stepspike::cli
