#pragma once

#include <nlohmann/json.hpp>
#include <optional>

#include "stepspike/calibration.hpp"

namespace stepspike::cli {

/// Calibrated curves on one valuation date: the Fed Funds stage and, when
/// run, the SOFR stage. Serialized as curve.json.
struct ModelSnapshot {
    Date valuation{};
    std::vector<Date> holidays;
    FfCalibration ff;
    std::optional<SofrCalibration> sofr;

    DateGrid grid() const;
};

/// Rounds to 12 significant digits so written values survive a text round trip.
double round12(double v);

nlohmann::json to_json(const ModelSnapshot& snapshot);
/// Throws InputError on a malformed document.
ModelSnapshot snapshot_from_json(const nlohmann::json& j);

ModelSnapshot read_snapshot(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace stepspike::cli
