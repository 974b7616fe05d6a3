#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stepspike/calendar.hpp"
#include "stepspike/futures.hpp"

namespace stepspike {

/// Numbers in output files: 12 significant digits, shortest form.
std::string format_number(double value);

/// Split one CSV record on commas and trim surrounding whitespace.
std::vector<std::string> split_csv_line(std::string_view line);

/// One ISO date per line; blank lines and lines starting with '#' are skipped.
/// A CSV line contributes its first field. Errors name the file and line.
std::vector<Date> read_date_list(const std::filesystem::path& path);

/// `date,value` rows with an optional header, dates strictly increasing.
std::vector<std::pair<Date, double>> read_date_values(const std::filesystem::path& path);

FixingSeries read_fixings(const std::filesystem::path& path);

/// `observe_date,contract_kind,contract_code,ref_start,ref_end,price` with a
/// header row. Tolerances are set from the observation date.
std::vector<FuturesQuote> read_quotes(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
/// Writes the file in binary mode so output bytes do not depend on the platform.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace stepspike
