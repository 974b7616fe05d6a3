#include "stepspike/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "stepspike/error.hpp"

namespace stepspike {

namespace {

std::string where(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line) + ": ";
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_number(std::string_view text) {
    const std::string s(text);
    if (s.empty()) throw InputError("empty numeric field");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
        throw InputError("invalid number '" + s + "'");
    }
    return v;
}

bool looks_like_date(std::string_view field) {
    return field.size() == 10 && field[4] == '-' && field[7] == '-';
}

struct Line {
    std::size_t number;
    std::string text;
};

std::vector<Line> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<Line> lines;
    std::string text;
    std::size_t n = 0;
    while (std::getline(in, text)) {
        ++n;
        const auto t = trim(text);
        if (t.empty() || t.front() == '#') continue;
        lines.push_back({n, std::string(t)});
    }
    return lines;
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (value == 0.0) return "0";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<Date> read_date_list(const std::filesystem::path& path) {
    std::vector<Date> out;
    const auto lines = read_lines(path);
    for (std::size_t k = 0; k < lines.size(); ++k) {
        const auto fields = split_csv_line(lines[k].text);
        if (k == 0 && !looks_like_date(fields[0])) continue;  // header
        try {
            out.push_back(parse_date(fields[0]));
        } catch (const InputError& e) {
            throw InputError(where(path, lines[k].number) + e.what());
        }
    }
    return out;
}

std::vector<std::pair<Date, double>> read_date_values(const std::filesystem::path& path) {
    std::vector<std::pair<Date, double>> out;
    const auto lines = read_lines(path);
    for (std::size_t k = 0; k < lines.size(); ++k) {
        const auto fields = split_csv_line(lines[k].text);
        if (k == 0 && !looks_like_date(fields[0])) continue;
        try {
            if (fields.size() != 2) throw InputError("expected 2 fields, found " + std::to_string(fields.size()));
            const Date d = parse_date(fields[0]);
            if (!out.empty() && d <= out.back().first) throw InputError("dates must be strictly increasing");
            out.emplace_back(d, parse_number(fields[1]));
        } catch (const InputError& e) {
            throw InputError(where(path, lines[k].number) + e.what());
        }
    }
    return out;
}

FixingSeries read_fixings(const std::filesystem::path& path) {
    std::map<Date, double> values;
    for (const auto& [d, v] : read_date_values(path)) values.emplace(d, v);
    return FixingSeries(std::move(values));
}

std::vector<FuturesQuote> read_quotes(const std::filesystem::path& path) {
    std::vector<FuturesQuote> out;
    const auto lines = read_lines(path);
    for (std::size_t k = 0; k < lines.size(); ++k) {
        const auto fields = split_csv_line(lines[k].text);
        if (k == 0 && !looks_like_date(fields[0])) continue;
        try {
            if (fields.size() != 6) throw InputError("expected 6 fields, found " + std::to_string(fields.size()));
            FuturesQuote q;
            q.observe_date = parse_date(fields[0]);
            q.contract.kind = parse_contract_kind(fields[1]);
            q.contract.code = fields[2];
            q.contract.ref_start = parse_date(fields[3]);
            q.contract.ref_end = parse_date(fields[4]);
            q.price = parse_number(fields[5]);
            validate_contract(q.contract);
            q.contract.tolerance = default_tolerance(q.contract, q.observe_date);
            out.push_back(std::move(q));
        } catch (const InputError& e) {
            throw InputError(where(path, lines[k].number) + e.what());
        }
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace stepspike
