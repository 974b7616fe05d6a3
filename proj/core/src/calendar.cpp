#include "stepspike/calendar.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "stepspike/error.hpp"

namespace stepspike {

using namespace std::chrono;

namespace {

bool parse_uint(std::string_view s, unsigned& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

void check_range(Date d) {
    if (d < kMinSupportedDate || d > kMaxSupportedDate) {
        throw std::out_of_range("date outside supported range: " + format_date(d));
    }
}

bool is_weekend(Date d) {
    const weekday wd{d};
    return wd == Saturday || wd == Sunday;
}

}  // namespace

Date parse_date(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    unsigned y = 0, m = 0, d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_uint(text.substr(0, 4), y) ||
        !parse_uint(text.substr(5, 2), m) || !parse_uint(text.substr(8, 2), d)) {
        throw InputError("invalid ISO date '" + std::string(text) + "'");
    }
    const year_month_day ymd{year{static_cast<int>(y)}, month{m}, day{d}};
    if (!ymd.ok()) throw InputError("invalid calendar date '" + std::string(text) + "'");
    return sys_days{ymd};
}

std::string format_date(Date d) {
    const year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Date make_date(int y, unsigned m, unsigned d) {
    const year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
    return sys_days{ymd};
}

Date first_of_month(Date d) {
    const year_month_day ymd{d};
    return sys_days{ymd.year() / ymd.month() / 1};
}

Date last_of_month(Date d) {
    const year_month_day ymd{d};
    return sys_days{ymd.year() / ymd.month() / last};
}

Date add_months(Date d, int n) {
    const year_month_day ymd{d};
    year_month ym = ymd.year() / ymd.month();
    ym += months{n};
    const year_month_day_last eom{ym.year(), month_day_last{ym.month()}};
    const day dd = std::min(ymd.day(), eom.day());
    return sys_days{ym.year() / ym.month() / dd};
}

Date third_wednesday(int y, unsigned m) {
    return sys_days{year_month_weekday{year{y}, month{m}, Wednesday[3]}};
}

bool is_imm_date(Date d) {
    const year_month_day ymd{d};
    const unsigned m = static_cast<unsigned>(ymd.month());
    if (m % 3 != 0) return false;
    return d == third_wednesday(static_cast<int>(ymd.year()), m);
}

BusinessCalendar::BusinessCalendar(std::vector<Date> holidays) : holidays_(std::move(holidays)) {
    std::sort(holidays_.begin(), holidays_.end());
    holidays_.erase(std::unique(holidays_.begin(), holidays_.end()), holidays_.end());
}

bool BusinessCalendar::is_business_day(Date d) const {
    return !is_weekend(d) && !std::binary_search(holidays_.begin(), holidays_.end(), d);
}

Date BusinessCalendar::adjust_preceding(Date d) const {
    check_range(d);
    while (!is_business_day(d)) d -= days{1};
    return d;
}

Date BusinessCalendar::adjust_following(Date d) const {
    check_range(d);
    while (!is_business_day(d)) d += days{1};
    return d;
}

Date BusinessCalendar::next_business_day(Date d) const { return adjust_following(d + days{1}); }

Date BusinessCalendar::previous_business_day(Date d) const { return adjust_preceding(d - days{1}); }

Date BusinessCalendar::last_business_day_of_month(Date any_day_in_month) const {
    return adjust_preceding(last_of_month(any_day_in_month));
}

int days_to_next_business_day(const BusinessCalendar& calendar, Date d) {
    return static_cast<int>((calendar.next_business_day(d) - d).count());
}

DateGrid::DateGrid(Date anchor, BusinessCalendar calendar, DayCount day_count)
    : anchor_(anchor), calendar_(std::move(calendar)), day_count_(day_count) {
    check_range(anchor);
}

double DateGrid::year_fraction(Date d1, Date d2) const {
    check_range(d1);
    check_range(d2);
    const double n = static_cast<double>((d2 - d1).count());
    switch (day_count_) {
        case DayCount::act360: return n / 360.0;
        case DayCount::act365f: break;
    }
    return n / 365.0;
}

JumpSchedule::JumpSchedule(Kind kind, std::vector<double> times, std::vector<double> widths)
    : kind_(kind), times_(std::move(times)), widths_(std::move(widths)) {
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (!std::isfinite(times_[i]) || times_[i] <= 0.0) {
            throw std::invalid_argument("jump dates must lie strictly after the anchor");
        }
        if (i > 0 && !(times_[i] > times_[i - 1])) {
            throw std::invalid_argument("jump dates must be strictly increasing without duplicates");
        }
    }
    if (kind_ == Kind::spike) {
        if (widths_.size() != times_.size()) {
            throw std::invalid_argument("one spike width per spike date required");
        }
        for (std::size_t i = 0; i < times_.size(); ++i) {
            if (!(widths_[i] > 0.0) || !std::isfinite(widths_[i])) {
                throw std::invalid_argument("spike widths must be positive");
            }
            if (i + 1 < times_.size() && times_[i] + widths_[i] > times_[i + 1] + 1e-12) {
                throw std::invalid_argument("spike windows must be pairwise disjoint");
            }
        }
    }
}

JumpSchedule JumpSchedule::steps(std::vector<double> times) {
    return JumpSchedule(Kind::step, std::move(times), {});
}

JumpSchedule JumpSchedule::spikes(std::vector<double> times, std::vector<double> widths) {
    return JumpSchedule(Kind::spike, std::move(times), std::move(widths));
}

JumpSchedule JumpSchedule::steps(const DateGrid& grid, std::span<const Date> dates) {
    std::vector<double> times;
    times.reserve(dates.size());
    for (Date d : dates) times.push_back(grid.time(d));
    return steps(std::move(times));
}

JumpSchedule JumpSchedule::spikes(const DateGrid& grid, std::span<const Date> dates) {
    std::vector<int> width_days;
    width_days.reserve(dates.size());
    for (Date d : dates) width_days.push_back(days_to_next_business_day(grid.calendar(), d));
    return spikes(grid, dates, width_days);
}

JumpSchedule JumpSchedule::spikes(const DateGrid& grid, std::span<const Date> dates,
                                  std::span<const int> width_days) {
    if (width_days.size() != dates.size()) {
        throw std::invalid_argument("one spike width per spike date required");
    }
    std::vector<double> times, widths;
    for (std::size_t i = 0; i < dates.size(); ++i) {
        if (width_days[i] <= 0) throw std::invalid_argument("spike widths must be positive");
        times.push_back(grid.time(dates[i]));
        widths.push_back(grid.year_fraction(dates[i], dates[i] + days{width_days[i]}));
    }
    return spikes(std::move(times), std::move(widths));
}

}  // namespace stepspike
