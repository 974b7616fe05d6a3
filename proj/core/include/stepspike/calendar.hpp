#pragma once

#include <chrono>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stepspike {

using Date = std::chrono::sys_days;

/// Parse an ISO-8601 calendar date (YYYY-MM-DD). Throws InputError.
Date parse_date(std::string_view text);
std::string format_date(Date d);

Date make_date(int y, unsigned m, unsigned d);
Date first_of_month(Date d);
Date last_of_month(Date d);
Date add_months(Date d, int months);

/// Third Wednesday of the given month.
Date third_wednesday(int year, unsigned month);
/// True when `d` is the third Wednesday of March, June, September or December.
bool is_imm_date(Date d);

enum class DayCount { act365f, act360 };

/// Good business days: Monday to Friday minus an explicit holiday list.
class BusinessCalendar {
public:
    BusinessCalendar() = default;
    explicit BusinessCalendar(std::vector<Date> holidays);

    bool is_business_day(Date d) const;
    /// Latest business day on or before `d`.
    Date adjust_preceding(Date d) const;
    /// Earliest business day on or after `d`.
    Date adjust_following(Date d) const;
    /// First business day strictly after `d`.
    Date next_business_day(Date d) const;
    /// Last business day strictly before `d`.
    Date previous_business_day(Date d) const;
    Date last_business_day_of_month(Date any_day_in_month) const;

    std::span<const Date> holidays() const { return holidays_; }

private:
    std::vector<Date> holidays_;  // sorted, unique
};

/// Model clock: maps calendar dates to year fractions from an anchor date.
class DateGrid {
public:
    DateGrid(Date anchor, BusinessCalendar calendar, DayCount day_count = DayCount::act365f);

    Date anchor() const { return anchor_; }
    DayCount day_count() const { return day_count_; }
    const BusinessCalendar& calendar() const { return calendar_; }

    /// Signed year fraction between two dates; antisymmetric.
    double year_fraction(Date d1, Date d2) const;
    /// Year fraction from the anchor.
    double time(Date d) const { return year_fraction(anchor_, d); }

private:
    Date anchor_;
    BusinessCalendar calendar_;
    DayCount day_count_;
};

inline constexpr Date kMinSupportedDate{std::chrono::year{1900} / 1 / 1};
inline constexpr Date kMaxSupportedDate{std::chrono::year{2199} / 12 / 31};

/// Ordered jump dates on model time (year fractions from the grid anchor).
///
/// Step schedules carry FOMC dates x_1 < ... < x_n. Spike schedules carry
/// windows H_i = [z_i, z_i + h_i), pairwise disjoint.
class JumpSchedule {
public:
    enum class Kind { step, spike };

    static JumpSchedule steps(std::vector<double> times);
    static JumpSchedule spikes(std::vector<double> times, std::vector<double> widths);

    /// Calendar-date constructors; spike widths default to the days until the
    /// next business day (so a Friday spike covers the weekend).
    static JumpSchedule steps(const DateGrid& grid, std::span<const Date> dates);
    static JumpSchedule spikes(const DateGrid& grid, std::span<const Date> dates);
    static JumpSchedule spikes(const DateGrid& grid, std::span<const Date> dates,
                               std::span<const int> width_days);

    Kind kind() const { return kind_; }
    std::size_t size() const { return times_.size(); }
    bool empty() const { return times_.empty(); }
    std::span<const double> times() const { return times_; }
    std::span<const double> widths() const { return widths_; }
    double time(std::size_t i) const { return times_[i]; }
    double width(std::size_t i) const { return widths_[i]; }
    double window_end(std::size_t i) const { return times_[i] + widths_[i]; }
    bool in_window(std::size_t i, double t) const {
        return t >= times_[i] && t < times_[i] + widths_[i];
    }

private:
    JumpSchedule(Kind kind, std::vector<double> times, std::vector<double> widths);

    Kind kind_;
    std::vector<double> times_;
    std::vector<double> widths_;
};

/// Calendar days from `d` to the next business day (at least 1).
int days_to_next_business_day(const BusinessCalendar& calendar, Date d);

}  // namespace stepspike
