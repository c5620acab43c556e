#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "coaccess/errors.hpp"

namespace coaccess {

/// UTC calendar date. Comparisons, arithmetic and epoch conversions are all
/// in the proleptic Gregorian calendar; there is no timezone anywhere in the
/// pipeline.
class Date {
 public:
  Date() = default;  // 1970-01-01

  Date(int year, int month, int day) : y_(year), m_(month), d_(day) {
    if (!ymd().ok()) {
      throw ContractError("invalid calendar date " + to_string());
    }
  }

  /// Strict `YYYY-MM-DD`. Returns nullopt on any malformation, including
  /// impossible dates such as 2004-13-01 or 2005-02-29.
  static std::optional<Date> parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
        !parse_int(text.substr(8, 2), d)) {
      return std::nullopt;
    }
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                    std::chrono::day{unsigned(d)}};
    if (!ymd.ok()) return std::nullopt;
    Date out;
    out.y_ = y;
    out.m_ = m;
    out.d_ = d;
    return out;
  }

  static Date from_days(std::int64_t days_since_epoch) {
    std::chrono::year_month_day ymd{
        std::chrono::sys_days{std::chrono::days{days_since_epoch}}};
    Date out;
    out.y_ = int(ymd.year());
    out.m_ = int(unsigned(ymd.month()));
    out.d_ = int(unsigned(ymd.day()));
    return out;
  }

  /// Calendar date containing the given UTC timestamp (floor).
  static Date from_epoch_seconds(std::int64_t seconds) {
    std::int64_t days = seconds / 86400;
    if (seconds < 0 && seconds % 86400 != 0) --days;
    return from_days(days);
  }

  int year() const { return y_; }
  int month() const { return m_; }
  int day() const { return d_; }

  std::int64_t days_since_epoch() const {
    return std::chrono::sys_days{ymd()}.time_since_epoch().count();
  }

  /// Midnight UTC at the start of this date.
  std::int64_t epoch_seconds() const { return days_since_epoch() * 86400; }

  /// Calendar-month shift; the day is clamped to the target month's length
  /// (2004-01-31 + 1 month = 2004-02-29).
  Date add_months(int n) const {
    auto shifted = std::chrono::year_month{std::chrono::year{y_},
                                           std::chrono::month{unsigned(m_)}} +
                   std::chrono::months{n};
    auto ymd = shifted / std::chrono::day{unsigned(d_)};
    if (!ymd.ok()) ymd = shifted / std::chrono::last;
    Date out;
    out.y_ = int(ymd.year());
    out.m_ = int(unsigned(ymd.month()));
    out.d_ = int(unsigned(ymd.day()));
    return out;
  }

  Date add_days(std::int64_t n) const { return from_days(days_since_epoch() + n); }

  std::string to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y_, m_, d_);
    return buf;
  }

  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::year_month_day ymd() const {
    return {std::chrono::year{y_}, std::chrono::month{unsigned(m_)},
            std::chrono::day{unsigned(d_)}};
  }

  static bool parse_int(std::string_view s, int& out) {
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && ptr == end;
  }

  int y_ = 1970;
  int m_ = 1;
  int d_ = 1;
};

/// Whole months from `from` to `to`, floored: 2004-06-01 -> 2005-03-15 is 9.
/// Negative when `to` precedes `from`.
inline int months_between(const Date& from, const Date& to) {
  int m = (to.year() - from.year()) * 12 + (to.month() - from.month());
  if (to.day() < from.day()) --m;
  return m;
}

}  // namespace coaccess
