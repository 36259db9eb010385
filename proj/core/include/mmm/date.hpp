#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mmm {

/// Calendar date in the proleptic Gregorian calendar, stored as days since
/// 1970-01-01. Only the ISO `YYYY-MM-DD` text form is accepted.
class Date {
 public:
  constexpr Date() = default;

  static Date from_days(std::int32_t days) {
    Date d;
    d.days_ = days;
    return d;
  }
  static Date from_ymd(int year, unsigned month, unsigned day);

  /// Throws InputError unless `text` is a valid `YYYY-MM-DD` date.
  static Date parse(std::string_view text);
  static std::optional<Date> try_parse(std::string_view text);

  std::int32_t days() const { return days_; }
  int year() const;
  unsigned month() const;
  unsigned day() const;
  std::string iso() const;

  Date operator+(std::int32_t n) const { return from_days(days_ + n); }
  Date operator-(std::int32_t n) const { return from_days(days_ - n); }
  std::int32_t operator-(const Date& other) const { return days_ - other.days_; }

  auto operator<=>(const Date&) const = default;

 private:
  std::int32_t days_ = 0;
};

}  // namespace mmm
