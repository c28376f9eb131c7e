#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace ginn {

// Accepted CSV date layouts: YYYY-MM-DD, MM/DD/YYYY, DD/MM/YYYY.
enum class DateFormat { kIso, kUsSlash, kEuSlash };

// Recognizes "iso", "us", "eu" (case sensitive). Throws std::invalid_argument.
DateFormat date_format_from_string(std::string_view name);

// Calendar day stored as a count of days since 1970-01-01, proleptic
// Gregorian. Cheap to copy and compare, which is all the series code needs.
class Date {
 public:
  Date() = default;

  // Validates the civil triple (throws std::invalid_argument).
  static Date from_ymd(int year, int month, int day);
  static Date from_days(int32_t days) { return Date(days); }

  // Strict parse of one date token. Throws std::invalid_argument with the
  // offending text on any malformed or out-of-range input.
  static Date parse(std::string_view text, DateFormat format = DateFormat::kIso);

  int32_t days_since_epoch() const { return days_; }
  void to_ymd(int& year, int& month, int& day) const;
  std::string to_string() const;  // always ISO, zero padded

  Date plus_days(int32_t n) const { return Date(days_ + n); }
  auto operator<=>(const Date&) const = default;

 private:
  explicit Date(int32_t days) : days_(days) {}
  int32_t days_ = 0;
};

}  // namespace ginn
