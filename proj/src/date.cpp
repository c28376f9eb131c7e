#include "date.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace ginn {
namespace {

// Howard Hinnant's civil-days algorithms, valid across the full int range.
int32_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<int32_t>(doe) - 719468;
}

void civil_from_days(int32_t z, int& y, int& m, int& d) {
  z += 719468;
  const int era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int yr = static_cast<int>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  y = yr + (m <= 2);
}

int parse_int_field(std::string_view text, size_t pos, size_t len) {
  int value = 0;
  const char* first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc() || ptr != first + len) {
    throw std::invalid_argument("bad date field in '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

DateFormat date_format_from_string(std::string_view name) {
  if (name == "iso") return DateFormat::kIso;
  if (name == "us") return DateFormat::kUsSlash;
  if (name == "eu") return DateFormat::kEuSlash;
  throw std::invalid_argument("unknown date format '" + std::string(name) +
                              "', expected iso, us or eu");
}

Date Date::from_ymd(int year, int month, int day) {
  if (year < -9999 || year > 9999 || month < 1 || month > 12 || day < 1 || day > 31) {
    throw std::invalid_argument("date out of range");
  }
  const int32_t days = days_from_civil(year, month, day);
  int y2, m2, d2;
  civil_from_days(days, y2, m2, d2);
  if (y2 != year || m2 != month || d2 != day) {
    // e.g. February 30 normalizes to a different triple
    throw std::invalid_argument("invalid calendar day");
  }
  return Date(days);
}

Date Date::parse(std::string_view text, DateFormat format) {
  const auto fail = [&]() -> Date {
    throw std::invalid_argument("cannot parse date '" + std::string(text) + "'");
  };
  if (text.size() != 10) return fail();
  int y, m, d;
  switch (format) {
    case DateFormat::kIso:
      if (text[4] != '-' || text[7] != '-') return fail();
      y = parse_int_field(text, 0, 4);
      m = parse_int_field(text, 5, 2);
      d = parse_int_field(text, 8, 2);
      break;
    case DateFormat::kUsSlash:
      if (text[2] != '/' || text[5] != '/') return fail();
      m = parse_int_field(text, 0, 2);
      d = parse_int_field(text, 3, 2);
      y = parse_int_field(text, 6, 4);
      break;
    case DateFormat::kEuSlash:
      if (text[2] != '/' || text[5] != '/') return fail();
      d = parse_int_field(text, 0, 2);
      m = parse_int_field(text, 3, 2);
      y = parse_int_field(text, 6, 4);
      break;
    default:
      return fail();
  }
  try {
    return from_ymd(y, m, d);
  } catch (const std::invalid_argument&) {
    return fail();
  }
}

void Date::to_ymd(int& year, int& month, int& day) const {
  civil_from_days(days_, year, month, day);
}

std::string Date::to_string() const {
  int y, m, d;
  civil_from_days(days_, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return buf;
}

}  // namespace ginn
