#include "fleetpdm/timeline.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace fleetpdm {

std::int64_t days_from_civil(int year, int month, int day) {
  year -= month <= 2;
  const std::int64_t era = (year >= 0 ? year : year - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(year - era * 400);
  const unsigned doy = (153u * (month + (month > 2 ? -3 : 9)) + 2u) / 5u + day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilTime civil_from_epoch_hour(EpochHour h) {
  std::int64_t days = h / kHoursPerDay;
  int hour = static_cast<int>(h % kHoursPerDay);
  if (hour < 0) {
    hour += kHoursPerDay;
    --days;
  }
  std::int64_t z = days + 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  CivilTime c;
  c.year = static_cast<int>(y + (m <= 2));
  c.month = static_cast<int>(m);
  c.day = static_cast<int>(d);
  c.hour = hour;
  return c;
}

EpochHour epoch_hour_from_civil(const CivilTime& c) {
  return days_from_civil(c.year, c.month, c.day) * kHoursPerDay + c.hour;
}

namespace {

bool parse_fixed_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  int value = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    char ch = text[i];
    if (ch < '0' || ch > '9') return false;
    value = value * 10 + (ch - '0');
  }
  out = value;
  return true;
}

constexpr std::array<int, 13> kDaysInMonth = {0, 31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

bool is_leap(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

}  // namespace

std::optional<EpochHour> parse_epoch_hour(std::string_view text, std::string* error) {
  auto fail = [&](const char* why) -> std::optional<EpochHour> {
    if (error) *error = why;
    return std::nullopt;
  };
  if (text.size() == 20 && text.back() == 'Z') text.remove_suffix(1);
  if (text.size() != 19) return fail("timestamp must be YYYY-MM-DD HH:MM:SS");
  CivilTime c;
  if (!parse_fixed_int(text, 0, 4, c.year) || text[4] != '-' ||
      !parse_fixed_int(text, 5, 2, c.month) || text[7] != '-' ||
      !parse_fixed_int(text, 8, 2, c.day) || (text[10] != ' ' && text[10] != 'T') ||
      !parse_fixed_int(text, 11, 2, c.hour) || text[13] != ':' ||
      !parse_fixed_int(text, 14, 2, c.minute) || text[16] != ':' ||
      !parse_fixed_int(text, 17, 2, c.second)) {
    return fail("malformed timestamp");
  }
  if (c.month < 1 || c.month > 12) return fail("month out of range");
  int dim = kDaysInMonth[c.month] + (c.month == 2 && is_leap(c.year) ? 1 : 0);
  if (c.day < 1 || c.day > dim) return fail("day out of range");
  if (c.hour > 23 || c.minute > 59 || c.second > 59) return fail("time out of range");
  if (c.minute != 0 || c.second != 0) return fail("timestamp not on the hourly grid");
  return epoch_hour_from_civil(c);
}

std::string format_epoch_hour(EpochHour h) {
  CivilTime c = civil_from_epoch_hour(h);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:00:00", c.year, c.month, c.day, c.hour);
  return buf;
}

EpochHour fleet_epoch_start() {
  static const EpochHour start = epoch_hour_from_civil({2015, 1, 1, 6, 0, 0});
  return start;
}

}  // namespace fleetpdm
