// Hourly UTC timeline: all event streams live on an integer grid of
// hours since the Unix epoch. Conversions use the proleptic Gregorian
// calendar and never touch the system locale or time zone.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fleetpdm {

using EpochHour = std::int64_t;

inline constexpr int kHoursPerDay = 24;

struct CivilTime {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
  int hour = 0;   // 0..23
  int minute = 0;
  int second = 0;
};

// Days since 1970-01-01 (Howard Hinnant's algorithm).
std::int64_t days_from_civil(int year, int month, int day);
CivilTime civil_from_epoch_hour(EpochHour h);
EpochHour epoch_hour_from_civil(const CivilTime& c);

// Accepts "YYYY-MM-DD HH:MM:SS" and ISO 8601 "YYYY-MM-DDTHH:MM:SS[Z]",
// assumed UTC. Fails when the stamp is malformed, out of range, or not
// aligned to the hourly grid (nonzero minutes or seconds).
std::optional<EpochHour> parse_epoch_hour(std::string_view text, std::string* error = nullptr);

// "YYYY-MM-DD HH:MM:SS", the layout the fleet CSVs use.
std::string format_epoch_hour(EpochHour h);

// Fleet timelines start 2015-01-01 06:00:00 UTC.
EpochHour fleet_epoch_start();

}  // namespace fleetpdm
