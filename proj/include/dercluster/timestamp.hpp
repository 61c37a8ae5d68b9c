#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace dercluster {

// An instant plus the fixed UTC offset it was written in. Ordering and
// equality use the instant only; the offset is kept so files round-trip and
// so window filters can reason in the meter's local clock. Daylight-saving
// rules are deliberately out of scope: offsets are taken as written.
struct Timestamp {
  std::int64_t epoch_s = 0;  // seconds since the Unix epoch (UTC)
  int offset_min = 0;

  friend bool operator==(const Timestamp& a, const Timestamp& b) {
    return a.epoch_s == b.epoch_s;
  }
  friend std::strong_ordering operator<=>(const Timestamp& a, const Timestamp& b) {
    return a.epoch_s <=> b.epoch_s;
  }
};

struct CivilDate {
  int year = 0;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
  friend auto operator<=>(const CivilDate&, const CivilDate&) = default;
};

struct CivilTime {
  CivilDate date;
  int hour = 0;
  int minute = 0;
  int second = 0;
};

// Days since 1970-01-01 for a proleptic Gregorian date, and back.
std::int64_t days_from_civil(int year, int month, int day);
CivilDate civil_from_days(std::int64_t days);

// Wall-clock fields of the timestamp in its own offset.
CivilTime local_time(const Timestamp& t);

// Strict ISO-8601 with seconds and an explicit offset:
// "2019-06-01T09:15:00+02:00" or "...Z". Throws std::invalid_argument.
Timestamp parse_timestamp(const std::string& text);
std::string format_timestamp(const Timestamp& t);

// "YYYY-MM-DD"; throws std::invalid_argument.
CivilDate parse_date(const std::string& text);
std::string format_date(const CivilDate& d);

}  // namespace dercluster
