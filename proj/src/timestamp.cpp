#include "dercluster/timestamp.hpp"

#include <array>
#include <cstdio>
#include <stdexcept>

namespace dercluster {

namespace {

bool is_leap(int y) { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }

int days_in_month(int y, int m) {
  static constexpr std::array<int, 12> lengths{31, 28, 31, 30, 31, 30,
                                               31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return lengths[m - 1];
}

[[noreturn]] void bad(const std::string& text, const char* why) {
  throw std::invalid_argument("malformed timestamp '" + text + "': " + why);
}

int digits(const std::string& s, std::size_t pos, int count, const char* why) {
  int v = 0;
  for (int i = 0; i < count; ++i) {
    const char c = pos + i < s.size() ? s[pos + i] : '\0';
    if (c < '0' || c > '9') bad(s, why);
    v = v * 10 + (c - '0');
  }
  return v;
}

}  // namespace

std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
                   static_cast<int>(d)};
}

CivilTime local_time(const Timestamp& t) {
  const std::int64_t local = t.epoch_s + static_cast<std::int64_t>(t.offset_min) * 60;
  std::int64_t days = local / 86400;
  std::int64_t rem = local % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  CivilTime out;
  out.date = civil_from_days(days);
  out.hour = static_cast<int>(rem / 3600);
  out.minute = static_cast<int>(rem % 3600 / 60);
  out.second = static_cast<int>(rem % 60);
  return out;
}

Timestamp parse_timestamp(const std::string& s) {
  // YYYY-MM-DDTHH:MM:SS followed by Z or +HH:MM / -HH:MM.
  if (s.size() < 20) bad(s, "too short");
  const int year = digits(s, 0, 4, "bad year");
  if (s[4] != '-') bad(s, "expected '-' after year");
  const int month = digits(s, 5, 2, "bad month");
  if (s[7] != '-') bad(s, "expected '-' after month");
  const int day = digits(s, 8, 2, "bad day");
  if (s[10] != 'T') bad(s, "expected 'T' between date and time");
  const int hour = digits(s, 11, 2, "bad hour");
  if (s[13] != ':') bad(s, "expected ':' after hour");
  const int minute = digits(s, 14, 2, "bad minute");
  if (s[16] != ':') bad(s, "expected ':' after minute");
  const int second = digits(s, 17, 2, "bad second");

  if (month < 1 || month > 12) bad(s, "month out of range");
  if (day < 1 || day > days_in_month(year, month)) bad(s, "day out of range");
  if (hour > 23) bad(s, "hour out of range");
  if (minute > 59) bad(s, "minute out of range");
  if (second > 59) bad(s, "second out of range");

  int offset_min = 0;
  const char tail = s[19];
  if (tail == 'Z') {
    if (s.size() != 20) bad(s, "trailing characters after 'Z'");
  } else if (tail == '+' || tail == '-') {
    if (s.size() != 25) bad(s, "offset must be +HH:MM or -HH:MM");
    const int oh = digits(s, 20, 2, "bad offset hour");
    if (s[22] != ':') bad(s, "expected ':' in offset");
    const int om = digits(s, 23, 2, "bad offset minute");
    if (oh > 17 || om > 59) bad(s, "offset out of range");
    offset_min = (oh * 60 + om) * (tail == '-' ? -1 : 1);
  } else {
    bad(s, "expected 'Z' or a numeric offset");
  }

  const std::int64_t local =
      days_from_civil(year, month, day) * 86400 +
      static_cast<std::int64_t>(hour) * 3600 + minute * 60 + second;
  return Timestamp{local - static_cast<std::int64_t>(offset_min) * 60, offset_min};
}

std::string format_timestamp(const Timestamp& t) {
  const CivilTime lt = local_time(t);
  char buf[40];
  if (t.offset_min == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", lt.date.year,
                  lt.date.month, lt.date.day, lt.hour, lt.minute, lt.second);
  } else {
    const int om = t.offset_min < 0 ? -t.offset_min : t.offset_min;
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d%c%02d:%02d",
                  lt.date.year, lt.date.month, lt.date.day, lt.hour, lt.minute,
                  lt.second, t.offset_min < 0 ? '-' : '+', om / 60, om % 60);
  }
  return buf;
}

CivilDate parse_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-')
    throw std::invalid_argument("malformed date '" + s + "': expected YYYY-MM-DD");
  const int year = digits(s, 0, 4, "bad year");
  const int month = digits(s, 5, 2, "bad month");
  const int day = digits(s, 8, 2, "bad day");
  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month))
    throw std::invalid_argument("malformed date '" + s + "': out of range");
  return CivilDate{year, month, day};
}

std::string format_date(const CivilDate& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

}  // namespace dercluster
