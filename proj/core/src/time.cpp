#include "triage/time.hpp"

#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "triage/errors.hpp"
#include "triage/util.hpp"

namespace triage {

RelTime RelTime::from_seconds(double s) {
  if (!std::isfinite(s)) throw Error("RelTime: non-finite seconds");
  std::int64_t us = std::llround(s * 1e6);
  if (us < 0) throw PreEpochError("RelTime: negative seconds");
  return RelTime{us};
}

std::string RelTime::str() const {
  std::int64_t whole = micros / 1000000;
  std::int64_t frac = micros % 1000000;
  if (frac == 0) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%" PRId64, whole);
    return buf;
  }
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%" PRId64 ".%06" PRId64, whole, frac);
  std::string out(buf);
  while (out.back() == '0') out.pop_back();
  return out;
}

std::string RelTime::str_fixed6() const {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%" PRId64 ".%06" PRId64, micros / 1000000,
                micros % 1000000);
  return buf;
}

std::optional<RelTime> parse_reltime(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  std::size_t i = 0;
  if (text[i] == '+') ++i;
  if (i >= text.size()) return std::nullopt;
  std::int64_t whole = 0;
  bool any = false;
  for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
    any = true;
    if (whole > (INT64_MAX - 9) / 10) return std::nullopt;
    whole = whole * 10 + (text[i] - '0');
  }
  std::int64_t frac = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    int digits = 0;
    std::int64_t scale = 100000;
    bool round_up = false;
    for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
      any = true;
      ++digits;
      if (digits <= 6) {
        frac += (text[i] - '0') * scale;
        scale /= 10;
      } else if (digits == 7) {
        round_up = text[i] >= '5';
      }
    }
    if (round_up) ++frac;
  }
  if (!any || i != text.size()) return std::nullopt;
  if (whole > (INT64_MAX - frac) / 1000000) return std::nullopt;
  return RelTime{whole * 1000000 + frac};
}

namespace {

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

}  // namespace

double parse_rfc3339(std::string_view text) {
  text = trim(text);
  // Minimum: YYYY-MM-DDTHH:MM:SS followed by Z or +/-HH:MM.
  auto fail = [&]() -> double {
    throw ParseError("invalid RFC 3339 timestamp: " + std::string(text));
  };
  if (text.size() < 20) fail();
  auto num = [&](std::size_t pos, std::size_t len) -> int {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i]))) fail();
      v = v * 10 + (text[i] - '0');
    }
    return v;
  };
  int year = num(0, 4);
  if (text[4] != '-') fail();
  int month = num(5, 2);
  if (text[7] != '-') fail();
  int day = num(8, 2);
  if (text[10] != 'T' && text[10] != 't' && text[10] != ' ') fail();
  int hour = num(11, 2);
  if (text[13] != ':') fail();
  int minute = num(14, 2);
  if (text[16] != ':') fail();
  int second = num(17, 2);
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 ||
      second > 60)
    fail();

  std::size_t i = 19;
  double frac = 0.0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    double scale = 0.1;
    bool any = false;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      frac += (text[i] - '0') * scale;
      scale *= 0.1;
      ++i;
      any = true;
    }
    if (!any) fail();
  }
  int offset_s = 0;
  if (i >= text.size()) fail();
  if (text[i] == 'Z' || text[i] == 'z') {
    ++i;
  } else if (text[i] == '+' || text[i] == '-') {
    int sign = text[i] == '+' ? 1 : -1;
    int oh = num(i + 1, 2);
    if (i + 3 >= text.size() || text[i + 3] != ':') fail();
    int om = num(i + 4, 2);
    if (oh > 23 || om > 59) fail();
    offset_s = sign * (oh * 3600 + om * 60);
    i += 6;
  } else {
    fail();
  }
  if (i != text.size()) fail();

  std::int64_t days = days_from_civil(year, month, day);
  double abs_s = static_cast<double>(days) * 86400.0 + hour * 3600.0 + minute * 60.0 +
                 second + frac - offset_s;
  return abs_s;
}

std::string format_rfc3339_utc(double abs_seconds) {
  double floor_s = std::floor(abs_seconds);
  std::int64_t micros = std::llround((abs_seconds - floor_s) * 1e6);
  std::int64_t total = static_cast<std::int64_t>(floor_s);
  if (micros >= 1000000) {
    micros -= 1000000;
    total += 1;
  }
  std::int64_t days = total >= 0 ? total / 86400 : (total - 86399) / 86400;
  std::int64_t sod = total - days * 86400;

  // Inverse of days_from_civil.
  std::int64_t z = days + 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;

  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04" PRId64 "-%02u-%02uT%02d:%02d:%02d.%06" PRId64 "Z",
                y, m, d, static_cast<int>(sod / 3600), static_cast<int>((sod / 60) % 60),
                static_cast<int>(sod % 60), micros);
  return buf;
}

std::string format_abs6(double abs_seconds) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", abs_seconds);
  return buf;
}

}  // namespace triage
