#include "dstc/date.hpp"

#include <cstdio>
#include <stdexcept>

namespace dstc {

namespace {

std::optional<unsigned> parse_digits(std::string_view s) {
  unsigned v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + static_cast<unsigned>(c - '0');
  }
  return v;
}

}  // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) throw std::invalid_argument("not a calendar date");
  return Date{std::chrono::sys_days{ymd}};
}

std::optional<Date> Date::parse(std::string_view text) {
  if (text.size() != 10 || text[2] != '-' || text[5] != '-') return std::nullopt;
  const auto d = parse_digits(text.substr(0, 2));
  const auto m = parse_digits(text.substr(3, 2));
  const auto y = parse_digits(text.substr(6, 4));
  if (!d || !m || !y) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(*y)},
                                        std::chrono::month{*m}, std::chrono::day{*d}};
  if (!ymd.ok()) return std::nullopt;
  return Date{std::chrono::sys_days{ymd}};
}

Date Date::today() {
  return Date{std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now())};
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02u-%02u-%04d", day(), month(), year());
  return buf;
}

int Date::year() const { return static_cast<int>(std::chrono::year_month_day{days_}.year()); }

unsigned Date::month() const {
  return static_cast<unsigned>(std::chrono::year_month_day{days_}.month());
}

unsigned Date::day() const { return static_cast<unsigned>(std::chrono::year_month_day{days_}.day()); }

}  // namespace dstc
