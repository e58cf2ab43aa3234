#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace dstc {

// Calendar date at day precision. All policy, signature and store clocks use
// this type; nothing in the library reads the system clock except today().
class Date {
public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}

  // Throws std::invalid_argument when the triple is not a real calendar day.
  static Date from_ymd(int year, unsigned month, unsigned day);

  // Accepts only zero-padded dd-mm-yyyy.
  static std::optional<Date> parse(std::string_view text);

  static Date today();

  std::string to_string() const;  // dd-mm-yyyy

  int year() const;
  unsigned month() const;
  unsigned day() const;

  constexpr std::chrono::sys_days days() const { return days_; }

  Date plus_days(int n) const { return Date{days_ + std::chrono::days{n}}; }

  friend constexpr auto operator<=>(const Date&, const Date&) = default;

private:
  std::chrono::sys_days days_{};
};

}  // namespace dstc
