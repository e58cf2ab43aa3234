#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "dstc/date.hpp"

namespace dstc {

inline constexpr std::string_view kPolicyName = "DSTC";
inline constexpr std::string_view kStrictConfig = "strict-config";

// One parsed DSTC TXT value. Only "strict-config" exists as a TLS level, so it
// is not stored as a field of its own beyond the string.
struct PolicyRecord {
  std::string name{kPolicyName};
  Date valid_from;
  Date valid_to;
  std::string tls_level{kStrictConfig};
  bool include_sub_domain = false;
  bool revoke = false;
  std::string report;

  friend bool operator==(const PolicyRecord&, const PolicyRecord&) = default;
};

enum class PolicyErrorKind {
  NotDstc,  // not a DSTC record at all: the caller ignores the TXT value
  MissingDirective,
  DuplicateDirective,
  UnknownDirective,
  MalformedDate,
  UnknownTlsLevel,
  BadFlag,
  BadReport,
};

std::string_view to_string(PolicyErrorKind kind);

class PolicyError : public std::runtime_error {
public:
  PolicyError(PolicyErrorKind kind, std::string directive, const std::string& detail);

  PolicyErrorKind kind() const noexcept { return kind_; }
  const std::string& directive() const noexcept { return directive_; }

private:
  PolicyErrorKind kind_;
  std::string directive_;
};

// Parses `key=value` pairs separated by ';'. Keys are case-sensitive, all seven
// directives are required exactly once, and unknown keys are rejected.
PolicyRecord parse_policy(std::string_view txt_value);

// Canonical rendering: fixed directive order, "; " separators, dd-mm-yyyy dates.
std::string serialize_policy(const PolicyRecord& p);

enum class PolicyStatus { Active, NotYetValid, Expired };

std::string_view to_string(PolicyStatus s);

PolicyStatus policy_status(const PolicyRecord& p, Date now);

// True when `s` has the local@domain shape accepted by the report directive.
bool is_report_address(std::string_view s);

}  // namespace dstc
