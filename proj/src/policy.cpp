#include "dstc/policy.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <vector>

namespace dstc {

namespace {

constexpr std::array<std::string_view, 7> kDirectives = {
    "name", "validFrom", "validTo", "tlsLevel", "includeSubDomain", "revoke", "report"};

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

struct Pair {
  std::string_view key;
  std::optional<std::string_view> value;  // nullopt when the piece had no '='
};

std::vector<Pair> split_pairs(std::string_view txt) {
  std::vector<Pair> out;
  while (true) {
    const auto semi = txt.find(';');
    const auto piece = trim(txt.substr(0, semi));
    if (!piece.empty()) {
      const auto eq = piece.find('=');
      if (eq == std::string_view::npos) {
        out.push_back({piece, std::nullopt});
      } else {
        out.push_back({trim(piece.substr(0, eq)), trim(piece.substr(eq + 1))});
      }
    }
    if (semi == std::string_view::npos) break;
    txt.remove_prefix(semi + 1);
  }
  return out;
}

Date parse_date(std::string_view directive, std::string_view value) {
  auto d = Date::parse(value);
  if (!d) {
    throw PolicyError(PolicyErrorKind::MalformedDate, std::string(directive),
                      "expected dd-mm-yyyy, got '" + std::string(value) + "'");
  }
  return *d;
}

bool parse_flag(std::string_view directive, std::string_view value) {
  if (value == "0") return false;
  if (value == "1") return true;
  throw PolicyError(PolicyErrorKind::BadFlag, std::string(directive),
                    "expected 0 or 1, got '" + std::string(value) + "'");
}

}  // namespace

std::string_view to_string(PolicyErrorKind kind) {
  switch (kind) {
    case PolicyErrorKind::NotDstc: return "NotDstc";
    case PolicyErrorKind::MissingDirective: return "MissingDirective";
    case PolicyErrorKind::DuplicateDirective: return "DuplicateDirective";
    case PolicyErrorKind::UnknownDirective: return "UnknownDirective";
    case PolicyErrorKind::MalformedDate: return "MalformedDate";
    case PolicyErrorKind::UnknownTlsLevel: return "UnknownTlsLevel";
    case PolicyErrorKind::BadFlag: return "BadFlag";
    case PolicyErrorKind::BadReport: return "BadReport";
  }
  return "?";
}

PolicyError::PolicyError(PolicyErrorKind kind, std::string directive, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) +
                         (directive.empty() ? "" : "(" + directive + ")") + ": " + detail),
      kind_(kind),
      directive_(std::move(directive)) {}

bool is_report_address(std::string_view s) {
  const auto at = s.find('@');
  if (at == std::string_view::npos || at == 0 || at + 1 == s.size()) return false;
  if (s.find('@', at + 1) != std::string_view::npos) return false;
  return std::none_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == ';' || c == '=' || c == '"' ||
           static_cast<unsigned char>(c) < 0x20;
  });
}

PolicyRecord parse_policy(std::string_view txt_value) {
  const auto pairs = split_pairs(txt_value);

  // Identify the record first: anything without name=DSTC is some other TXT
  // value and must be ignored rather than reported as malformed.
  const auto is_dstc_name = [](const Pair& p) {
    return p.key == "name" && p.value && *p.value == kPolicyName;
  };
  if (std::none_of(pairs.begin(), pairs.end(), is_dstc_name)) {
    throw PolicyError(PolicyErrorKind::NotDstc, "name", "TXT value is not a DSTC record");
  }

  std::array<std::optional<std::string_view>, kDirectives.size()> values;
  for (const auto& p : pairs) {
    const auto it = std::find(kDirectives.begin(), kDirectives.end(), p.key);
    if (it == kDirectives.end() || !p.value) {
      throw PolicyError(PolicyErrorKind::UnknownDirective, std::string(p.key),
                        "unrecognized directive");
    }
    auto& slot = values[static_cast<std::size_t>(it - kDirectives.begin())];
    if (slot) {
      throw PolicyError(PolicyErrorKind::DuplicateDirective, std::string(p.key),
                        "directive appears more than once");
    }
    slot = *p.value;
  }
  for (std::size_t i = 0; i < kDirectives.size(); ++i) {
    if (!values[i]) {
      throw PolicyError(PolicyErrorKind::MissingDirective, std::string(kDirectives[i]),
                        "required directive absent");
    }
  }

  PolicyRecord rec;
  rec.name = std::string(*values[0]);
  rec.valid_from = parse_date("validFrom", *values[1]);
  rec.valid_to = parse_date("validTo", *values[2]);
  if (rec.valid_from > rec.valid_to) {
    throw PolicyError(PolicyErrorKind::MalformedDate, "validTo", "validFrom is after validTo");
  }
  if (*values[3] != kStrictConfig) {
    throw PolicyError(PolicyErrorKind::UnknownTlsLevel, "tlsLevel",
                      "unsupported level '" + std::string(*values[3]) + "'");
  }
  rec.tls_level = std::string(*values[3]);
  rec.include_sub_domain = parse_flag("includeSubDomain", *values[4]);
  rec.revoke = parse_flag("revoke", *values[5]);
  if (!is_report_address(*values[6])) {
    throw PolicyError(PolicyErrorKind::BadReport, "report",
                      "expected local@domain, got '" + std::string(*values[6]) + "'");
  }
  rec.report = std::string(*values[6]);
  return rec;
}

std::string serialize_policy(const PolicyRecord& p) {
  std::string out;
  out.reserve(128);
  out += "name=" + p.name;
  out += "; validFrom=" + p.valid_from.to_string();
  out += "; validTo=" + p.valid_to.to_string();
  out += "; tlsLevel=" + p.tls_level;
  out += "; includeSubDomain=";
  out += p.include_sub_domain ? '1' : '0';
  out += "; revoke=";
  out += p.revoke ? '1' : '0';
  out += "; report=" + p.report;
  return out;
}

std::string_view to_string(PolicyStatus s) {
  switch (s) {
    case PolicyStatus::Active: return "Active";
    case PolicyStatus::NotYetValid: return "NotYetValid";
    case PolicyStatus::Expired: return "Expired";
  }
  return "?";
}

PolicyStatus policy_status(const PolicyRecord& p, Date now) {
  if (now < p.valid_from) return PolicyStatus::NotYetValid;
  if (now > p.valid_to) return PolicyStatus::Expired;
  return PolicyStatus::Active;
}

}  // namespace dstc
