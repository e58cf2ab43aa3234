#include "dstc/ciphersuite.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace dstc {

std::string_view to_string(ProtocolVersion v) {
  switch (v) {
    case ProtocolVersion::SSLv3: return "SSLv3";
    case ProtocolVersion::TLS1_0: return "TLS1.0";
    case ProtocolVersion::TLS1_1: return "TLS1.1";
    case ProtocolVersion::TLS1_2: return "TLS1.2";
  }
  return "?";
}

std::optional<ProtocolVersion> parse_version(std::string_view s) {
  std::string t;
  for (char c : s) t += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (t == "SSLV3" || t == "SSL3" || t == "SSL3.0" || t == "SSLV3.0" || t == "3.0") {
    return ProtocolVersion::SSLv3;
  }
  if (t.starts_with("TLSV")) {
    t.erase(0, 4);
  } else if (t.starts_with("TLS")) {
    t.erase(0, 3);
  }
  if (t == "1.0" || t == "1") return ProtocolVersion::TLS1_0;
  if (t == "1.1") return ProtocolVersion::TLS1_1;
  if (t == "1.2") return ProtocolVersion::TLS1_2;
  return std::nullopt;
}

std::string_view to_string(SuiteLabel l) {
  switch (l) {
    case SuiteLabel::FS_AE: return "FS+AE";
    case SuiteLabel::FS_nonAE: return "FS+nonAE";
    case SuiteLabel::nonFS_AE: return "nonFS+AE";
    case SuiteLabel::nonFS_nonAE: return "nonFS+nonAE";
  }
  return "?";
}

std::string normalize_suite_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    out += (u == '_') ? '-' : u;
  }
  if (out.starts_with("TLS-")) out.erase(0, 4);
  return out;
}

SuiteLabel classify_ciphersuite(std::string_view name) {
  const auto n = normalize_suite_name(name);
  const auto first = std::string_view(n).substr(0, n.find('-'));
  const bool fs = first == "ECDHE" || first == "DHE";
  // CCM8 is subsumed by CCM but kept to mirror the published rule list.
  static constexpr std::array<std::string_view, 4> kAeTokens = {"GCM", "CCM", "CCM8", "CHACHA20"};
  const bool ae = std::any_of(kAeTokens.begin(), kAeTokens.end(),
                              [&](std::string_view tok) { return n.find(tok) != std::string::npos; });
  if (fs) return ae ? SuiteLabel::FS_AE : SuiteLabel::FS_nonAE;
  return ae ? SuiteLabel::nonFS_AE : SuiteLabel::nonFS_nonAE;
}

const std::vector<std::string>& default_client_suites() {
  static const std::vector<std::string> suites = {
      "ECDHE-ECDSA-AES128-GCM-SHA256",
      "ECDHE-RSA-AES128-GCM-SHA256",
      "ECDHE-ECDSA-CHACHA20-POLY1305",
      "ECDHE-RSA-CHACHA20-POLY1305",
      "ECDHE-ECDSA-AES256-GCM-SHA384",
      "ECDHE-RSA-AES256-GCM-SHA384",
      "ECDHE-ECDSA-AES256-SHA",
      "ECDHE-ECDSA-AES128-SHA",
      "ECDHE-RSA-AES128-SHA",
      "ECDHE-RSA-AES256-SHA",
      "DHE-RSA-AES128-SHA",
      "DHE-RSA-AES256-SHA",
      "AES128-SHA",
      "AES256-SHA",
  };
  return suites;
}

}  // namespace dstc
