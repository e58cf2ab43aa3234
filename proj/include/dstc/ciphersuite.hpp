#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dstc {

// Wire values of the pre-1.3 ClientHello version field.
enum class ProtocolVersion : std::uint16_t {
  SSLv3 = 0x0300,
  TLS1_0 = 0x0301,
  TLS1_1 = 0x0302,
  TLS1_2 = 0x0303,
};

// Ascending.
inline constexpr ProtocolVersion kAllVersions[] = {ProtocolVersion::SSLv3, ProtocolVersion::TLS1_0,
                                                   ProtocolVersion::TLS1_1, ProtocolVersion::TLS1_2};

std::string_view to_string(ProtocolVersion v);  // "SSLv3", "TLS1.0", ...
// Accepts "1.2", "TLS1.2", "TLSv1.2", "tls1.2", "SSLv3", "ssl3", "3.0".
std::optional<ProtocolVersion> parse_version(std::string_view s);

constexpr auto operator<=>(ProtocolVersion a, ProtocolVersion b) {
  return static_cast<std::uint16_t>(a) <=> static_cast<std::uint16_t>(b);
}

enum class SuiteLabel { FS_AE, FS_nonAE, nonFS_AE, nonFS_nonAE };

std::string_view to_string(SuiteLabel l);  // "FS+AE", "FS+nonAE", ...

// Maps IANA-style names ("TLS_ECDHE_RSA_WITH_AES_128_GCM_SHA256") to the
// uppercase dash-separated scanner dialect; scanner names only get uppercased.
std::string normalize_suite_name(std::string_view name);

// FS: first token is ECDHE or DHE. AE: contains GCM, CCM, CCM8 or CHACHA20.
SuiteLabel classify_ciphersuite(std::string_view name);

inline bool is_strong(std::string_view name) { return classify_ciphersuite(name) == SuiteLabel::FS_AE; }

// 14 suites of a Firefox 60 style client without the 3DES suite, in
// preference order; six of them are FS+AE.
const std::vector<std::string>& default_client_suites();

}  // namespace dstc
