#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dstc/ciphersuite.hpp"
#include "dstc/policy.hpp"
#include "dstc/policy_store.hpp"
#include "dstc/signed_dns.hpp"

namespace dstc {

enum class PolicyMode { Strict, Default };

enum class DecisionReason {
  OK,
  NoRecord,
  InvalidSignature,
  SignatureExpired,
  PolicyExpired,
  PolicyNotYetValid,
  Malformed,
  AmbiguousRecords,
  Revoked,
  DropAlarm,
};

std::string_view to_string(PolicyMode m);
std::string_view to_string(DecisionReason r);

// Reasons that point at an active attacker rather than a plain absence.
bool is_attack_signal(DecisionReason r);

struct PolicyDecision {
  PolicyMode mode = PolicyMode::Default;
  DecisionReason reason = DecisionReason::NoRecord;
  std::optional<std::string> report_address;
  // Diagnostics; never consulted by apply().
  std::optional<StoreAction> store_action;
  std::optional<std::string> governing_domain;

  friend bool operator==(const PolicyDecision&, const PolicyDecision&) = default;
};

struct ClientCapabilities {
  ProtocolVersion latest_version = ProtocolVersion::TLS1_2;
  ProtocolVersion version_floor = ProtocolVersion::TLS1_0;
  std::vector<std::string> suite_list = default_client_suites();

  // Throws std::invalid_argument when floor > latest or no suite is FS+AE.
  void validate() const;
};

struct EffectiveTlsConfig {
  std::vector<ProtocolVersion> versions;  // offer order: highest first
  std::vector<std::string> ciphersuites;
  bool fallback_enabled = true;

  friend bool operator==(const EffectiveTlsConfig&, const EffectiveTlsConfig&) = default;
};

class NoStrongSuites : public std::runtime_error {
public:
  NoStrongSuites() : std::runtime_error("NoStrongSuites: strict filtering left no FS+AE suite") {}
};

// Query result -> verify -> parse -> status -> store. Strict/OK only when every
// check passes; Strict/DropAlarm when a stored policy outlives a missing or
// unusable record; Default with the first failing reason otherwise.
PolicyDecision decide(const DnsResponse& response, const TrustAnchors& anchors, PolicyStore& store,
                      std::string_view domain, Date now);

// Depends only on decision.mode and caps.
EffectiveTlsConfig apply(const PolicyDecision& decision, const ClientCapabilities& caps);

std::string format_report_line(const PolicyDecision& decision, std::string_view domain);

}  // namespace dstc
