#pragma once

#include <string>
#include <vector>

#include "dstc/enforcement.hpp"
#include "dstc/handshake_sim.hpp"
#include "dstc/policy_store.hpp"
#include "dstc/signed_dns.hpp"

namespace dstc {

// Small signed zone mirroring the three-server feasibility setup:
//   tls12.example  TLS 1.2 with FS+AE suites, DSTC registered
//   tls10.example  TLS 1.0 with non-AE suites, DSTC registered
//   tls11.example  TLS 1.1 with non-AE suites, no DSTC record
struct Testbed {
  static constexpr const char* kApex = "example";
  static constexpr const char* kRegisteredStrong = "tls12.example";
  static constexpr const char* kRegisteredLegacy = "tls10.example";
  static constexpr const char* kUnregistered = "tls11.example";

  ZoneKeyPair zsk;
  ZoneStore zone;
  TrustAnchors anchors;
  Date now;

  // Policies valid 01-05-2018..01-05-2019, signatures valid through 31-12-2019,
  // clock at 06-05-2018.
  static Testbed create();
  // Same layout signed with an existing key (no key generation).
  static Testbed create(ZoneKeyPair zsk);

  PolicyRecord policy_for(const std::string& domain) const;
};

struct ThreeServerRun {
  std::vector<Scenario> scenarios;
  std::vector<PolicyDecision> decisions;
};

// Runs the DSTC pipeline for each of the three domains against `store`, then
// builds the handshake scenarios from the resulting client configurations.
ThreeServerRun three_server_scenarios(const Testbed& bed, PolicyStore& store, const ClientCapabilities& caps = {});

struct ForgeryCase {
  std::string attack;    // add, modify, delete, replay-stale, replay-revoked, drop
  std::string expected;
  std::string observed;
  bool passed = false;
};

// Each record-level attack through the zone attacker API, checked end to end
// through decide() against a fresh client store.
std::vector<ForgeryCase> run_forgery_matrix(const Testbed& bed);

std::string format_forgery_report(const std::vector<ForgeryCase>& cases);

}  // namespace dstc
