#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dstc/ciphersuite.hpp"
#include "dstc/enforcement.hpp"

namespace dstc {

struct ServerProfile {
  std::string name;
  std::vector<ProtocolVersion> supported_versions;
  std::vector<std::string> suite_preference;
  // A fragmented ClientHello makes this server answer with TLS 1.0.
  bool fragmentation_bug = false;
};

struct AttackerStrategy {
  enum class Kind { None, DropClientHello, FragmentClientHello, ModifyClientHelloVersion };

  Kind kind = Kind::None;
  int drop_count = 0;  // DropClientHello: >= 1
  ProtocolVersion target_version = ProtocolVersion::TLS1_0;

  static AttackerStrategy none() { return {}; }
  static AttackerStrategy drop(int n);  // throws std::invalid_argument for n < 1
  static AttackerStrategy fragment() { return {Kind::FragmentClientHello, 0, ProtocolVersion::TLS1_0}; }
  static AttackerStrategy modify_version(ProtocolVersion v) {
    return {Kind::ModifyClientHelloVersion, 0, v};
  }

  // "none", "drop:N", "fragment", "modver:V".
  static std::optional<AttackerStrategy> parse(std::string_view spec);
  std::string to_string() const;

  friend bool operator==(const AttackerStrategy&, const AttackerStrategy&) = default;
};

struct Selection {
  ProtocolVersion version;
  std::string suite;
};

// Pre-1.3 single-value offer: the server answers min(offer, its max) when it
// supports that version and picks its most preferred suite the client offered.
std::optional<Selection> negotiate(const ServerProfile& server, ProtocolVersion offered_version,
                                   const std::vector<std::string>& offered_suites);

enum class HandshakeResult { Established, AbortedByClient, AbortedByServer, Exhausted };

std::string_view to_string(HandshakeResult r);

struct TranscriptEvent {
  enum class Kind {
    HelloOffered,
    HelloDropped,
    HelloModified,
    HelloFragmented,
    Retry,
    Fallback,
    ServerHello,
    ServerAlert,
    Abort,
    Established,
  };
  Kind kind;
  std::string detail;

  friend bool operator==(const TranscriptEvent&, const TranscriptEvent&) = default;
};

std::string_view to_string(TranscriptEvent::Kind k);

struct HandshakeOutcome {
  HandshakeResult result = HandshakeResult::AbortedByServer;
  std::optional<ProtocolVersion> negotiated_version;
  std::optional<std::string> negotiated_suite;
  std::optional<std::string> abort_reason;
  std::vector<TranscriptEvent> transcript;

  std::string transcript_text() const;  // one event per line
};

// A fallback-disabled client retries an unanswered offer this many times at the
// same version before giving up.
inline constexpr int kStrictRetryBudget = 1;

HandshakeOutcome run_handshake(const EffectiveTlsConfig& client, const ServerProfile& server,
                               const AttackerStrategy& attacker);

enum class ExpectedResult { Established, Aborted, Exhausted };

std::string_view to_string(ExpectedResult e);
bool matches(ExpectedResult expected, HandshakeResult actual);

struct Scenario {
  std::string name;
  std::string client_label;  // "strict" / "default"
  EffectiveTlsConfig client;
  ServerProfile server;
  AttackerStrategy attacker;
  ExpectedResult expect = ExpectedResult::Established;
  // Optional exact version check for the established case.
  std::optional<ProtocolVersion> expect_version;
};

struct ScenarioResult {
  std::string name;
  HandshakeOutcome outcome;
  bool passed = false;
  std::string summary;
};

struct ScenarioReport {
  std::string suite_name;
  std::vector<ScenarioResult> results;

  bool all_passed() const;
  std::size_t passed_count() const;
  std::string to_text(bool with_transcripts) const;
};

class ScenarioError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Throws ScenarioError on duplicate scenario names.
ScenarioReport run_scenario_suite(std::string suite_name, const std::vector<Scenario>& scenarios);

// Line-oriented scenario file; PROFILE lines define servers referenced by
// SCENARIO lines; names not defined in the file resolve to builtin_profiles().
// Throws ScenarioError("UnknownScenarioReference ...") for an
// undefined profile and ScenarioError for syntax errors.
std::vector<Scenario> parse_scenario_file(std::string_view text, const ClientCapabilities& caps = {});

// Built-in server catalogue used by the downgrade suites and property tests.
std::vector<ServerProfile> builtin_profiles();
std::vector<AttackerStrategy> attacker_catalogue();

std::vector<Scenario> poodle_scenarios(const ClientCapabilities& caps = {});
std::vector<Scenario> fragment_scenarios(const ClientCapabilities& caps = {});

}  // namespace dstc
