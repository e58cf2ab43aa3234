#include "dstc/handshake_sim.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

namespace dstc {

namespace {

bool contains(const std::vector<ProtocolVersion>& vs, ProtocolVersion v) {
  return std::find(vs.begin(), vs.end(), v) != vs.end();
}

bool contains(const std::vector<std::string>& ss, std::string_view s) {
  return std::find(ss.begin(), ss.end(), s) != ss.end();
}

std::string vstr(ProtocolVersion v) { return std::string(to_string(v)); }

std::optional<std::string> pick_suite(const ServerProfile& server, const std::vector<std::string>& offered) {
  for (const auto& s : server.suite_preference) {
    if (contains(offered, s)) return s;
  }
  return std::nullopt;
}

class Transcript {
public:
  explicit Transcript(HandshakeOutcome& out) : out_(out) {}
  void add(TranscriptEvent::Kind k, std::string detail) { out_.transcript.push_back({k, std::move(detail)}); }

  HandshakeOutcome& finish(HandshakeResult r, std::string reason) {
    add(TranscriptEvent::Kind::Abort, std::string(to_string(r)) + ": " + reason);
    out_.result = r;
    out_.abort_reason = std::move(reason);
    return out_;
  }

private:
  HandshakeOutcome& out_;
};

}  // namespace

AttackerStrategy AttackerStrategy::drop(int n) {
  if (n < 1) throw std::invalid_argument("DropClientHello needs a count >= 1");
  return {Kind::DropClientHello, n, ProtocolVersion::TLS1_0};
}

std::optional<AttackerStrategy> AttackerStrategy::parse(std::string_view spec) {
  if (spec == "none") return none();
  if (spec == "fragment") return fragment();
  if (spec.starts_with("drop:")) {
    int n = 0;
    const auto digits = spec.substr(5);
    const auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec != std::errc{} || p != digits.data() + digits.size() || n < 1) return std::nullopt;
    return drop(n);
  }
  if (spec.starts_with("modver:")) {
    const auto v = parse_version(spec.substr(7));
    if (!v) return std::nullopt;
    return modify_version(*v);
  }
  return std::nullopt;
}

std::string AttackerStrategy::to_string() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::DropClientHello: return "drop:" + std::to_string(drop_count);
    case Kind::FragmentClientHello: return "fragment";
    case Kind::ModifyClientHelloVersion: return "modver:" + vstr(target_version);
  }
  return "?";
}

std::optional<Selection> negotiate(const ServerProfile& server, ProtocolVersion offered_version,
                                   const std::vector<std::string>& offered_suites) {
  if (server.supported_versions.empty()) return std::nullopt;
  const auto server_max = *std::max_element(server.supported_versions.begin(), server.supported_versions.end());
  const auto version = std::min(offered_version, server_max);
  if (!contains(server.supported_versions, version)) return std::nullopt;
  auto suite = pick_suite(server, offered_suites);
  if (!suite) return std::nullopt;
  return Selection{version, std::move(*suite)};
}

std::string_view to_string(HandshakeResult r) {
  switch (r) {
    case HandshakeResult::Established: return "Established";
    case HandshakeResult::AbortedByClient: return "AbortedByClient";
    case HandshakeResult::AbortedByServer: return "AbortedByServer";
    case HandshakeResult::Exhausted: return "Exhausted";
  }
  return "?";
}

std::string_view to_string(TranscriptEvent::Kind k) {
  using K = TranscriptEvent::Kind;
  switch (k) {
    case K::HelloOffered: return "C->M ClientHello";
    case K::HelloDropped: return "M    drop ClientHello";
    case K::HelloModified: return "M->S ClientHello'";
    case K::HelloFragmented: return "M->S fragmented ClientHello";
    case K::Retry: return "C    retry";
    case K::Fallback: return "C    fallback";
    case K::ServerHello: return "S->C ServerHello";
    case K::ServerAlert: return "S->C alert";
    case K::Abort: return "--   abort";
    case K::Established: return "--   established";
  }
  return "?";
}

std::string HandshakeOutcome::transcript_text() const {
  std::string out;
  for (std::size_t i = 0; i < transcript.size(); ++i) {
    out += std::to_string(i + 1) + ". " + std::string(to_string(transcript[i].kind));
    if (!transcript[i].detail.empty()) out += " (" + transcript[i].detail + ")";
    out += '\n';
  }
  return out;
}

HandshakeOutcome run_handshake(const EffectiveTlsConfig& client, const ServerProfile& server,
                               const AttackerStrategy& attacker) {
  using K = TranscriptEvent::Kind;
  HandshakeOutcome out;
  Transcript log(out);
  if (client.versions.empty()) return log.finish(HandshakeResult::Exhausted, "client offers no version");

  std::size_t version_index = 0;
  int drops_done = 0;
  int retries = 0;
  while (true) {
    const auto offer = client.versions[version_index];
    log.add(K::HelloOffered, "version=" + vstr(offer) + " suites=" + std::to_string(client.ciphersuites.size()));

    auto server_sees = offer;
    bool fragmented = false;
    switch (attacker.kind) {
      case AttackerStrategy::Kind::None: break;
      case AttackerStrategy::Kind::DropClientHello:
        if (drops_done < attacker.drop_count) {
          ++drops_done;
          log.add(K::HelloDropped, "version=" + vstr(offer) + " drop " + std::to_string(drops_done) + "/" +
                                       std::to_string(attacker.drop_count));
          if (client.fallback_enabled) {
            if (version_index + 1 >= client.versions.size()) {
              return log.finish(HandshakeResult::Exhausted, "no lower version left to fall back to");
            }
            ++version_index;
            log.add(K::Fallback, vstr(offer) + " -> " + vstr(client.versions[version_index]));
            continue;
          }
          if (retries < kStrictRetryBudget) {
            ++retries;
            log.add(K::Retry, "version=" + vstr(offer) + " (fallback disabled)");
            continue;
          }
          return log.finish(HandshakeResult::AbortedByClient, "NoFallback: ClientHello unanswered");
        }
        break;
      case AttackerStrategy::Kind::FragmentClientHello:
        fragmented = true;
        log.add(K::HelloFragmented, "version=" + vstr(offer));
        break;
      case AttackerStrategy::Kind::ModifyClientHelloVersion:
        server_sees = attacker.target_version;
        log.add(K::HelloModified, "version " + vstr(offer) + " -> " + vstr(server_sees));
        break;
    }

    std::optional<Selection> selection;
    if (fragmented && server.fragmentation_bug) {
      if (contains(server.supported_versions, ProtocolVersion::TLS1_0)) {
        if (auto suite = pick_suite(server, client.ciphersuites)) {
          selection = Selection{ProtocolVersion::TLS1_0, std::move(*suite)};
        }
      }
    } else {
      selection = negotiate(server, server_sees, client.ciphersuites);
    }

    if (!selection) {
      log.add(K::ServerAlert, "handshake_failure: no common version or ciphersuite");
      // A strict client treats a registered domain failing to meet the policy
      // as a detected attack; a default client just reports the failure.
      if (!client.fallback_enabled) {
        return log.finish(HandshakeResult::AbortedByClient, "PolicyNotMet: server refused strict offer");
      }
      return log.finish(HandshakeResult::AbortedByServer, "server refused the offer");
    }

    log.add(K::ServerHello, "version=" + vstr(selection->version) + " suite=" + selection->suite);
    if (selection->version > offer) {
      return log.finish(HandshakeResult::AbortedByClient, "VersionAboveOffer");
    }
    if (!contains(client.versions, selection->version)) {
      return log.finish(HandshakeResult::AbortedByClient,
                        client.fallback_enabled ? "VersionNotSupported" : "VersionBelowOffer");
    }
    if (!contains(client.ciphersuites, selection->suite)) {
      return log.finish(HandshakeResult::AbortedByClient, "SuiteNotOffered");
    }
    out.result = HandshakeResult::Established;
    out.negotiated_version = selection->version;
    out.negotiated_suite = selection->suite;
    log.add(K::Established, vstr(selection->version) + " " + selection->suite);
    return out;
  }
}

std::string_view to_string(ExpectedResult e) {
  switch (e) {
    case ExpectedResult::Established: return "established";
    case ExpectedResult::Aborted: return "aborted";
    case ExpectedResult::Exhausted: return "exhausted";
  }
  return "?";
}

bool matches(ExpectedResult expected, HandshakeResult actual) {
  switch (expected) {
    case ExpectedResult::Established: return actual == HandshakeResult::Established;
    case ExpectedResult::Aborted:
      return actual == HandshakeResult::AbortedByClient || actual == HandshakeResult::AbortedByServer;
    case ExpectedResult::Exhausted: return actual == HandshakeResult::Exhausted;
  }
  return false;
}

bool ScenarioReport::all_passed() const {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
}

std::size_t ScenarioReport::passed_count() const {
  return static_cast<std::size_t>(std::count_if(results.begin(), results.end(), [](const auto& r) { return r.passed; }));
}

std::string ScenarioReport::to_text(bool with_transcripts) const {
  std::ostringstream out;
  out << "suite " << suite_name << ": " << passed_count() << "/" << results.size() << " passed\n";
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.summary << '\n';
    if (with_transcripts) {
      std::istringstream lines(r.outcome.transcript_text());
      std::string line;
      while (std::getline(lines, line)) out << "    " << line << '\n';
    }
  }
  return out.str();
}

ScenarioReport run_scenario_suite(std::string suite_name, const std::vector<Scenario>& scenarios) {
  std::set<std::string> names;
  for (const auto& s : scenarios) {
    if (!names.insert(s.name).second) throw ScenarioError("duplicate scenario name '" + s.name + "'");
  }
  ScenarioReport report{std::move(suite_name), {}};
  for (const auto& s : scenarios) {
    ScenarioResult r;
    r.name = s.name;
    r.outcome = run_handshake(s.client, s.server, s.attacker);
    r.passed = matches(s.expect, r.outcome.result);
    if (s.expect_version && r.outcome.negotiated_version != s.expect_version) r.passed = false;
    r.summary = "client=" + s.client_label + " server=" + s.server.name + " attack=" + s.attacker.to_string() +
                " expect=" + std::string(to_string(s.expect));
    if (s.expect_version) r.summary += "@" + vstr(*s.expect_version);
    r.summary += " got=" + std::string(to_string(r.outcome.result));
    if (r.outcome.negotiated_version) r.summary += "@" + vstr(*r.outcome.negotiated_version);
    report.results.push_back(std::move(r));
  }
  return report;
}

namespace {

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  while (!s.empty()) {
    const auto p = s.find(',');
    if (p != 0) out.emplace_back(s.substr(0, p));
    if (p == std::string_view::npos) break;
    s.remove_prefix(p + 1);
  }
  return out;
}

}  // namespace

std::vector<Scenario> parse_scenario_file(std::string_view text, const ClientCapabilities& caps) {
  std::map<std::string, ServerProfile> profiles;
  struct Pending {
    std::size_t line_no;
    std::vector<std::string> tok;
  };
  std::vector<Pending> pending;

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  const auto fail = [&](std::size_t ln, const std::string& msg) {
    return ScenarioError("scenario line " + std::to_string(ln) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty() || tok[0].front() == '#') continue;
    if (tok[0] == "PROFILE") {
      const bool fragbug = tok.size() == 7 && tok[6] == "FRAGBUG";
      if ((tok.size() != 6 && !fragbug) || tok[2] != "VERSIONS" || tok[4] != "SUITES") {
        throw fail(line_no, "expected PROFILE <name> VERSIONS <list> SUITES <list> [FRAGBUG]");
      }
      ServerProfile p;
      p.name = tok[1];
      for (const auto& v : split_list(tok[3])) {
        const auto pv = parse_version(v);
        if (!pv) throw fail(line_no, "unknown version '" + v + "'");
        p.supported_versions.push_back(*pv);
      }
      p.suite_preference = split_list(tok[5]);
      p.fragmentation_bug = fragbug;
      if (p.supported_versions.empty() || p.suite_preference.empty()) {
        throw fail(line_no, "profile needs at least one version and one suite");
      }
      if (!profiles.emplace(p.name, p).second) throw fail(line_no, "duplicate profile '" + p.name + "'");
    } else if (tok[0] == "SCENARIO") {
      pending.push_back({line_no, std::move(tok)});
    } else {
      throw fail(line_no, "unknown directive '" + tok[0] + "'");
    }
  }

  const auto strict_cfg = apply(PolicyDecision{PolicyMode::Strict, DecisionReason::OK, {}, {}, {}}, caps);
  const auto default_cfg = apply(PolicyDecision{PolicyMode::Default, DecisionReason::NoRecord, {}, {}, {}}, caps);
  std::vector<Scenario> out;
  for (const auto& [ln, tok] : pending) {
    if (tok.size() != 10 || tok[2] != "CLIENT" || tok[4] != "SERVER" || tok[6] != "ATTACK" || tok[8] != "EXPECT") {
      throw fail(ln, "expected SCENARIO <name> CLIENT <strict|default> SERVER <profile> ATTACK <spec> EXPECT <result>");
    }
    Scenario s;
    s.name = tok[1];
    if (tok[3] == "strict") {
      s.client = strict_cfg;
    } else if (tok[3] == "default") {
      s.client = default_cfg;
    } else {
      throw fail(ln, "client must be strict or default");
    }
    s.client_label = tok[3];
    if (const auto it = profiles.find(tok[5]); it != profiles.end()) {
      s.server = it->second;
    } else {
      const auto builtins = builtin_profiles();
      const auto b = std::find_if(builtins.begin(), builtins.end(), [&](const auto& p) { return p.name == tok[5]; });
      if (b == builtins.end()) {
        throw ScenarioError("UnknownScenarioReference: scenario '" + s.name + "' names undefined profile '" +
                            tok[5] + "'");
      }
      s.server = *b;
    }
    const auto attack = AttackerStrategy::parse(tok[7]);
    if (!attack) throw fail(ln, "bad attack '" + tok[7] + "'");
    s.attacker = *attack;
    if (tok[9] == "established") {
      s.expect = ExpectedResult::Established;
    } else if (tok[9] == "aborted") {
      s.expect = ExpectedResult::Aborted;
    } else if (tok[9] == "exhausted") {
      s.expect = ExpectedResult::Exhausted;
    } else {
      throw fail(ln, "bad expectation '" + tok[9] + "'");
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ServerProfile> builtin_profiles() {
  using V = ProtocolVersion;
  const std::vector<std::string> mixed = {
      "ECDHE-RSA-AES128-GCM-SHA256", "ECDHE-RSA-AES256-GCM-SHA384", "ECDHE-RSA-AES128-SHA",
      "ECDHE-RSA-AES256-SHA",        "AES128-SHA",                  "AES256-SHA",
  };
  return {
      {"modern12", {V::TLS1_2}, {"ECDHE-RSA-AES128-GCM-SHA256", "ECDHE-RSA-CHACHA20-POLY1305", "ECDHE-RSA-AES256-GCM-SHA384"}, false},
      {"legacy10", {V::TLS1_0}, {"ECDHE-RSA-AES128-SHA", "AES128-SHA", "AES256-SHA"}, false},
      {"legacy11", {V::TLS1_1}, {"ECDHE-RSA-AES256-SHA", "AES256-SHA", "AES128-SHA"}, false},
      {"poodle", {V::SSLv3, V::TLS1_0, V::TLS1_1, V::TLS1_2}, mixed, false},
      {"fragbug", {V::TLS1_0, V::TLS1_1, V::TLS1_2}, mixed, true},
      {"mixed12", {V::TLS1_0, V::TLS1_1, V::TLS1_2}, mixed, false},
      {"weak12", {V::TLS1_2}, {"AES128-SHA", "ECDHE-RSA-AES128-SHA"}, false},
  };
}

std::vector<AttackerStrategy> attacker_catalogue() {
  using V = ProtocolVersion;
  return {
      AttackerStrategy::none(),          AttackerStrategy::drop(1),
      AttackerStrategy::drop(2),         AttackerStrategy::drop(3),
      AttackerStrategy::drop(5),         AttackerStrategy::fragment(),
      AttackerStrategy::modify_version(V::TLS1_2), AttackerStrategy::modify_version(V::TLS1_1),
      AttackerStrategy::modify_version(V::TLS1_0), AttackerStrategy::modify_version(V::SSLv3),
  };
}

namespace {

ServerProfile profile_named(std::string_view name) {
  for (auto& p : builtin_profiles()) {
    if (p.name == name) return p;
  }
  throw ScenarioError("UnknownScenarioReference: no built-in profile '" + std::string(name) + "'");
}

Scenario make(std::string name, bool strict_client, const ClientCapabilities& caps, std::string_view profile,
              AttackerStrategy attack, ExpectedResult expect, std::optional<ProtocolVersion> version = std::nullopt) {
  Scenario s;
  s.name = std::move(name);
  s.client_label = strict_client ? "strict" : "default";
  s.client = apply(strict_client ? PolicyDecision{PolicyMode::Strict, DecisionReason::OK, {}, {}, {}}
                                 : PolicyDecision{PolicyMode::Default, DecisionReason::NoRecord, {}, {}, {}},
                   caps);
  s.server = profile_named(profile);
  s.attacker = attack;
  s.expect = expect;
  s.expect_version = version;
  return s;
}

}  // namespace

std::vector<Scenario> poodle_scenarios(const ClientCapabilities& caps) {
  using E = ExpectedResult;
  return {
      make("poodle-default-downgraded", false, caps, "poodle", AttackerStrategy::drop(2), E::Established,
           ProtocolVersion::TLS1_0),
      make("poodle-strict-detected", true, caps, "poodle", AttackerStrategy::drop(2), E::Aborted),
      make("poodle-default-exhausted", false, caps, "poodle", AttackerStrategy::drop(3), E::Exhausted),
      make("poodle-strict-single-loss", true, caps, "poodle", AttackerStrategy::drop(1), E::Established,
           ProtocolVersion::TLS1_2),
  };
}

std::vector<Scenario> fragment_scenarios(const ClientCapabilities& caps) {
  using E = ExpectedResult;
  return {
      make("fragment-default-downgraded", false, caps, "fragbug", AttackerStrategy::fragment(), E::Established,
           ProtocolVersion::TLS1_0),
      make("fragment-strict-detected", true, caps, "fragbug", AttackerStrategy::fragment(), E::Aborted),
      make("fragment-default-patched-server", false, caps, "mixed12", AttackerStrategy::fragment(),
           E::Established, ProtocolVersion::TLS1_2),
  };
}

}  // namespace dstc
