#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "dstc/handshake_sim.hpp"
#include "suite_fixture.hpp"

namespace dstc {
namespace {

using V = ProtocolVersion;
using K = TranscriptEvent::Kind;

const EffectiveTlsConfig& strict_client() {
  static const auto c = apply({PolicyMode::Strict, DecisionReason::OK, {}, {}, {}}, ClientCapabilities{});
  return c;
}
const EffectiveTlsConfig& default_client() {
  static const auto c = apply({PolicyMode::Default, DecisionReason::NoRecord, {}, {}, {}}, ClientCapabilities{});
  return c;
}

ServerProfile profile(const std::string& name) {
  for (auto& p : builtin_profiles()) {
    if (p.name == name) return p;
  }
  throw std::runtime_error("no profile " + name);
}

std::size_t count_kind(const HandshakeOutcome& o, K k) {
  return static_cast<std::size_t>(
      std::count_if(o.transcript.begin(), o.transcript.end(), [&](const auto& e) { return e.kind == k; }));
}

TEST(Negotiate, SingleValueOffer) {
  ServerProfile s{"s", {V::TLS1_0, V::TLS1_1, V::TLS1_2}, {"AES128-SHA", "ECDHE-RSA-AES128-GCM-SHA256"}, false};
  auto sel = negotiate(s, V::TLS1_1, {"ECDHE-RSA-AES128-GCM-SHA256", "AES128-SHA"});
  ASSERT_TRUE(sel);
  EXPECT_EQ(sel->version, V::TLS1_1);
  EXPECT_EQ(sel->suite, "AES128-SHA");  // server preference order
  ServerProfile only12{"t", {V::TLS1_2}, {"AES128-SHA"}, false};
  EXPECT_FALSE(negotiate(only12, V::TLS1_1, {"AES128-SHA"}));
  EXPECT_FALSE(negotiate(only12, V::TLS1_2, {"AES256-SHA"}));
}

TEST(Negotiate, ServerMaxBelowOffer) {
  ServerProfile legacy{"u", {V::TLS1_0}, {"AES128-SHA"}, false};
  auto sel = negotiate(legacy, V::TLS1_2, {"AES128-SHA"});
  // Pre-1.3 semantics pick min(offer, server max) when supported.
  ASSERT_TRUE(sel);
  EXPECT_EQ(sel->version, V::TLS1_0);
}

TEST(AttackerStrategy, ParseAndPrint) {
  for (const char* s : {"none", "drop:1", "drop:3", "fragment", "modver:TLS1.0", "modver:SSLv3"}) {
    const auto a = AttackerStrategy::parse(s);
    ASSERT_TRUE(a) << s;
    EXPECT_EQ(AttackerStrategy::parse(a->to_string()), a);
  }
  for (const char* s : {"", "drop", "drop:0", "drop:-1", "drop:x", "modver:9", "explode"}) {
    EXPECT_FALSE(AttackerStrategy::parse(s)) << s;
  }
  EXPECT_THROW(AttackerStrategy::drop(0), std::invalid_argument);
}

TEST(Handshake, DropAndFallbackLoop) {
  const auto o = run_handshake(default_client(), profile("poodle"), AttackerStrategy::drop(2));
  EXPECT_EQ(o.result, HandshakeResult::Established);
  EXPECT_EQ(o.negotiated_version, V::TLS1_0);
  EXPECT_EQ(count_kind(o, K::Fallback), 2u);
  EXPECT_EQ(count_kind(o, K::HelloDropped), 2u);
  // Offers step down one version per drop.
  std::vector<std::string> offers;
  for (const auto& e : o.transcript) {
    if (e.kind == K::HelloOffered) offers.push_back(e.detail.substr(0, e.detail.find(' ')));
  }
  EXPECT_EQ(offers, (std::vector<std::string>{"version=TLS1.2", "version=TLS1.1", "version=TLS1.0"}));
}

TEST(Handshake, FallbackExhaustsAtClientFloor) {
  const auto o = run_handshake(default_client(), profile("poodle"), AttackerStrategy::drop(3));
  EXPECT_EQ(o.result, HandshakeResult::Exhausted);
  EXPECT_FALSE(o.negotiated_version);
}

TEST(Handshake, StrictRetriesOnceThenAborts) {
  const auto one = run_handshake(strict_client(), profile("poodle"), AttackerStrategy::drop(1));
  EXPECT_EQ(one.result, HandshakeResult::Established);
  EXPECT_EQ(one.negotiated_version, V::TLS1_2);
  EXPECT_EQ(count_kind(one, K::Retry), 1u);
  const auto two = run_handshake(strict_client(), profile("poodle"), AttackerStrategy::drop(2));
  EXPECT_EQ(two.result, HandshakeResult::AbortedByClient);
  EXPECT_EQ(count_kind(two, K::Retry), 1u);
  EXPECT_EQ(count_kind(two, K::Fallback), 0u);
}

TEST(Handshake, FragmentedHelloAgainstBuggyServer) {
  const auto d = run_handshake(default_client(), profile("fragbug"), AttackerStrategy::fragment());
  EXPECT_EQ(d.result, HandshakeResult::Established);
  EXPECT_EQ(d.negotiated_version, V::TLS1_0);
  const auto s = run_handshake(strict_client(), profile("fragbug"), AttackerStrategy::fragment());
  EXPECT_EQ(s.result, HandshakeResult::AbortedByClient);
  EXPECT_EQ(s.abort_reason, "VersionBelowOffer");
}

TEST(Handshake, ModifiedHelloVersion) {
  const auto s = run_handshake(strict_client(), profile("poodle"), AttackerStrategy::modify_version(V::TLS1_1));
  EXPECT_EQ(s.result, HandshakeResult::AbortedByClient);
  const auto d = run_handshake(default_client(), profile("poodle"), AttackerStrategy::modify_version(V::TLS1_1));
  EXPECT_EQ(d.result, HandshakeResult::Established);
  EXPECT_EQ(d.negotiated_version, V::TLS1_1);
  const auto ssl = run_handshake(default_client(), profile("poodle"), AttackerStrategy::modify_version(V::SSLv3));
  EXPECT_NE(ssl.result, HandshakeResult::Established);  // SSLv3 is below the client floor
}

TEST(Handshake, ServerRefusal) {
  ServerProfile weak{"w", {V::TLS1_0}, {"AES128-SHA"}, false};
  EXPECT_EQ(run_handshake(strict_client(), weak, AttackerStrategy::none()).result, HandshakeResult::AbortedByClient);
  ServerProfile alien{"x", {V::TLS1_2}, {"GOST2012-GOST8912-GOST8912"}, false};
  EXPECT_EQ(run_handshake(default_client(), alien, AttackerStrategy::none()).result,
            HandshakeResult::AbortedByServer);
}

// Strict no-downgrade over the full cross-product of profiles and attackers.
TEST(HandshakeProperty, StrictNeverDowngrades) {
  std::size_t combos = 0;
  for (const auto& server : builtin_profiles()) {
    for (const auto& attacker : attacker_catalogue()) {
      SCOPED_TRACE(server.name + " / " + attacker.to_string());
      const auto o = run_handshake(strict_client(), server, attacker);
      ++combos;
      ASSERT_EQ(o.result == HandshakeResult::Established, o.negotiated_version.has_value());
      ASSERT_EQ(o.result == HandshakeResult::Established, o.negotiated_suite.has_value());
      ASSERT_NE(o.result, HandshakeResult::Exhausted);
      if (o.result == HandshakeResult::Established) {
        ASSERT_EQ(*o.negotiated_version, V::TLS1_2);
        ASSERT_EQ(testing::oracle_label(*o.negotiated_suite), SuiteLabel::FS_AE);
      } else {
        ASSERT_TRUE(o.abort_reason);
      }
      ASSERT_EQ(count_kind(o, K::Fallback), 0u);
    }
  }
  EXPECT_EQ(combos, builtin_profiles().size() * attacker_catalogue().size());
}

TEST(HandshakeProperty, DefaultClientStaysInsideItsLists) {
  for (const auto& server : builtin_profiles()) {
    for (const auto& attacker : attacker_catalogue()) {
      const auto o = run_handshake(default_client(), server, attacker);
      ASSERT_EQ(o.result == HandshakeResult::Established, o.negotiated_version.has_value());
      if (o.result == HandshakeResult::Established) {
        const auto& c = default_client();
        ASSERT_NE(std::find(c.versions.begin(), c.versions.end(), *o.negotiated_version), c.versions.end());
        ASSERT_NE(std::find(c.ciphersuites.begin(), c.ciphersuites.end(), *o.negotiated_suite),
                  c.ciphersuites.end());
      }
    }
  }
}

TEST(HandshakeProperty, DefaultReachabilityWithoutAttacker) {
  std::mt19937 rng(11);
  const auto& client = default_client();
  std::vector<std::string> pool;
  for (const auto& s : testing::labeled_suites()) pool.push_back(s.name);
  int established = 0;
  for (int i = 0; i < 3000; ++i) {
    ServerProfile s;
    s.name = "r";
    for (auto v : kAllVersions) {
      if (rng() % 2) s.supported_versions.push_back(v);
    }
    std::sample(pool.begin(), pool.end(), std::back_inserter(s.suite_preference), 1 + rng() % 8, rng);
    std::shuffle(s.suite_preference.begin(), s.suite_preference.end(), rng);
    const bool version_meets = std::any_of(s.supported_versions.begin(), s.supported_versions.end(), [&](V v) {
      return v >= V::TLS1_0 && v <= V::TLS1_2;
    });
    const bool suite_meets = std::any_of(s.suite_preference.begin(), s.suite_preference.end(), [&](const auto& x) {
      return std::find(client.ciphersuites.begin(), client.ciphersuites.end(), x) != client.ciphersuites.end();
    });
    if (!version_meets || !suite_meets) continue;
    // Single-value offers reach only the server's highest version at or below 1.2,
    // so reachability holds for servers without holes above their max.
    V top = V::SSLv3;
    for (auto v : s.supported_versions) {
      if (v <= V::TLS1_2) top = std::max(top, v);
    }
    if (top < V::TLS1_0) continue;
    const auto o = run_handshake(client, s, AttackerStrategy::none());
    ASSERT_EQ(o.result, HandshakeResult::Established) << o.transcript_text();
    ASSERT_EQ(*o.negotiated_version, top);
    ++established;
  }
  EXPECT_GT(established, 500);
}

TEST(HandshakeProperty, TranscriptsAreDeterministic) {
  for (const auto& server : builtin_profiles()) {
    for (const auto& attacker : attacker_catalogue()) {
      for (const auto* client : {&strict_client(), &default_client()}) {
        const auto a = run_handshake(*client, server, attacker);
        const auto b = run_handshake(*client, server, attacker);
        ASSERT_EQ(a.transcript, b.transcript);
        ASSERT_EQ(a.transcript_text(), b.transcript_text());
      }
    }
  }
}

TEST(ScenarioSuites, BuiltinsPass) {
  const auto poodle = run_scenario_suite("poodle", poodle_scenarios());
  EXPECT_TRUE(poodle.all_passed()) << poodle.to_text(true);
  const auto frag = run_scenario_suite("fragment", fragment_scenarios());
  EXPECT_TRUE(frag.all_passed()) << frag.to_text(true);
  const auto text = poodle.to_text(true);
  EXPECT_NE(text.find("fallback"), std::string::npos);
}

TEST(ScenarioSuites, DuplicateNamesRejected) {
  auto s = poodle_scenarios();
  s.push_back(s.front());
  EXPECT_THROW(run_scenario_suite("dup", s), ScenarioError);
}

TEST(ScenarioFile, ParsesAndRuns) {
  const std::string text =
      "# inline profiles\n"
      "PROFILE old VERSIONS SSLv3,1.0,1.1,1.2 SUITES ECDHE-RSA-AES128-GCM-SHA256,AES128-SHA\n"
      "PROFILE bug VERSIONS 1.0,1.2 SUITES ECDHE-RSA-AES128-GCM-SHA256 FRAGBUG\n"
      "SCENARIO s1 CLIENT default SERVER old ATTACK drop:2 EXPECT established\n"
      "SCENARIO s2 CLIENT strict SERVER old ATTACK drop:2 EXPECT aborted\n"
      "SCENARIO s3 CLIENT strict SERVER bug ATTACK fragment EXPECT aborted\n"
      "SCENARIO s4 CLIENT default SERVER old ATTACK drop:3 EXPECT exhausted\n"
      "SCENARIO s5 CLIENT default SERVER poodle ATTACK none EXPECT established\n";
  const auto scenarios = parse_scenario_file(text);
  ASSERT_EQ(scenarios.size(), 5u);
  EXPECT_TRUE(scenarios[2].server.fragmentation_bug);
  EXPECT_EQ(scenarios[1].client, strict_client());
  const auto report = run_scenario_suite("file", scenarios);
  EXPECT_TRUE(report.all_passed()) << report.to_text(true);
}

TEST(ScenarioFile, Errors) {
  try {
    parse_scenario_file("SCENARIO s CLIENT strict SERVER ghost ATTACK none EXPECT established\n");
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_NE(std::string(e.what()).find("UnknownScenarioReference"), std::string::npos);
  }
  for (const char* bad : {"PROFILE p VERSIONS 1.2\n", "PROFILE p VERSIONS 9.9 SUITES A\n",
                          "SCENARIO s CLIENT lax SERVER poodle ATTACK none EXPECT established\n",
                          "SCENARIO s CLIENT strict SERVER poodle ATTACK boom EXPECT established\n",
                          "SCENARIO s CLIENT strict SERVER poodle ATTACK none EXPECT maybe\n", "WHAT\n"}) {
    EXPECT_THROW(parse_scenario_file(bad), ScenarioError) << bad;
  }
}

}  // namespace
}  // namespace dstc
