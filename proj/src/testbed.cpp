#include "dstc/testbed.hpp"

#include <algorithm>
#include <sstream>

namespace dstc {

namespace {

const Date kPolicyFrom = Date::from_ymd(2018, 5, 1);
const Date kPolicyTo = Date::from_ymd(2019, 5, 1);
const Date kSigInception = Date::from_ymd(2018, 1, 1);
const Date kSigExpiration = Date::from_ymd(2019, 12, 31);
const Date kClock = Date::from_ymd(2018, 5, 6);

constexpr const char* kSpf = "v=spf1 -all";

std::string describe(const PolicyDecision& d) {
  std::string s = std::string(to_string(d.mode)) + "/" + std::string(to_string(d.reason));
  if (d.store_action) s += " store=" + std::string(to_string(*d.store_action));
  return s;
}

}  // namespace

Testbed Testbed::create() { return create(ZoneKeyPair::generate("zsk-2018")); }

Testbed Testbed::create(ZoneKeyPair zsk) {
  Testbed bed{std::move(zsk), ZoneStore{}, TrustAnchors{}, kClock};
  bed.zone.add_record(kApex, "NS", "ns1.example");
  bed.zone.add_record(kRegisteredStrong, "A", "192.0.2.12");
  bed.zone.add_record(kRegisteredLegacy, "A", "192.0.2.10");
  bed.zone.add_record(kUnregistered, "A", "192.0.2.11");
  bed.zone.set_txt(kRegisteredStrong, {serialize_policy(bed.policy_for(kRegisteredStrong)), kSpf});
  bed.zone.set_txt(kRegisteredLegacy, {serialize_policy(bed.policy_for(kRegisteredLegacy))});
  bed.zone.sign_all(bed.zsk, kSigInception, kSigExpiration);
  bed.anchors.add(kApex, bed.zsk.key_id(), bed.zsk.public_key());
  return bed;
}

PolicyRecord Testbed::policy_for(const std::string& domain) const {
  PolicyRecord p;
  p.valid_from = kPolicyFrom;
  p.valid_to = kPolicyTo;
  p.report = "admin@" + domain;
  return p;
}

ThreeServerRun three_server_scenarios(const Testbed& bed, PolicyStore& store, const ClientCapabilities& caps) {
  using V = ProtocolVersion;
  struct Row {
    const char* domain;
    ServerProfile server;
    ExpectedResult expect;
  };
  const std::vector<Row> rows = {
      {Testbed::kRegisteredStrong,
       {Testbed::kRegisteredStrong, {V::TLS1_2}, {"ECDHE-RSA-AES128-GCM-SHA256", "ECDHE-RSA-AES256-GCM-SHA384"}, false},
       ExpectedResult::Established},
      {Testbed::kRegisteredLegacy,
       {Testbed::kRegisteredLegacy, {V::TLS1_0}, {"ECDHE-RSA-AES128-SHA", "AES128-SHA"}, false},
       ExpectedResult::Aborted},
      {Testbed::kUnregistered,
       {Testbed::kUnregistered, {V::TLS1_1}, {"ECDHE-RSA-AES256-SHA", "AES256-SHA"}, false},
       ExpectedResult::Established},
  };
  ThreeServerRun run;
  int n = 0;
  for (const auto& row : rows) {
    auto decision = decide(resolve(bed.zone, row.domain), bed.anchors, store, row.domain, bed.now);
    Scenario s;
    s.name = "table2-" + std::to_string(++n) + "-" + row.domain;
    s.client_label = decision.mode == PolicyMode::Strict ? "strict" : "default";
    s.client = apply(decision, caps);
    s.server = row.server;
    s.attacker = AttackerStrategy::none();
    s.expect = row.expect;
    run.scenarios.push_back(std::move(s));
    run.decisions.push_back(std::move(decision));
  }
  return run;
}

std::vector<ForgeryCase> run_forgery_matrix(const Testbed& bed) {
  std::vector<ForgeryCase> out;
  const std::string target = Testbed::kRegisteredStrong;
  const auto decide_now = [&](const ZoneStore& zone, PolicyStore& store, const std::string& domain, Date now) {
    return decide(resolve(zone, domain), bed.anchors, store, domain, now);
  };

  {  // add: a policy injected for a domain that never registered one
    ZoneStore zone = bed.zone;
    PolicyStore store;
    zone.attacker_inject(Testbed::kUnregistered, {serialize_policy(bed.policy_for(Testbed::kUnregistered))},
                         bed.zsk.key_id(), Bytes(256, 0x5a));
    const auto d = decide_now(zone, store, Testbed::kUnregistered, bed.now);
    const bool ok = d.mode == PolicyMode::Default && d.reason == DecisionReason::InvalidSignature &&
                    store.entries().empty();
    out.push_back({"add", "Default/InvalidSignature, nothing stored", describe(d), ok});
  }
  {  // modify: validTo pushed out by a year
    ZoneStore zone = bed.zone;
    PolicyStore store;
    auto forged = bed.policy_for(target);
    forged.valid_to = forged.valid_to.plus_days(365);
    const auto rr = *zone.rrset(target);
    const auto idx = static_cast<std::size_t>(
        std::find(rr.values.begin(), rr.values.end(), serialize_policy(bed.policy_for(target))) - rr.values.begin());
    zone.attacker_modify_value(target, idx, serialize_policy(forged));
    const auto d = decide_now(zone, store, target, bed.now);
    const bool ok = d.mode == PolicyMode::Default && d.reason == DecisionReason::InvalidSignature;
    out.push_back({"modify", "Default/InvalidSignature", describe(d), ok});
  }
  {  // delete: the DSTC value removed, SPF value and signature left in place
    ZoneStore zone = bed.zone;
    PolicyStore store;
    const auto rr = *zone.rrset(target);
    const auto idx = static_cast<std::size_t>(
        std::find(rr.values.begin(), rr.values.end(), serialize_policy(bed.policy_for(target))) - rr.values.begin());
    zone.attacker_delete_value(target, idx);
    const auto d = decide_now(zone, store, target, bed.now);
    const bool ok = d.mode == PolicyMode::Default && d.reason == DecisionReason::InvalidSignature;
    out.push_back({"delete", "Default/InvalidSignature", describe(d), ok});
  }
  {  // replay-stale: a genuinely signed but older policy after the client saw the current one
    ZoneStore zone = bed.zone;
    PolicyStore store;
    decide_now(zone, store, target, bed.now);
    auto older = bed.policy_for(target);
    older.valid_from = Date::from_ymd(2018, 1, 1);
    const auto captured = sign_rrset(bed.zsk, target, {serialize_policy(older)}, Date::from_ymd(2018, 1, 1),
                                     Date::from_ymd(2019, 12, 31));
    zone.attacker_substitute(captured);
    const auto d = decide_now(zone, store, target, bed.now);
    const auto kept = store.entry(target);
    const bool ok = d.store_action == StoreAction::RejectedStale && d.mode == PolicyMode::Strict &&
                    kept && kept->record.valid_from == bed.policy_for(target).valid_from;
    out.push_back({"replay-stale", "RejectedStale, stored policy still enforced", describe(d), ok});
  }
  {  // replay-revoked: owner revokes, attacker replays the pre-revocation record
    ZoneStore zone = bed.zone;
    PolicyStore store;
    const auto captured = *zone.rrset(target);
    decide_now(zone, store, target, bed.now);
    auto revoking = bed.policy_for(target);
    revoking.valid_from = Date::from_ymd(2018, 6, 1);
    revoking.revoke = true;
    zone.put_rrset(sign_rrset(bed.zsk, target, {serialize_policy(revoking), kSpf}, Date::from_ymd(2018, 6, 1),
                              Date::from_ymd(2019, 12, 31)));
    const auto later = Date::from_ymd(2018, 6, 2);
    const auto revoked = decide_now(zone, store, target, later);
    zone.attacker_substitute(captured);
    const auto d = decide_now(zone, store, target, later);
    const bool ok = revoked.store_action == StoreAction::RevokedDeleted &&
                    d.store_action == StoreAction::RejectedStale && d.mode == PolicyMode::Default &&
                    d.reason == DecisionReason::Revoked && !store.entry(target) && store.tombstone(target);
    out.push_back({"replay-revoked", "RevokedDeleted then tombstone RejectedStale, Default/Revoked",
                   describe(revoked) + " then " + describe(d), ok});
  }
  {  // drop: the TXT set suppressed after a clean first contact
    ZoneStore zone = bed.zone;
    PolicyStore store;
    decide_now(zone, store, target, bed.now);
    zone.attacker_drop(target);
    const auto d = decide_now(zone, store, target, bed.now.plus_days(1));
    const bool ok = d.mode == PolicyMode::Strict && d.reason == DecisionReason::DropAlarm &&
                    d.report_address == bed.policy_for(target).report;
    out.push_back({"drop", "Strict/DropAlarm with report address", describe(d), ok});
  }
  return out;
}

std::string format_forgery_report(const std::vector<ForgeryCase>& cases) {
  std::ostringstream out;
  std::size_t passed = 0;
  for (const auto& c : cases) passed += c.passed ? 1 : 0;
  out << "suite forgery: " << passed << "/" << cases.size() << " passed\n";
  for (const auto& c : cases) {
    out << (c.passed ? "PASS " : "FAIL ") << c.attack << "  expect=" << c.expected << "  got=" << c.observed << '\n';
  }
  return out.str();
}

}  // namespace dstc
