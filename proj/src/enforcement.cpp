#include "dstc/enforcement.hpp"

#include <algorithm>

namespace dstc {

std::string_view to_string(PolicyMode m) { return m == PolicyMode::Strict ? "Strict" : "Default"; }

std::string_view to_string(DecisionReason r) {
  switch (r) {
    case DecisionReason::OK: return "OK";
    case DecisionReason::NoRecord: return "NoRecord";
    case DecisionReason::InvalidSignature: return "InvalidSignature";
    case DecisionReason::SignatureExpired: return "SignatureExpired";
    case DecisionReason::PolicyExpired: return "PolicyExpired";
    case DecisionReason::PolicyNotYetValid: return "PolicyNotYetValid";
    case DecisionReason::Malformed: return "Malformed";
    case DecisionReason::AmbiguousRecords: return "AmbiguousRecords";
    case DecisionReason::Revoked: return "Revoked";
    case DecisionReason::DropAlarm: return "DropAlarm";
  }
  return "?";
}

bool is_attack_signal(DecisionReason r) {
  return r == DecisionReason::InvalidSignature || r == DecisionReason::DropAlarm ||
         r == DecisionReason::AmbiguousRecords;
}

void ClientCapabilities::validate() const {
  if (version_floor > latest_version) throw std::invalid_argument("version floor above latest");
  if (std::none_of(suite_list.begin(), suite_list.end(), [](const auto& s) { return is_strong(s); })) {
    throw std::invalid_argument("client suite list has no FS+AE suite");
  }
}

namespace {

PolicyDecision strict(DecisionReason reason, const StoredPolicy& governing, std::optional<StoreAction> act) {
  return {PolicyMode::Strict, reason, governing.record.report, act, governing.domain};
}

PolicyDecision fallback_default(DecisionReason reason, std::optional<std::string> report,
                                std::optional<StoreAction> act) {
  return {PolicyMode::Default, reason, std::move(report), act, std::nullopt};
}

}  // namespace

PolicyDecision decide(const DnsResponse& response, const TrustAnchors& anchors, PolicyStore& store,
                      std::string_view domain_in, Date now) {
  const auto domain = normalize_name(domain_in);

  // No usable record for `domain`: the stored copy (own or inherited) decides.
  const auto unusable = [&](DecisionReason reason, std::optional<std::string> report) {
    const auto act = store.observe_absence(domain, response.disposition, now);
    if (act == StoreAction::DropAlarm) {
      return strict(DecisionReason::DropAlarm, *store.entry(domain), act);
    }
    if (auto inherited = store.lookup(domain, now)) {
      const bool plain_absence = reason == DecisionReason::NoRecord;
      return strict(plain_absence ? DecisionReason::OK : DecisionReason::DropAlarm, *inherited, act);
    }
    return fallback_default(reason, std::move(report), act);
  };

  if (response.disposition != Disposition::Answered || !response.rrset) {
    return unusable(DecisionReason::NoRecord, std::nullopt);
  }
  const auto& rr = *response.rrset;
  if (normalize_name(rr.owner_name) != domain) {
    return unusable(DecisionReason::InvalidSignature, std::nullopt);
  }
  const PublicKey* key = anchors.find(domain, rr.key_id);
  if (key == nullptr) return unusable(DecisionReason::InvalidSignature, std::nullopt);
  switch (verify_rrset(*key, rr, now)) {
    case VerifyResult::Valid: break;
    case VerifyResult::SignatureExpired: return unusable(DecisionReason::SignatureExpired, std::nullopt);
    case VerifyResult::InvalidSignature:
    case VerifyResult::SignatureNotYetValid:
      return unusable(DecisionReason::InvalidSignature, std::nullopt);
  }

  std::vector<PolicyRecord> records;
  std::size_t dstc_values = 0;
  bool malformed = false;
  for (const auto& v : rr.values) {
    try {
      records.push_back(parse_policy(v));
      ++dstc_values;
    } catch (const PolicyError& e) {
      if (e.kind() == PolicyErrorKind::NotDstc) continue;
      ++dstc_values;
      malformed = true;
    }
  }
  if (dstc_values > 1) return unusable(DecisionReason::AmbiguousRecords, std::nullopt);
  if (dstc_values == 0) return unusable(DecisionReason::NoRecord, std::nullopt);
  if (malformed) return unusable(DecisionReason::Malformed, std::nullopt);

  const auto& rec = records.front();
  switch (policy_status(rec, now)) {
    case PolicyStatus::Active: break;
    case PolicyStatus::Expired: return unusable(DecisionReason::PolicyExpired, rec.report);
    case PolicyStatus::NotYetValid: return unusable(DecisionReason::PolicyNotYetValid, rec.report);
  }

  const auto act = store.update(domain, rec, now);
  switch (act) {
    case StoreAction::StoredNew:
    case StoreAction::Replaced:
    case StoreAction::Unchanged:
      if (rec.revoke) return fallback_default(DecisionReason::Revoked, rec.report, act);
      return strict(DecisionReason::OK, *store.entry(domain), act);
    case StoreAction::RevokedDeleted:
      return fallback_default(DecisionReason::Revoked, rec.report, act);
    case StoreAction::RejectedStale:
      // A replayed older record: whatever the store already trusts governs.
      if (auto governing = store.lookup(domain, now)) return strict(DecisionReason::OK, *governing, act);
      return fallback_default(DecisionReason::Revoked, rec.report, act);
    case StoreAction::DropAlarm:
      break;
  }
  return fallback_default(DecisionReason::Malformed, std::nullopt, act);
}

EffectiveTlsConfig apply(const PolicyDecision& decision, const ClientCapabilities& caps) {
  EffectiveTlsConfig cfg;
  if (decision.mode == PolicyMode::Strict) {
    cfg.versions = {caps.latest_version};
    std::copy_if(caps.suite_list.begin(), caps.suite_list.end(), std::back_inserter(cfg.ciphersuites),
                 [](const std::string& s) { return is_strong(s); });
    if (cfg.ciphersuites.empty()) throw NoStrongSuites();
    cfg.fallback_enabled = false;
    return cfg;
  }
  for (auto it = std::rbegin(kAllVersions); it != std::rend(kAllVersions); ++it) {
    if (*it <= caps.latest_version && *it >= caps.version_floor) cfg.versions.push_back(*it);
  }
  cfg.ciphersuites = caps.suite_list;
  cfg.fallback_enabled = true;
  return cfg;
}

std::string format_report_line(const PolicyDecision& decision, std::string_view domain) {
  if (!decision.report_address || !is_attack_signal(decision.reason)) return {};
  return "REPORT to=" + *decision.report_address + " domain=" + normalize_name(domain) +
         " reason=" + std::string(to_string(decision.reason));
}

}  // namespace dstc
