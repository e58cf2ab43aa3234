// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dstc/bench.hpp"
#include "dstc/cli.hpp"
#include "dstc/enforcement.hpp"
#include "dstc/handshake_sim.hpp"
#include "dstc/policy_store.hpp"
#include "dstc/testbed.hpp"
#include "suite_fixture.hpp"

using namespace dstc;

namespace {

struct Verdict {
  bool ok;
  std::string detail;
};

struct CliRun {
  int code;
  std::string out;
  double seconds;
};

CliRun run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const auto t0 = std::chrono::steady_clock::now();
  const int code = cli::run(args, out, err);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {code, out.str() + err.str(), s};
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Verdict three_server() {
  const auto r = run_cli({"attack-sim", "table2"});
  // Row order is tls12, tls10, tls11: established, aborted, established.
  const bool rows = contains(r.out, "PASS table2-1-tls12.example") &&
                    contains(r.out, "expect=established got=Established@TLS1.2") &&
                    contains(r.out, "PASS table2-2-tls10.example") &&
                    contains(r.out, "expect=aborted got=AbortedByClient") &&
                    contains(r.out, "PASS table2-3-tls11.example") &&
                    contains(r.out, "expect=established got=Established@TLS1.1") &&
                    contains(r.out, "suite table2: 3/3 passed");
  const bool ok = r.code == 0 && rows && r.seconds < 1.0;
  return {ok, "check/cross/check " + std::string(rows ? "reproduced" : "NOT reproduced") + " in " +
                  fmt("%.3f s", r.seconds)};
}

Verdict config_semantics() {
  std::mt19937_64 rng(20180506);
  const auto& pool = testing::labeled_suites();
  std::vector<std::string> all, strong;
  for (const auto& s : pool) {
    all.push_back(s.name);
    if (testing::oracle_label(s.name) == SuiteLabel::FS_AE) strong.push_back(s.name);
  }
  constexpr int kCases = 1000;
  int bad = 0;
  for (int i = 0; i < kCases; ++i) {
    ClientCapabilities caps;
    caps.latest_version = ProtocolVersion::TLS1_2;
    caps.version_floor = ProtocolVersion::TLS1_0;
    caps.suite_list.clear();
    std::sample(all.begin(), all.end(), std::back_inserter(caps.suite_list),
                std::uniform_int_distribution<std::size_t>(0, all.size())(rng), rng);
    caps.suite_list.push_back(strong[std::uniform_int_distribution<std::size_t>(0, strong.size() - 1)(rng)]);
    std::shuffle(caps.suite_list.begin(), caps.suite_list.end(), rng);
    caps.suite_list.erase(std::unique(caps.suite_list.begin(), caps.suite_list.end()), caps.suite_list.end());

    const auto s = apply({PolicyMode::Strict, DecisionReason::OK, {}, {}, {}}, caps);
    const bool strict_ok =
        s.versions == std::vector<ProtocolVersion>{ProtocolVersion::TLS1_2} && !s.fallback_enabled &&
        !s.ciphersuites.empty() &&
        std::all_of(s.ciphersuites.begin(), s.ciphersuites.end(),
                    [](const auto& n) { return testing::oracle_label(n) == SuiteLabel::FS_AE; }) &&
        static_cast<std::size_t>(std::count_if(caps.suite_list.begin(), caps.suite_list.end(), [](const auto& n) {
          return testing::oracle_label(n) == SuiteLabel::FS_AE;
        })) == s.ciphersuites.size();
    const auto d = apply({PolicyMode::Default, DecisionReason::NoRecord, {}, {}, {}}, caps);
    const bool default_ok = d.versions == std::vector<ProtocolVersion>{ProtocolVersion::TLS1_2,
                                                                       ProtocolVersion::TLS1_1,
                                                                       ProtocolVersion::TLS1_0} &&
                            d.ciphersuites == caps.suite_list && d.fallback_enabled;
    if (!strict_ok || !default_ok) ++bad;
  }
  return {bad == 0, std::to_string(kCases - bad) + "/" + std::to_string(kCases) + " random capability lists"};
}

Verdict forgery() {
  const auto r = run_cli({"attack-sim", "forgery"});
  const auto cases = run_forgery_matrix(Testbed::create());
  const auto passed = std::count_if(cases.begin(), cases.end(), [](const auto& c) { return c.passed; });
  std::string failed;
  for (const auto& c : cases) {
    if (!c.passed) failed += " " + c.attack;
  }
  const bool ok = r.code == 0 && contains(r.out, "6/6 passed") && passed == 6 && cases.size() == 6;
  return {ok, std::to_string(passed) + "/" + std::to_string(cases.size()) + " attacks defeated" +
                  (failed.empty() ? "" : " (failed:" + failed + ")")};
}

Verdict downgrade() {
  const auto poodle = run_cli({"attack-sim", "poodle"});
  const auto frag = run_cli({"attack-sim", "fragment"});
  const bool p = poodle.code == 0 &&
                 contains(poodle.out, "PASS poodle-default-downgraded  client=default server=poodle attack=drop:2 "
                                      "expect=established@TLS1.0 got=Established@TLS1.0") &&
                 contains(poodle.out, "PASS poodle-strict-detected  client=strict server=poodle attack=drop:2 "
                                      "expect=aborted got=AbortedByClient");
  const bool f = frag.code == 0 && contains(frag.out, "client=default server=fragbug attack=fragment") &&
                 contains(frag.out, "got=Established@TLS1.0") &&
                 contains(frag.out, "client=strict server=fragbug attack=fragment expect=aborted got=AbortedByClient");
  return {p && f, std::string("poodle ") + (p ? "ok" : "MISMATCH") + ", fragment " + (f ? "ok" : "MISMATCH")};
}

Verdict classifier() {
  const auto& fixture = testing::labeled_suites();
  std::size_t agree = 0;
  std::string first_bad;
  for (const auto& s : fixture) {
    const auto lib = classify_ciphersuite(s.name);
    if (lib == s.label && testing::oracle_label(s.name) == s.label) {
      ++agree;
    } else if (first_bad.empty()) {
      first_bad = s.name;
    }
  }
  const bool ok = fixture.size() >= 50 && agree == fixture.size();
  return {ok, std::to_string(agree) + "/" + std::to_string(fixture.size()) + " hand-labeled names agree" +
                  (first_bad.empty() ? "" : " (first mismatch " + first_bad + ")")};
}

Verdict survey_repro() {
  const auto r = run_cli({"survey", "--synthesize", "--format", "kv"});
  const std::vector<std::string> want = {"responding=7080\n",          "latest_support_pct=97.29\n",
                                         "latest_exclusive_pct=5.27\n", "latest_and_1_1_pct=91.27\n",
                                         "latest_1_1_1_0_pct=87.60\n",  "fs_ae_any_pct=94.37\n",
                                         "fs_ae_mixed_pct=94.12\n"};
  std::size_t hit = 0;
  for (const auto& w : want) hit += contains(r.out, w);
  const bool ok = r.code == 0 && hit == want.size() && r.seconds < 5.0;
  return {ok, std::to_string(hit) + "/" + std::to_string(want.size()) + " exact figures in " +
                  fmt("%.3f s", r.seconds)};
}

Verdict bench() {
  const auto r = run_cli({"bench", "--iterations", "500"});
  const auto bed = Testbed::create();
  const auto rep = run_bench(bed.zone, bed.anchors, Testbed::kRegisteredStrong, bed.now, 500);
  bool shape = r.code == 0 && rep.wall.size() == 4;
  const char* names[] = {"SigVerify", "QueryVerify", "Enforce", "All 3 functions"};
  for (std::size_t i = 0; shape && i < 4; ++i) {
    const auto& row = rep.wall[i];
    shape = row.function == names[i] && row.max_ms >= row.avg_ms && row.avg_ms >= row.min_ms &&
            contains(r.out, std::to_string(i + 1) + "    " + names[i]);
  }
  const double avg = rep.wall.size() == 4 ? rep.wall[3].avg_ms : -1;
  const bool ok = shape && avg >= 0 && avg <= 50.0;
  return {ok, "avg(All 3 functions) = " + fmt("%.4f ms", avg) + " over 500 iterations (bound 50 ms), rows " +
                  (shape ? "ok" : "MALFORMED")};
}

Verdict store_invariants() {
  const std::vector<std::string> domains = {"a.example", "b.example", "www.a.example"};
  std::mt19937_64 rng(51);
  std::uniform_int_distribution<int> pick_domain(0, 2), pick_from(0, 60), pick_span(0, 90), coin(0, 9), step(0, 4),
      ops(5, 40);
  const Date epoch = Date::from_ymd(2018, 1, 1);
  constexpr int kSequences = 10000;
  int violations = 0, roundtrip_failures = 0;
  for (int seq = 0; seq < kSequences; ++seq) {
    PolicyStore s;
    Date now = epoch.plus_days(pick_from(rng));
    for (int n = ops(rng); n > 0; --n) {
      now = now.plus_days(step(rng));
      const auto& dom = domains[pick_domain(rng)];
      const auto before = s.entry(dom);
      const auto tomb = s.tombstone(dom);
      const bool live = before && policy_status(before->record, now) != PolicyStatus::Expired;
      const bool tomb_live = tomb && now <= tomb->valid_to;
      if (coin(rng) == 0) {
        s.observe_absence(dom, Disposition::NoRecord, now);
        continue;
      }
      PolicyRecord p;
      p.valid_from = epoch.plus_days(pick_from(rng));
      p.valid_to = p.valid_from.plus_days(pick_span(rng));
      p.revoke = coin(rng) < 2;
      p.report = "r@example";
      const auto act = s.update(dom, p, now);
      const auto after = s.entry(dom);
      // Monotonicity and replay immunity.
      if (live && after && after->record.valid_from < before->record.valid_from) ++violations;
      if (live && p.valid_from < before->record.valid_from && act != StoreAction::RejectedStale) ++violations;
      // Tombstone durability.
      if (tomb_live && p.valid_from <= tomb->valid_from && (act != StoreAction::RejectedStale || after != before)) {
        ++violations;
      }
      if (after && after->record.revoke) ++violations;
    }
    const auto text = s.to_text();
    if (PolicyStore::parse(text).to_text() != text) ++roundtrip_failures;
  }
  return {violations == 0 && roundtrip_failures == 0,
          std::to_string(kSequences) + " sequences, " + std::to_string(violations) + " invariant violations, " +
              std::to_string(roundtrip_failures) + " persistence mismatches"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"Three-server matrix (attack-sim table2)", three_server},
      {"Strict/default configuration semantics", config_semantics},
      {"Forgery matrix", forgery},
      {"Downgrade scenarios (poodle, fragment)", downgrade},
      {"Classifier oracle equivalence", classifier},
      {"Survey reproduction", survey_repro},
      {"Performance envelope (bench --iterations 500)", bench},
      {"Store invariants and persistence", store_invariants},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, check] : criteria) {
    ++n;
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += v.ok ? 0 : 1;
    std::printf("%s %d %s: %s\n", v.ok ? "PASS" : "FAIL", n, name, v.detail.c_str());
  }
  std::printf("%d/%d criteria passed\n", n - failed, n);
  return failed == 0 ? 0 : 1;
}
