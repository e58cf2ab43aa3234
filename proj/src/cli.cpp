#include "dstc/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "dstc/bench.hpp"
#include "dstc/enforcement.hpp"
#include "dstc/handshake_sim.hpp"
#include "dstc/policy.hpp"
#include "dstc/policy_store.hpp"
#include "dstc/signed_dns.hpp"
#include "dstc/survey.hpp"
#include "dstc/testbed.hpp"

namespace dstc::cli {

namespace {

// Raised for bad flag values found after CLI11 has accepted the command line.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Date parse_date_flag(const std::string& flag, const std::string& value) {
  if (value.empty()) return Date::today();
  auto d = Date::parse(value);
  if (!d) throw UsageError(flag + ": expected dd-mm-yyyy, got '" + value + "'");
  return *d;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw UsageError("cannot write " + path);
}

std::string join(const std::vector<std::string>& xs, const char* sep = ",") {
  std::string s;
  for (const auto& x : xs) {
    if (!s.empty()) s += sep;
    s += x;
  }
  return s;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::string versions_text(const std::vector<ProtocolVersion>& vs) {
  std::vector<std::string> names;
  for (auto v : vs) names.emplace_back(to_string(v));
  return join(names);
}

void print_decision(std::ostream& out, const std::string& domain, const PolicyDecision& d,
                    const EffectiveTlsConfig& cfg) {
  out << "domain: " << domain << '\n';
  out << "decision: " << to_string(d.mode) << ' ' << to_string(d.reason) << '\n';
  out << "report: " << d.report_address.value_or("-") << '\n';
  if (d.store_action) out << "store: " << to_string(*d.store_action) << '\n';
  if (d.governing_domain) out << "governing: " << *d.governing_domain << '\n';
  out << "versions: " << versions_text(cfg.versions) << '\n';
  out << "ciphersuites: " << join(cfg.ciphersuites) << '\n';
  out << "fallback: " << (cfg.fallback_enabled ? "on" : "off") << '\n';
  if (const auto line = format_report_line(d, domain); !line.empty()) out << line << '\n';
}

struct Pipeline {
  std::string zone;
  std::string anchors;
  std::string domain;
  std::string now;
  std::string store;
};

void add_pipeline_flags(CLI::App* cmd, Pipeline& p) {
  cmd->add_option("--zone", p.zone, "Signed zone file")->required();
  cmd->add_option("--anchors", p.anchors, "Trust anchor file")->required();
  cmd->add_option("--domain", p.domain, "Domain to connect to")->required();
  cmd->add_option("--now", p.now, "Current date, dd-mm-yyyy (default: system date)");
  cmd->add_option("--store", p.store, "Client policy store file; created if missing, saved after the run");
}

struct Decided {
  PolicyDecision decision;
  EffectiveTlsConfig config;
};

Decided run_pipeline(const Pipeline& p) {
  const Date now = parse_date_flag("--now", p.now);
  const auto zone = ZoneStore::load_file(p.zone);
  const auto anchors = TrustAnchors::load_file(p.anchors);
  PolicyStore store;
  if (!p.store.empty() && std::filesystem::exists(p.store)) store = PolicyStore::load_file(p.store);
  Decided r;
  r.decision = decide(resolve(zone, p.domain), anchors, store, p.domain, now);
  r.config = apply(r.decision, ClientCapabilities{});
  if (!p.store.empty()) store.save_file(p.store);
  return r;
}

int cmd_gen(std::ostream& out, const std::string& from, const std::string& to, const std::string& report,
            const std::string& level, const std::string& isd, const std::string& revoke) {
  // Assemble the record text and run it through the parser, so the CLI
  // enforces exactly the grammar clients apply.
  const std::string text = "name=DSTC; validFrom=" + from + "; validTo=" + to + "; tlsLevel=" + level +
                           "; includeSubDomain=" + isd + "; revoke=" + revoke + "; report=" + report;
  const auto policy = parse_policy(text);
  out << serialize_policy(policy) << '\n';
  return kExitOk;
}

struct SignFlags {
  std::string zone;
  std::string key;
  std::string key_id = "zsk";
  bool generate_key = false;
  std::string inception;
  std::string expiration;
  std::string out;
  std::string apex;
  std::string anchors_out;
  std::vector<std::string> txt;
};

int cmd_sign(std::ostream& out, const SignFlags& f) {
  const Date inception = parse_date_flag("--inception", f.inception);
  const Date expiration = parse_date_flag("--expiration", f.expiration);
  if (inception > expiration) throw UsageError("--inception is after --expiration");

  auto zone = f.zone.empty() ? ZoneStore::parse("") : ZoneStore::load_file(f.zone);
  std::map<std::string, std::vector<std::string>> txt;
  for (const auto& spec : f.txt) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--txt: expected NAME=VALUE, got '" + spec + "'");
    txt[spec.substr(0, eq)].push_back(spec.substr(eq + 1));
  }
  for (auto& [name, values] : txt) zone.set_txt(name, std::move(values));

  ZoneKeyPair keys = [&] {
    if (f.generate_key) {
      if (std::filesystem::exists(f.key)) throw UsageError("--generate-key: refusing to overwrite " + f.key);
      auto k = ZoneKeyPair::generate(f.key_id);
      write_file(f.key, k.private_pem());
      return k;
    }
    return ZoneKeyPair::load_private_pem(f.key_id, f.key);
  }();
  zone.sign_all(keys, inception, expiration);
  zone.save_file(f.out);
  out << "signed " << f.out << " with " << keys.key_id() << " (" << keys.algorithm() << ", "
      << keys.public_key().bits() << " bits)\n";

  if (!f.anchors_out.empty()) {
    if (f.apex.empty()) throw UsageError("--anchors-out requires --apex");
    TrustAnchors anchors;
    anchors.add(f.apex, keys.key_id(), keys.public_key());
    write_file(f.anchors_out, anchors.to_text());
    out << "anchor " << normalize_name(f.apex) << " -> " << f.anchors_out << '\n';
  }
  return kExitOk;
}

int cmd_resolve(std::ostream& out, const std::string& zone_path, const std::string& name) {
  const auto zone = ZoneStore::load_file(zone_path);
  const auto resp = resolve(zone, name);
  out << "name: " << normalize_name(name) << '\n';
  out << "disposition: " << to_string(resp.disposition) << '\n';
  if (resp.rrset) {
    for (const auto& v : resp.rrset->values) out << "TXT \"" << v << "\"\n";
    out << "SIG " << resp.rrset->key_id << ' ' << resp.rrset->inception.to_string() << ' '
        << resp.rrset->expiration.to_string() << ' ' << base64_encode(resp.rrset->signature) << '\n';
  }
  return kExitOk;
}

int cmd_verify(std::ostream& out, const Pipeline& p) {
  const auto r = run_pipeline(p);
  print_decision(out, p.domain, r.decision, r.config);
  return is_attack_signal(r.decision.reason) ? kExitRefused : kExitOk;
}

struct ConnectFlags {
  Pipeline pipeline;
  std::string profile;
  std::string server_versions;
  std::string server_suites;
  bool fragbug = false;
  std::string attack = "none";
};

ServerProfile server_from_flags(const ConnectFlags& f) {
  if (!f.profile.empty()) {
    for (auto& p : builtin_profiles()) {
      if (p.name == f.profile) return p;
    }
    throw UsageError("--profile: unknown profile '" + f.profile + "'");
  }
  if (f.server_versions.empty() || f.server_suites.empty()) {
    throw UsageError("either --profile or both --server-versions and --server-suites are required");
  }
  ServerProfile s;
  s.name = f.pipeline.domain;
  for (const auto& v : split_list(f.server_versions)) {
    auto pv = parse_version(v);
    if (!pv) throw UsageError("--server-versions: unknown version '" + v + "'");
    s.supported_versions.push_back(*pv);
  }
  s.suite_preference = split_list(f.server_suites);
  s.fragmentation_bug = f.fragbug;
  return s;
}

int cmd_connect(std::ostream& out, const ConnectFlags& f) {
  const auto attacker = AttackerStrategy::parse(f.attack);
  if (!attacker) throw UsageError("--attack: expected none|drop:N|fragment|modver:V, got '" + f.attack + "'");
  const auto server = server_from_flags(f);
  const auto r = run_pipeline(f.pipeline);
  print_decision(out, f.pipeline.domain, r.decision, r.config);
  const auto outcome = run_handshake(r.config, server, *attacker);
  out << "attack: " << attacker->to_string() << '\n';
  out << "result: " << to_string(outcome.result);
  if (outcome.negotiated_version) out << ' ' << to_string(*outcome.negotiated_version);
  if (outcome.negotiated_suite) out << ' ' << *outcome.negotiated_suite;
  if (outcome.abort_reason) out << " reason=" << *outcome.abort_reason;
  out << "\ntranscript:\n" << outcome.transcript_text();
  const bool ok = outcome.result == HandshakeResult::Established && !is_attack_signal(r.decision.reason);
  return ok ? kExitOk : kExitRefused;
}

int cmd_attack(std::ostream& out, const std::string& suite, const std::string& scenario_file) {
  if (!scenario_file.empty()) {
    if (!suite.empty()) throw UsageError("give either a suite name or --scenarios, not both");
    const auto report = run_scenario_suite(scenario_file, parse_scenario_file(read_file(scenario_file)));
    out << report.to_text(true);
    return report.all_passed() ? kExitOk : kExitRefused;
  }
  if (suite == "forgery") {
    const auto cases = run_forgery_matrix(Testbed::create());
    out << format_forgery_report(cases);
    return std::all_of(cases.begin(), cases.end(), [](const auto& c) { return c.passed; }) ? kExitOk
                                                                                         : kExitRefused;
  }
  ScenarioReport report;
  if (suite == "table2") {
    const auto bed = Testbed::create();
    PolicyStore store;
    const auto run = three_server_scenarios(bed, store);
    for (std::size_t i = 0; i < run.scenarios.size(); ++i) {
      const auto& d = run.decisions[i];
      out << "dstc " << run.scenarios[i].server.name << ": " << to_string(d.mode) << ' ' << to_string(d.reason)
          << '\n';
    }
    report = run_scenario_suite("table2", run.scenarios);
  } else if (suite == "poodle") {
    report = run_scenario_suite("poodle", poodle_scenarios());
  } else if (suite == "fragment") {
    report = run_scenario_suite("fragment", fragment_scenarios());
  } else {
    throw UsageError("attack-sim: unknown suite '" + suite + "' (table2, poodle, fragment, forgery)");
  }
  out << report.to_text(true);
  return report.all_passed() ? kExitOk : kExitRefused;
}

struct SurveyFlags {
  std::string corpus;
  bool synthesize = false;
  std::uint64_t seed = 2018;
  std::string write_corpus;
  std::string format = "text";
};

int cmd_survey(std::ostream& out, const SurveyFlags& f) {
  if (f.corpus.empty() == !f.synthesize) throw UsageError("survey: give exactly one of --corpus or --synthesize");
  const auto profiles = f.synthesize ? synthesize_corpus(CorpusTargets{}, f.seed) : load_corpus(f.corpus);
  if (!f.write_corpus.empty()) write_file(f.write_corpus, format_corpus(profiles));
  const auto report = survey(profiles);
  out << (f.format == "kv" ? report.to_key_value() : report.to_text());
  return kExitOk;
}

struct BenchFlags {
  int iterations = 500;
  std::string zone;
  std::string anchors;
  std::string domain;
  std::string now;
};

int cmd_bench(std::ostream& out, const BenchFlags& f) {
  BenchReport report;
  if (f.zone.empty()) {
    if (!f.anchors.empty()) throw UsageError("--anchors requires --zone");
    const auto bed = Testbed::create();
    const std::string domain = f.domain.empty() ? Testbed::kRegisteredStrong : f.domain;
    const Date now = f.now.empty() ? bed.now : parse_date_flag("--now", f.now);
    report = run_bench(bed.zone, bed.anchors, domain, now, f.iterations);
  } else {
    if (f.anchors.empty() || f.domain.empty()) throw UsageError("--zone requires --anchors and --domain");
    const auto zone = ZoneStore::load_file(f.zone);
    const auto anchors = TrustAnchors::load_file(f.anchors);
    report = run_bench(zone, anchors, f.domain, parse_date_flag("--now", f.now), f.iterations);
  }
  out << report.to_text();
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Signed DNS strict-TLS policies: publish, verify, enforce, simulate."};
  app.name("dstc");
  app.require_subcommand(1);

  std::string g_from, g_to, g_report, g_level{kStrictConfig}, g_isd = "0", g_revoke = "0";
  auto* gen = app.add_subcommand("gen", "Print a canonical policy record");
  gen->add_option("--valid-from", g_from, "dd-mm-yyyy")->required();
  gen->add_option("--valid-to", g_to, "dd-mm-yyyy")->required();
  gen->add_option("--report", g_report, "Failure report address")->required();
  gen->add_option("--tls-level", g_level, "Only strict-config is defined");
  gen->add_option("--include-sub-domain", g_isd, "0 or 1");
  gen->add_option("--revoke", g_revoke, "0 or 1");

  SignFlags sf;
  auto* sign = app.add_subcommand("sign", "Sign every TXT set of a zone file");
  sign->add_option("--zone", sf.zone, "Input zone file (default: empty zone)");
  sign->add_option("--key", sf.key, "Private key PEM")->required();
  sign->add_option("--key-id", sf.key_id, "Key identifier written into SIG lines");
  sign->add_flag("--generate-key", sf.generate_key, "Create a fresh RSA-2048 key at --key");
  sign->add_option("--inception", sf.inception, "Signature inception, dd-mm-yyyy (default: today)");
  sign->add_option("--expiration", sf.expiration, "Signature expiration, dd-mm-yyyy")->required();
  sign->add_option("--txt", sf.txt, "NAME=VALUE; replaces the TXT set at NAME (repeatable)");
  sign->add_option("--out", sf.out, "Output zone file")->required();
  sign->add_option("--apex", sf.apex, "Zone apex for the anchor file");
  sign->add_option("--anchors-out", sf.anchors_out, "Write a trust anchor file for --apex");

  std::string r_zone, r_name;
  auto* res = app.add_subcommand("resolve", "Show the answer a client would receive");
  res->add_option("--zone", r_zone)->required();
  res->add_option("--name", r_name)->required();

  Pipeline vp;
  auto* ver = app.add_subcommand("verify", "Query, verify and decide the policy for a domain");
  add_pipeline_flags(ver, vp);

  ConnectFlags cf;
  auto* con = app.add_subcommand("connect-sim", "Decide, then simulate a handshake against a server");
  add_pipeline_flags(con, cf.pipeline);
  con->add_option("--profile", cf.profile, "Built-in server profile");
  con->add_option("--server-versions", cf.server_versions, "Comma list, e.g. 1.2,1.1");
  con->add_option("--server-suites", cf.server_suites, "Comma list in server preference order");
  con->add_flag("--fragbug", cf.fragbug, "Server has the ClientHello fragmentation bug");
  con->add_option("--attack", cf.attack, "none|drop:N|fragment|modver:V");

  std::string a_suite, a_file;
  auto* att = app.add_subcommand("attack-sim", "Run a built-in attack suite or a scenario file");
  att->add_option("suite", a_suite, "table2|poodle|fragment|forgery");
  att->add_option("--scenarios", a_file, "Scenario file");

  SurveyFlags svf;
  auto* sur = app.add_subcommand("survey", "Version and ciphersuite statistics over a scan corpus");
  sur->add_option("--corpus", svf.corpus, "Corpus file");
  sur->add_flag("--synthesize", svf.synthesize, "Generate the 7080-profile corpus");
  sur->add_option("--seed", svf.seed, "Generator seed");
  sur->add_option("--write-corpus", svf.write_corpus, "Save the corpus used");
  sur->add_option("--format", svf.format, "text|kv")->check(CLI::IsMember({"text", "kv"}));

  BenchFlags bf;
  auto* ben = app.add_subcommand("bench", "Time SigVerify, QueryVerify and Enforce");
  ben->add_option("--iterations", bf.iterations)->check(CLI::PositiveNumber);
  ben->add_option("--zone", bf.zone, "Fixture zone (default: built-in tls12 fixture)");
  ben->add_option("--anchors", bf.anchors);
  ben->add_option("--domain", bf.domain);
  ben->add_option("--now", bf.now);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return cmd_gen(out, g_from, g_to, g_report, g_level, g_isd, g_revoke);
    if (*sign) return cmd_sign(out, sf);
    if (*res) return cmd_resolve(out, r_zone, r_name);
    if (*ver) return cmd_verify(out, vp);
    if (*con) return cmd_connect(out, cf);
    if (*att) return cmd_attack(out, a_suite, a_file);
    if (*sur) return cmd_survey(out, svf);
    if (*ben) return cmd_bench(out, bf);
  } catch (const PolicyError& e) {
    err << "error: " << to_string(e.kind()) << " (" << e.directive() << "): " << e.what() << '\n';
    return kExitUsage;
  } catch (const NoStrongSuites& e) {
    err << "error: " << e.what() << '\n';
    return kExitRefused;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace dstc::cli
