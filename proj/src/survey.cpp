#include "dstc/survey.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace dstc {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto p = s.find(sep);
    out.push_back(trim(s.substr(0, p)));
    if (p == std::string_view::npos) break;
    s.remove_prefix(p + 1);
  }
  return out;
}

bool has(const ScanProfile& p, ProtocolVersion v) {
  return std::find(p.versions.begin(), p.versions.end(), v) != p.versions.end();
}

// Synthetic name pools, each internally distinct and labeled by the rules.
const std::vector<std::string>& strong_pool() {
  static const std::vector<std::string> pool = {
      "ECDHE-ECDSA-AES128-GCM-SHA256", "ECDHE-RSA-AES128-GCM-SHA256",
      "ECDHE-ECDSA-AES256-GCM-SHA384", "ECDHE-RSA-AES256-GCM-SHA384",
      "ECDHE-ECDSA-CHACHA20-POLY1305", "ECDHE-RSA-CHACHA20-POLY1305",
      "DHE-RSA-AES128-GCM-SHA256",     "DHE-RSA-AES256-GCM-SHA384",
      "DHE-RSA-CHACHA20-POLY1305",     "ECDHE-ECDSA-AES128-CCM",
      "ECDHE-ECDSA-AES256-CCM",        "ECDHE-ECDSA-AES128-CCM8",
      "ECDHE-ECDSA-AES256-CCM8",       "DHE-RSA-AES128-CCM",
      "DHE-RSA-AES256-CCM",            "DHE-RSA-AES128-CCM8",
      "DHE-RSA-AES256-CCM8",           "DHE-DSS-AES128-GCM-SHA256",
      "DHE-DSS-AES256-GCM-SHA384",     "ECDHE-ECDSA-ARIA128-GCM-SHA256",
      "ECDHE-RSA-ARIA256-GCM-SHA384",
  };
  return pool;
}

const std::vector<std::string>& weak_pool() {
  static const std::vector<std::string> pool = {
      "ECDHE-RSA-AES128-SHA256",  "ECDHE-RSA-AES256-SHA384",   "ECDHE-ECDSA-AES128-SHA256",
      "ECDHE-ECDSA-AES256-SHA384", "ECDHE-RSA-AES128-SHA",     "ECDHE-RSA-AES256-SHA",
      "ECDHE-ECDSA-AES128-SHA",   "ECDHE-ECDSA-AES256-SHA",    "DHE-RSA-AES128-SHA256",
      "DHE-RSA-AES256-SHA256",    "DHE-RSA-AES128-SHA",        "DHE-RSA-AES256-SHA",
      "DHE-RSA-CAMELLIA128-SHA",  "DHE-RSA-CAMELLIA256-SHA",   "ECDHE-RSA-DES-CBC3-SHA",
      "DHE-RSA-SEED-SHA",         "AES128-GCM-SHA256",         "AES256-GCM-SHA384",
      "AES128-CCM",               "AES256-CCM",                "AES128-CCM8",
      "AES256-CCM8",              "ECDH-RSA-AES128-GCM-SHA256", "ECDH-ECDSA-AES256-GCM-SHA384",
      "AES128-SHA",               "AES256-SHA",                "AES128-SHA256",
      "AES256-SHA256",            "DES-CBC3-SHA",              "CAMELLIA128-SHA",
      "CAMELLIA256-SHA",          "SEED-SHA",                  "RC4-SHA",
      "RC4-MD5",                  "IDEA-CBC-SHA",              "ECDH-RSA-AES128-SHA",
      "ECDH-ECDSA-AES256-SHA",    "EDH-RSA-DES-CBC3-SHA",      "AECDH-AES128-SHA",
      "ECDH-RSA-DES-CBC3-SHA",    "PSK-AES128-CBC-SHA",        "SRP-AES-256-CBC-SHA",
  };
  return pool;
}

void take(std::vector<std::string>& out, const std::vector<std::string>& pool, std::size_t n,
          std::size_t offset) {
  for (std::size_t i = 0; i < n; ++i) out.push_back(pool[(offset + i) % pool.size()]);
}

}  // namespace

std::vector<ScanProfile> parse_corpus(std::string_view text) {
  std::vector<ScanProfile> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, '|');
    if (fields.size() != 3 || fields[0].empty()) {
      throw SurveyError("corpus line " + std::to_string(line_no) +
                        ": expected '<domain> | <versions> | <suites>'");
    }
    ScanProfile p;
    p.domain = std::string(fields[0]);
    if (!fields[1].empty()) {
      for (auto v : split(fields[1], ',')) {
        const auto pv = parse_version(v);
        if (!pv) {
          throw SurveyError("corpus line " + std::to_string(line_no) + ": unknown version '" +
                            std::string(v) + "'");
        }
        if (std::find(p.versions.begin(), p.versions.end(), *pv) == p.versions.end()) {
          p.versions.push_back(*pv);
        }
      }
    }
    if (!fields[2].empty()) {
      for (auto s : split(fields[2], ',')) {
        if (!s.empty()) p.suites.emplace_back(s);
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ScanProfile> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SurveyError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_corpus(ss.str());
}

std::string format_corpus(const std::vector<ScanProfile>& profiles) {
  std::string out;
  for (const auto& p : profiles) {
    out += p.domain + " | ";
    for (std::size_t i = 0; i < p.versions.size(); ++i) {
      if (i) out += ',';
      out += to_string(p.versions[i]);
    }
    out += " | ";
    for (std::size_t i = 0; i < p.suites.size(); ++i) {
      if (i) out += ',';
      out += p.suites[i];
    }
    out += '\n';
  }
  return out;
}

std::string percent_2dp(std::uint64_t count, std::uint64_t denominator) {
  if (denominator == 0) return "n/a";
  // round(count * 10000 / denominator) half-up, in integers.
  const std::uint64_t hundredths = (count * 20000 + denominator) / (2 * denominator);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%llu.%02llu", static_cast<unsigned long long>(hundredths / 100),
                static_cast<unsigned long long>(hundredths % 100));
  return buf;
}

SurveyReport survey(const std::vector<ScanProfile>& profiles) {
  SurveyReport r;
  r.total_profiles = profiles.size();
  for (auto l : {SuiteLabel::FS_AE, SuiteLabel::FS_nonAE, SuiteLabel::nonFS_AE, SuiteLabel::nonFS_nonAE}) {
    r.label_counts[l] = 0;
  }
  std::map<std::uint64_t, std::uint64_t> size_histogram;
  for (const auto& p : profiles) {
    if (p.versions.empty()) continue;
    ++r.responding;
    if (!has(p, ProtocolVersion::TLS1_2)) continue;
    ++r.latest_support;
    if (p.versions.size() == 1) ++r.latest_exclusive;
    if (has(p, ProtocolVersion::TLS1_1)) {
      ++r.latest_and_1_1;
      if (has(p, ProtocolVersion::TLS1_0)) ++r.latest_1_1_1_0;
    }
    const std::set<std::string> distinct(p.suites.begin(), p.suites.end());
    ++size_histogram[distinct.size()];
    bool strong = false, weak = false;
    for (const auto& s : distinct) {
      const auto label = classify_ciphersuite(s);
      ++r.label_counts[label];
      ++r.suites_observed;
      (label == SuiteLabel::FS_AE ? strong : weak) = true;
    }
    if (strong) ++r.fs_ae_any;
    if (strong && weak) ++r.fs_ae_mixed;
  }
  if (r.responding == 0) throw SurveyError("EmptyCorpus: no responding profiles");
  for (const auto& [size, n] : size_histogram) {
    if (n > r.modal_suite_servers) {
      r.modal_suite_count = size;
      r.modal_suite_servers = n;
    }
  }
  return r;
}

std::string SurveyReport::to_text() const {
  std::ostringstream out;
  char line[160];
  const auto row = [&](const char* label, std::uint64_t n, const std::string& pct, const char* of) {
    if (pct.empty()) {
      std::snprintf(line, sizeof line, "%-44s %8llu\n", label, static_cast<unsigned long long>(n));
    } else {
      std::snprintf(line, sizeof line, "%-44s %8llu  %7s%%  of %s\n", label,
                    static_cast<unsigned long long>(n), pct.c_str(), of);
    }
    out << line;
  };
  row("Profiles in corpus", total_profiles, "", "");
  row("Responding servers", responding, "", "");
  row("Support TLS 1.2", latest_support, pct_latest_support(), "responding");
  row("Support TLS 1.2 exclusively", latest_exclusive, pct_latest_exclusive(), "responding");
  row("Support TLS 1.2 and 1.1", latest_and_1_1, pct_latest_and_1_1(), "responding");
  row("Support TLS 1.2, 1.1 and 1.0", latest_1_1_1_0, pct_latest_1_1_1_0(), "responding");
  std::snprintf(line, sizeof line, "Modal suite count (TLS 1.2 servers)          %8llu\n",
                static_cast<unsigned long long>(modal_suite_count));
  out << line;
  row("Servers with the modal suite count", modal_suite_servers, pct_modal_suite_servers(), "TLS 1.2");
  row("Suites observed (TLS 1.2 servers)", suites_observed, "", "");
  for (const auto& [label, n] : label_counts) {
    const std::string name = "  labeled " + std::string(to_string(label));
    row(name.c_str(), n, "", "");
  }
  row("At least one FS+AE suite", fs_ae_any, pct_fs_ae_any(), "TLS 1.2");
  row("FS+AE plus weaker suites", fs_ae_mixed, pct_fs_ae_mixed(), "TLS 1.2");
  return out.str();
}

std::string SurveyReport::to_key_value() const {
  std::ostringstream out;
  out << "total_profiles=" << total_profiles << '\n'
      << "responding=" << responding << '\n'
      << "latest_support=" << latest_support << '\n'
      << "latest_support_pct=" << pct_latest_support() << '\n'
      << "latest_exclusive=" << latest_exclusive << '\n'
      << "latest_exclusive_pct=" << pct_latest_exclusive() << '\n'
      << "latest_and_1_1=" << latest_and_1_1 << '\n'
      << "latest_and_1_1_pct=" << pct_latest_and_1_1() << '\n'
      << "latest_1_1_1_0=" << latest_1_1_1_0 << '\n'
      << "latest_1_1_1_0_pct=" << pct_latest_1_1_1_0() << '\n'
      << "modal_suite_count=" << modal_suite_count << '\n'
      << "modal_suite_servers=" << modal_suite_servers << '\n'
      << "modal_suite_servers_pct=" << pct_modal_suite_servers() << '\n'
      << "suites_observed=" << suites_observed << '\n';
  for (const auto& [label, n] : label_counts) out << "label[" << to_string(label) << "]=" << n << '\n';
  out << "fs_ae_any=" << fs_ae_any << '\n'
      << "fs_ae_any_pct=" << pct_fs_ae_any() << '\n'
      << "fs_ae_mixed=" << fs_ae_mixed << '\n'
      << "fs_ae_mixed_pct=" << pct_fs_ae_mixed() << '\n';
  return out.str();
}

std::vector<ScanProfile> synthesize_corpus(const CorpusTargets& t, std::uint64_t seed) {
  const auto need = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("inconsistent corpus targets: ") + what);
  };
  need(t.latest_support <= t.responding, "latest_support > responding");
  need(t.latest_exclusive + t.latest_and_1_1 <= t.latest_support, "exclusive + {1.2,1.1} > latest");
  need(t.latest_1_1_1_0 <= t.latest_and_1_1, "{1.2,1.1,1.0} > {1.2,1.1}");
  need(t.fs_ae_mixed <= t.fs_ae_any && t.fs_ae_any <= t.latest_support, "FS+AE counts");
  need(t.modal_suite_count >= 2 && t.modal_suite_servers <= t.fs_ae_mixed, "modal size must fit mixed servers");
  need(t.modal_suite_count <= strong_pool().size() + weak_pool().size(), "modal size exceeds name pools");

  const auto& strong = strong_pool();
  const auto& weak = weak_pool();
  std::vector<ScanProfile> out;
  out.reserve(t.responding);

  // Suite-count cycles for the non-modal servers, skipping the modal size.
  const auto cycle = [&](std::uint64_t lo, std::uint64_t hi) {
    std::vector<std::uint64_t> sizes;
    for (auto k = lo; k <= hi; ++k) {
      if (k != t.modal_suite_count) sizes.push_back(k);
    }
    return sizes;
  };
  const auto mixed_sizes = cycle(2, 40);
  const auto strong_sizes = cycle(1, 12);
  const auto weak_sizes = cycle(1, 30);

  std::uint64_t idx = 0;
  const auto versions_for = [&](std::uint64_t i) -> std::vector<ProtocolVersion> {
    using V = ProtocolVersion;
    if (i < t.latest_exclusive) return {V::TLS1_2};
    i -= t.latest_exclusive;
    if (i < t.latest_1_1_1_0) {
      if (i % 7 == 0) return {V::TLS1_2, V::TLS1_1, V::TLS1_0, V::SSLv3};
      return {V::TLS1_2, V::TLS1_1, V::TLS1_0};
    }
    i -= t.latest_1_1_1_0;
    if (i < t.latest_and_1_1 - t.latest_1_1_1_0) return {V::TLS1_2, V::TLS1_1};
    return {V::TLS1_2, V::TLS1_0};
  };

  // TLS 1.2 servers, interleaving suite classes so every version class mixes them.
  std::vector<int> suite_class;  // 0 mixed, 1 strong only, 2 weak only
  suite_class.insert(suite_class.end(), t.fs_ae_mixed, 0);
  suite_class.insert(suite_class.end(), t.fs_ae_any - t.fs_ae_mixed, 1);
  suite_class.insert(suite_class.end(), t.latest_support - t.fs_ae_any, 2);
  std::mt19937_64 rng(seed);
  std::shuffle(suite_class.begin(), suite_class.end(), rng);

  std::uint64_t modal_left = t.modal_suite_servers;
  std::array<std::uint64_t, 3> seen{};
  for (std::uint64_t i = 0; i < t.latest_support; ++i, ++idx) {
    ScanProfile p;
    p.versions = versions_for(i);
    const int cls = suite_class[i];
    const auto n = seen[static_cast<std::size_t>(cls)]++;
    if (cls == 0) {
      std::uint64_t k = mixed_sizes[n % mixed_sizes.size()];
      if (modal_left > 0) {
        k = t.modal_suite_count;
        --modal_left;
      }
      const auto n_strong = std::min<std::uint64_t>({std::max<std::uint64_t>(1, k / 2), strong.size(), k - 1});
      take(p.suites, strong, n_strong, n);
      take(p.suites, weak, k - n_strong, n * 3);
    } else if (cls == 1) {
      take(p.suites, strong, strong_sizes[n % strong_sizes.size()], n);
    } else {
      take(p.suites, weak, weak_sizes[n % weak_sizes.size()], n);
    }
    out.push_back(std::move(p));
  }
  need(modal_left == 0, "not enough mixed servers for the modal size");

  // Responding servers without TLS 1.2.
  for (std::uint64_t i = 0; i < t.responding - t.latest_support; ++i, ++idx) {
    ScanProfile p;
    switch (i % 3) {
      case 0: p.versions = {ProtocolVersion::TLS1_1, ProtocolVersion::TLS1_0}; break;
      case 1: p.versions = {ProtocolVersion::TLS1_0}; break;
      default: p.versions = {ProtocolVersion::TLS1_0, ProtocolVersion::SSLv3}; break;
    }
    take(p.suites, weak, 3 + i % 9, i);
    out.push_back(std::move(p));
  }

  std::shuffle(out.begin(), out.end(), rng);
  for (std::size_t i = 0; i < out.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "site%05zu.example", i + 1);
    out[i].domain = name;
  }
  return out;
}

}  // namespace dstc
