#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dstc/ciphersuite.hpp"

namespace dstc {

// One scanned server: which versions answered and which suites it accepted.
struct ScanProfile {
  std::string domain;
  std::vector<ProtocolVersion> versions;
  std::vector<std::string> suites;
};

class SurveyError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// `<domain> | <versions,...> | <suites,...>`; blank lines and '#' comments skipped.
std::vector<ScanProfile> parse_corpus(std::string_view text);
std::vector<ScanProfile> load_corpus(const std::filesystem::path& path);
std::string format_corpus(const std::vector<ScanProfile>& profiles);

// count/denominator as a percentage, half-up rounded to two decimals ("97.29").
std::string percent_2dp(std::uint64_t count, std::uint64_t denominator);

struct SurveyReport {
  std::uint64_t total_profiles = 0;
  std::uint64_t responding = 0;         // profiles with at least one version
  std::uint64_t latest_support = 0;     // TLS 1.2
  std::uint64_t latest_exclusive = 0;   // TLS 1.2 and nothing else
  std::uint64_t latest_and_1_1 = 0;     // {1.2, 1.1} subset
  std::uint64_t latest_1_1_1_0 = 0;     // {1.2, 1.1, 1.0} subset
  // Ciphersuite statistics cover TLS 1.2 servers only.
  std::uint64_t modal_suite_count = 0;
  std::uint64_t modal_suite_servers = 0;
  std::map<SuiteLabel, std::uint64_t> label_counts;
  std::uint64_t suites_observed = 0;
  std::uint64_t fs_ae_any = 0;          // >= 1 FS+AE suite
  std::uint64_t fs_ae_mixed = 0;        // >= 1 FS+AE and >= 1 weaker suite

  // Formatted percentages; each names its denominator explicitly.
  std::string pct_latest_support() const { return percent_2dp(latest_support, responding); }
  std::string pct_latest_exclusive() const { return percent_2dp(latest_exclusive, responding); }
  std::string pct_latest_and_1_1() const { return percent_2dp(latest_and_1_1, responding); }
  std::string pct_latest_1_1_1_0() const { return percent_2dp(latest_1_1_1_0, responding); }
  std::string pct_modal_suite_servers() const { return percent_2dp(modal_suite_servers, latest_support); }
  std::string pct_fs_ae_any() const { return percent_2dp(fs_ae_any, latest_support); }
  std::string pct_fs_ae_mixed() const { return percent_2dp(fs_ae_mixed, latest_support); }

  std::string to_text() const;      // aligned table
  std::string to_key_value() const; // key=value lines
};

// Throws SurveyError("EmptyCorpus") when no profile responded.
SurveyReport survey(const std::vector<ScanProfile>& profiles);

// Target marginals for a synthetic scan corpus.
struct CorpusTargets {
  std::uint64_t responding = 7080;
  std::uint64_t latest_support = 6888;
  std::uint64_t latest_exclusive = 373;
  std::uint64_t latest_and_1_1 = 6462;
  std::uint64_t latest_1_1_1_0 = 6202;
  std::uint64_t fs_ae_any = 6500;
  std::uint64_t fs_ae_mixed = 6483;
  std::uint64_t modal_suite_count = 20;
  std::uint64_t modal_suite_servers = 938;
};

// Deterministic for a given (targets, seed). Throws std::invalid_argument on
// inconsistent targets.
std::vector<ScanProfile> synthesize_corpus(const CorpusTargets& targets, std::uint64_t seed = 2018);

}  // namespace dstc
