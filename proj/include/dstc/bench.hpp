#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dstc/enforcement.hpp"
#include "dstc/signed_dns.hpp"

namespace dstc {

struct TimingRow {
  std::string function;
  double max_ms = 0;
  double min_ms = 0;
  double avg_ms = 0;
};

struct BenchReport {
  int iterations = 0;
  std::string domain;
  std::vector<TimingRow> wall;  // SigVerify, QueryVerify, Enforce, All 3 functions
  std::vector<TimingRow> cpu;   // same rows, process CPU time

  std::string to_text() const;
};

// Each iteration starts from an empty client store. SigVerify is
// verify_rrset alone; QueryVerify is resolve + verify + parse + status;
// Enforce is decide + apply. The last row sums the three per iteration.
// Throws std::invalid_argument for iterations < 1 or when `domain` has no
// verifiable DSTC record in `zone`.
BenchReport run_bench(const ZoneStore& zone, const TrustAnchors& anchors, std::string_view domain, Date now,
                      int iterations, const ClientCapabilities& caps = {});

}  // namespace dstc
