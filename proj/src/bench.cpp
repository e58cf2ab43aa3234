#include "dstc/bench.hpp"

#include <time.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>

namespace dstc {

namespace {

struct Stamp {
  std::chrono::steady_clock::time_point wall;
  timespec cpu;
};

Stamp now_stamp() {
  Stamp s;
  s.wall = std::chrono::steady_clock::now();
  clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &s.cpu);
  return s;
}

struct Elapsed {
  double wall_ms;
  double cpu_ms;
};

Elapsed since(const Stamp& a) {
  const auto b = now_stamp();
  const double wall = std::chrono::duration<double, std::milli>(b.wall - a.wall).count();
  const double cpu = static_cast<double>(b.cpu.tv_sec - a.cpu.tv_sec) * 1e3 +
                     static_cast<double>(b.cpu.tv_nsec - a.cpu.tv_nsec) / 1e6;
  return {wall, cpu};
}

class Accumulator {
public:
  void add(double v) {
    max_ = std::max(max_, v);
    min_ = std::min(min_, v);
    sum_ += v;
    ++n_;
  }
  TimingRow row(std::string name) const {
    return {std::move(name), max_, min_, n_ ? sum_ / static_cast<double>(n_) : 0.0};
  }

private:
  double max_ = 0;
  double min_ = std::numeric_limits<double>::infinity();
  double sum_ = 0;
  int n_ = 0;
};

}  // namespace

BenchReport run_bench(const ZoneStore& zone, const TrustAnchors& anchors, std::string_view domain, Date now,
                      int iterations, const ClientCapabilities& caps) {
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  const auto probe = resolve(zone, domain);
  if (!probe.rrset) throw std::invalid_argument("bench fixture has no TXT set for " + std::string(domain));
  const PublicKey* key = anchors.find(domain, probe.rrset->key_id);
  if (!key || verify_rrset(*key, *probe.rrset, now) != VerifyResult::Valid) {
    throw std::invalid_argument("bench fixture record for " + std::string(domain) + " does not verify");
  }

  static const char* kNames[] = {"SigVerify", "QueryVerify", "Enforce", "All 3 functions"};
  Accumulator wall[4], cpu[4];
  for (int i = 0; i < iterations; ++i) {
    Elapsed e[3];

    auto t = now_stamp();
    const auto sig = verify_rrset(*key, *probe.rrset, now);
    e[0] = since(t);

    t = now_stamp();
    std::size_t active = 0;
    {
      const auto resp = resolve(zone, domain);
      const PublicKey* k = resp.rrset ? anchors.find(domain, resp.rrset->key_id) : nullptr;
      if (k && verify_rrset(*k, *resp.rrset, now) == VerifyResult::Valid) {
        for (const auto& v : resp.rrset->values) {
          try {
            if (policy_status(parse_policy(v), now) == PolicyStatus::Active) ++active;
          } catch (const PolicyError&) {
          }
        }
      }
    }
    e[1] = since(t);

    t = now_stamp();
    PolicyStore store;
    const auto decision = decide(resolve(zone, domain), anchors, store, domain, now);
    const auto cfg = apply(decision, caps);
    e[2] = since(t);

    if (sig != VerifyResult::Valid || active == 0 || cfg.versions.empty()) {
      throw std::runtime_error("bench fixture stopped verifying mid-run");
    }
    double wall_total = 0, cpu_total = 0;
    for (int f = 0; f < 3; ++f) {
      wall[f].add(e[f].wall_ms);
      cpu[f].add(e[f].cpu_ms);
      wall_total += e[f].wall_ms;
      cpu_total += e[f].cpu_ms;
    }
    wall[3].add(wall_total);
    cpu[3].add(cpu_total);
  }

  BenchReport r;
  r.iterations = iterations;
  r.domain = std::string(domain);
  for (int f = 0; f < 4; ++f) {
    r.wall.push_back(wall[f].row(kNames[f]));
    r.cpu.push_back(cpu[f].row(kNames[f]));
  }
  return r;
}

std::string BenchReport::to_text() const {
  std::string out;
  char line[160];
  const auto table = [&](const char* title, const std::vector<TimingRow>& rows) {
    std::snprintf(line, sizeof line, "%s (ms, %d iterations, %s)\n", title, iterations, domain.c_str());
    out += line;
    std::snprintf(line, sizeof line, "%-4s %-18s %10s %10s %10s\n", "No.", "Function", "Max.", "Min.", "Avg.");
    out += line;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::snprintf(line, sizeof line, "%-4zu %-18s %10.4f %10.4f %10.4f\n", i + 1, rows[i].function.c_str(),
                    rows[i].max_ms, rows[i].min_ms, rows[i].avg_ms);
      out += line;
    }
  };
  table("Wall time", wall);
  out += '\n';
  table("CPU time", cpu);
  return out;
}

}  // namespace dstc
