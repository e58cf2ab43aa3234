#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dstc/date.hpp"
#include "dstc/policy.hpp"
#include "dstc/signed_dns.hpp"

namespace dstc {

struct StoredPolicy {
  std::string domain;
  PolicyRecord record;
  Date stored_at;
  std::uint64_t source_serial = 0;  // audit ordering only

  friend bool operator==(const StoredPolicy&, const StoredPolicy&) = default;
};

// Left behind when a revoking record deletes a policy. Anything issued on or
// before `valid_from` is rejected until `valid_to` passes.
struct Tombstone {
  std::string domain;
  Date valid_from;
  Date valid_to;

  friend bool operator==(const Tombstone&, const Tombstone&) = default;
};

enum class StoreAction { StoredNew, Replaced, RejectedStale, RevokedDeleted, Unchanged, DropAlarm };

std::string_view to_string(StoreAction a);

class StoreError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Client-side cache of verified policies. Single writer, many readers; every
// public member is atomic with respect to the others.
class PolicyStore {
public:
  PolicyStore() = default;
  PolicyStore(const PolicyStore& other);
  PolicyStore& operator=(const PolicyStore& other);

  // Caller contract: `verified` has a Valid signature and is Active at `now`.
  StoreAction update(std::string_view domain, const PolicyRecord& verified, Date now);

  // Called when a query yielded no usable DSTC record. A live stored policy
  // turns this into DropAlarm and stays in force; an expired one is evicted.
  StoreAction observe_absence(std::string_view domain, Disposition disposition, Date now);

  // Exact domain first, then the nearest ancestor with includeSubDomain=1.
  std::optional<StoredPolicy> lookup(std::string_view domain, Date now) const;

  std::optional<StoredPolicy> entry(std::string_view domain) const;
  std::optional<Tombstone> tombstone(std::string_view domain) const;
  std::vector<StoredPolicy> entries() const;
  std::vector<Tombstone> tombstones() const;

  // POLICY <domain> <stored_at> <canonical policy> / TOMBSTONE <domain> <from> <to>
  std::string to_text() const;
  static PolicyStore parse(std::string_view text);  // throws StoreError
  void save_file(const std::filesystem::path& path) const;
  static PolicyStore load_file(const std::filesystem::path& path);

private:
  mutable std::shared_mutex mu_;
  std::map<std::string, StoredPolicy> entries_;
  std::map<std::string, Tombstone> tombstones_;
  std::uint64_t next_serial_ = 1;
};

}  // namespace dstc
