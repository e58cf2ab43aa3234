#include "dstc/policy_store.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>

namespace dstc {

std::string_view to_string(StoreAction a) {
  switch (a) {
    case StoreAction::StoredNew: return "StoredNew";
    case StoreAction::Replaced: return "Replaced";
    case StoreAction::RejectedStale: return "RejectedStale";
    case StoreAction::RevokedDeleted: return "RevokedDeleted";
    case StoreAction::Unchanged: return "Unchanged";
    case StoreAction::DropAlarm: return "DropAlarm";
  }
  return "?";
}

PolicyStore::PolicyStore(const PolicyStore& other) {
  std::shared_lock lock(other.mu_);
  entries_ = other.entries_;
  tombstones_ = other.tombstones_;
  next_serial_ = other.next_serial_;
}

PolicyStore& PolicyStore::operator=(const PolicyStore& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_);
  std::shared_lock other_lock(other.mu_);
  entries_ = other.entries_;
  tombstones_ = other.tombstones_;
  next_serial_ = other.next_serial_;
  return *this;
}

StoreAction PolicyStore::update(std::string_view domain_in, const PolicyRecord& verified, Date now) {
  std::scoped_lock lock(mu_);
  const auto domain = normalize_name(domain_in);

  if (auto t = tombstones_.find(domain); t != tombstones_.end()) {
    if (now > t->second.valid_to) {
      tombstones_.erase(t);
    } else if (verified.valid_from <= t->second.valid_from) {
      return StoreAction::RejectedStale;
    } else if (verified.revoke) {
      // A newer revocation while already revoked: extend the tombstone.
      t->second.valid_from = verified.valid_from;
      t->second.valid_to = std::max(t->second.valid_to, verified.valid_to);
      return StoreAction::Unchanged;
    } else {
      tombstones_.erase(t);
    }
  }

  auto it = entries_.find(domain);
  if (it != entries_.end() && policy_status(it->second.record, now) == PolicyStatus::Expired) {
    entries_.erase(it);
    it = entries_.end();
  }

  if (it == entries_.end()) {
    if (verified.revoke) return StoreAction::Unchanged;
    entries_[domain] = StoredPolicy{domain, verified, now, next_serial_++};
    return StoreAction::StoredNew;
  }

  const auto& stored = it->second.record;
  if (verified.valid_from < stored.valid_from) return StoreAction::RejectedStale;
  if (verified.valid_from == stored.valid_from) {
    return verified == stored ? StoreAction::Unchanged : StoreAction::RejectedStale;
  }
  if (verified.revoke) {
    // Cover the revoked policy's own window too, so a replay of it cannot
    // outlive a short-lived revoking record.
    tombstones_[domain] = Tombstone{domain, verified.valid_from, std::max(verified.valid_to, stored.valid_to)};
    entries_.erase(it);
    return StoreAction::RevokedDeleted;
  }
  it->second = StoredPolicy{domain, verified, now, next_serial_++};
  return StoreAction::Replaced;
}

StoreAction PolicyStore::observe_absence(std::string_view domain_in, Disposition, Date now) {
  std::scoped_lock lock(mu_);
  const auto domain = normalize_name(domain_in);
  const auto it = entries_.find(domain);
  if (it == entries_.end()) return StoreAction::Unchanged;
  if (policy_status(it->second.record, now) == PolicyStatus::Expired) {
    entries_.erase(it);
    return StoreAction::Unchanged;
  }
  return StoreAction::DropAlarm;
}

std::optional<StoredPolicy> PolicyStore::lookup(std::string_view domain_in, Date now) const {
  std::shared_lock lock(mu_);
  const auto domain = normalize_name(domain_in);
  std::string_view name = domain;
  bool exact = true;
  while (true) {
    if (auto it = entries_.find(std::string(name)); it != entries_.end()) {
      const auto& e = it->second;
      if ((exact || e.record.include_sub_domain) &&
          policy_status(e.record, now) != PolicyStatus::Expired) {
        return e;
      }
    }
    const auto dot = name.find('.');
    if (dot == std::string_view::npos) return std::nullopt;
    name.remove_prefix(dot + 1);
    exact = false;
  }
}

std::optional<StoredPolicy> PolicyStore::entry(std::string_view domain) const {
  std::shared_lock lock(mu_);
  const auto it = entries_.find(normalize_name(domain));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<Tombstone> PolicyStore::tombstone(std::string_view domain) const {
  std::shared_lock lock(mu_);
  const auto it = tombstones_.find(normalize_name(domain));
  if (it == tombstones_.end()) return std::nullopt;
  return it->second;
}

std::vector<StoredPolicy> PolicyStore::entries() const {
  std::shared_lock lock(mu_);
  std::vector<StoredPolicy> out;
  for (const auto& [d, e] : entries_) out.push_back(e);
  return out;
}

std::vector<Tombstone> PolicyStore::tombstones() const {
  std::shared_lock lock(mu_);
  std::vector<Tombstone> out;
  for (const auto& [d, t] : tombstones_) out.push_back(t);
  return out;
}

std::string PolicyStore::to_text() const {
  std::shared_lock lock(mu_);
  std::string out;
  for (const auto& [d, e] : entries_) {
    out += "POLICY " + d + ' ' + e.stored_at.to_string() + ' ' + serialize_policy(e.record) + '\n';
  }
  for (const auto& [d, t] : tombstones_) {
    out += "TOMBSTONE " + d + ' ' + t.valid_from.to_string() + ' ' + t.valid_to.to_string() + '\n';
  }
  return out;
}

PolicyStore PolicyStore::parse(std::string_view text) {
  PolicyStore store;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& msg) -> StoreError {
    return StoreError("store line " + std::to_string(line_no) + ": " + msg);
  };
  const auto date = [&](const std::string& s) {
    auto d = Date::parse(s);
    if (!d) throw fail("bad date '" + s + "'");
    return *d;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    std::string kind, domain, d1;
    ls >> kind >> domain >> d1;
    domain = normalize_name(domain);
    if (domain.empty()) throw fail("missing domain");
    if (store.entries_.contains(domain) || store.tombstones_.contains(domain)) {
      throw fail("duplicate domain " + domain);
    }
    if (kind == "POLICY") {
      std::string rest;
      std::getline(ls, rest);
      PolicyRecord rec;
      try {
        rec = parse_policy(rest);
      } catch (const PolicyError& e) {
        throw fail(e.what());
      }
      store.entries_[domain] = StoredPolicy{domain, rec, date(d1), store.next_serial_++};
    } else if (kind == "TOMBSTONE") {
      std::string d2, extra;
      ls >> d2;
      if (ls >> extra) throw fail("trailing data");
      Tombstone t{domain, date(d1), date(d2)};
      if (t.valid_from > t.valid_to) throw fail("tombstone window inverted");
      store.tombstones_[domain] = t;
    } else {
      throw fail("unknown entry kind '" + kind + "'");
    }
  }
  return store;
}

void PolicyStore::save_file(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StoreError("cannot write " + path.string());
  out << to_text();
}

PolicyStore PolicyStore::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace dstc
