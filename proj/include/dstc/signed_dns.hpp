#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dstc/crypto.hpp"
#include "dstc/date.hpp"

namespace dstc {

inline constexpr std::uint16_t kTxtType = 16;

// Lowercase, no trailing dot.
std::string normalize_name(std::string_view name);

// Simplified RRSIG: a TXT record set together with the signature over it.
struct SignedRRset {
  std::string owner_name;
  std::vector<std::string> values;
  Bytes signature;
  std::string key_id;
  Date inception;
  Date expiration;

  friend bool operator==(const SignedRRset&, const SignedRRset&) = default;
};

enum class Disposition { Answered, NoRecord, NoSuchDomain };

std::string_view to_string(Disposition d);

struct DnsResponse {
  std::string queried_name;
  std::optional<SignedRRset> rrset;  // present iff disposition == Answered
  Disposition disposition = Disposition::NoSuchDomain;
};

enum class VerifyResult { Valid, InvalidSignature, SignatureExpired, SignatureNotYetValid };

std::string_view to_string(VerifyResult r);

// Signature input: u16 owner length + lowercase owner, u16 type, u32 inception
// and expiration as days since 1970-01-01, u32 value count, then each value as
// u32 length + bytes in ascending byte order. All integers big-endian.
Bytes canonical_form(std::string_view owner_name, std::vector<std::string> values, Date inception,
                     Date expiration);

// Throws MissingPrivateKey if `keys` is public-only and std::invalid_argument
// if inception > expiration or the owner is empty.
SignedRRset sign_rrset(const ZoneKeyPair& keys, std::string_view owner,
                       std::vector<std::string> values, Date inception, Date expiration);

VerifyResult verify_rrset(const PublicKey& key, const SignedRRset& rrset, Date now);

enum class ZoneErrorKind { ZoneNotLoaded, Parse, UnknownName };

class ZoneError : public std::runtime_error {
public:
  ZoneError(ZoneErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ZoneErrorKind kind() const noexcept { return kind_; }

private:
  ZoneErrorKind kind_;
};

// A record other than TXT (A, NS, ...) kept only so the owner name exists.
struct OtherRecord {
  std::string type;
  std::string rdata;

  friend bool operator==(const OtherRecord&, const OtherRecord&) = default;
};

// In-memory zone with signed TXT sets. Readers share the lock; every mutation,
// including the attacker methods, takes it exclusively.
class ZoneStore {
public:
  ZoneStore() = default;  // not loaded until load()/parse() or the first publish
  ZoneStore(const ZoneStore& other);
  ZoneStore& operator=(const ZoneStore& other);

  static ZoneStore parse(std::string_view text);
  static ZoneStore load_file(const std::filesystem::path& path);
  std::string to_text() const;
  void save_file(const std::filesystem::path& path) const;

  bool loaded() const;

  // Owner side.
  void add_record(std::string_view name, std::string_view type, std::string_view rdata);
  void set_txt(std::string_view name, std::vector<std::string> values);  // unsigned
  void put_rrset(SignedRRset rrset);
  void publish_key(std::string key_id, PublicKey key);
  // (Re)signs every TXT set with `keys` and publishes its public key.
  void sign_all(const ZoneKeyPair& keys, Date inception, Date expiration);

  std::vector<std::string> names() const;
  std::optional<SignedRRset> rrset(std::string_view name) const;
  std::map<std::string, PublicKey> published_keys() const;

  // Attacker side: no key material. Each throws ZoneError(UnknownName) when the
  // targeted TXT set does not exist, except inject and substitute.
  void attacker_add_value(std::string_view name, std::string value);
  void attacker_modify_value(std::string_view name, std::size_t index, std::string value);
  void attacker_delete_value(std::string_view name, std::size_t index);
  void attacker_drop(std::string_view name);
  void attacker_substitute(SignedRRset replayed);
  void attacker_inject(std::string_view name, std::vector<std::string> values, std::string key_id,
                       Bytes forged_signature);

  DnsResponse resolve(std::string_view name) const;

private:
  struct NameEntry {
    std::vector<OtherRecord> others;
    std::optional<SignedRRset> txt;
  };

  SignedRRset& txt_or_throw(std::string_view name);

  mutable std::shared_mutex mu_;
  bool loaded_ = false;
  std::map<std::string, NameEntry> names_;
  std::map<std::string, PublicKey> keys_;
};

// Throws ZoneError(ZoneNotLoaded) on an unloaded store.
DnsResponse resolve(const ZoneStore& zone, std::string_view name);

// Client-side trust anchors: zone apex -> (key id, public key), authenticated
// out of band in place of walking a DNSSEC chain to the root.
class TrustAnchors {
public:
  struct Anchor {
    std::string apex;
    std::string key_id;
    PublicKey key;
  };

  static TrustAnchors parse(std::string_view text);
  static TrustAnchors load_file(const std::filesystem::path& path);
  std::string to_text() const;

  void add(std::string_view apex, std::string key_id, PublicKey key);

  // Longest apex that equals or is a parent of `domain` and carries `key_id`.
  const PublicKey* find(std::string_view domain, std::string_view key_id) const;

  const std::vector<Anchor>& anchors() const noexcept { return anchors_; }

private:
  std::vector<Anchor> anchors_;
};

// True when `name` equals `ancestor` or is a subdomain of it.
bool is_same_or_subdomain(std::string_view name, std::string_view ancestor);

}  // namespace dstc
