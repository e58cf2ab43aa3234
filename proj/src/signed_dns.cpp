#include "dstc/signed_dns.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

namespace dstc {

namespace {

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t epoch_days(Date d) {
  return static_cast<std::uint32_t>(d.days().time_since_epoch().count());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ZoneError(ZoneErrorKind::Parse, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ZoneError(ZoneErrorKind::Parse, "cannot write " + path.string());
  out << text;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const auto start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::string escape_txt(std::string_view v) {
  std::string out;
  out.reserve(v.size() + 2);
  out += '"';
  for (char c : v) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

// Parses `"..."` with \" and \\ escapes; nothing but whitespace may follow.
std::optional<std::string> unquote_txt(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos || s[b] != '"') return std::nullopt;
  std::string out;
  std::size_t i = b + 1;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '\\') {
      if (++i == s.size()) return std::nullopt;
      out += s[i];
    } else if (c == '"') {
      break;
    } else {
      out += c;
    }
  }
  if (i >= s.size()) return std::nullopt;
  if (s.find_first_not_of(" \t\r", i + 1) != std::string_view::npos) return std::nullopt;
  return out;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& msg) {
  throw ZoneError(ZoneErrorKind::Parse, "line " + std::to_string(line_no) + ": " + msg);
}

Date parse_date_field(std::size_t line_no, std::string_view s) {
  auto d = Date::parse(s);
  if (!d) parse_fail(line_no, "bad date '" + std::string(s) + "'");
  return *d;
}

}  // namespace

std::string normalize_name(std::string_view name) {
  std::string out(name);
  while (!out.empty() && out.back() == '.') out.pop_back();
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_same_or_subdomain(std::string_view name_in, std::string_view ancestor_in) {
  const auto name = normalize_name(name_in);
  const auto ancestor = normalize_name(ancestor_in);
  if (name == ancestor) return true;
  if (name.size() <= ancestor.size()) return false;
  return name.ends_with(ancestor) && name[name.size() - ancestor.size() - 1] == '.';
}

std::string_view to_string(Disposition d) {
  switch (d) {
    case Disposition::Answered: return "Answered";
    case Disposition::NoRecord: return "NoRecord";
    case Disposition::NoSuchDomain: return "NoSuchDomain";
  }
  return "?";
}

std::string_view to_string(VerifyResult r) {
  switch (r) {
    case VerifyResult::Valid: return "Valid";
    case VerifyResult::InvalidSignature: return "InvalidSignature";
    case VerifyResult::SignatureExpired: return "SignatureExpired";
    case VerifyResult::SignatureNotYetValid: return "SignatureNotYetValid";
  }
  return "?";
}

Bytes canonical_form(std::string_view owner_name, std::vector<std::string> values, Date inception,
                     Date expiration) {
  const auto owner = normalize_name(owner_name);
  std::sort(values.begin(), values.end());
  Bytes out;
  out.reserve(owner.size() + 32 + values.size() * 64);
  put_u16(out, static_cast<std::uint16_t>(owner.size()));
  out.insert(out.end(), owner.begin(), owner.end());
  put_u16(out, kTxtType);
  put_u32(out, epoch_days(inception));
  put_u32(out, epoch_days(expiration));
  put_u32(out, static_cast<std::uint32_t>(values.size()));
  for (const auto& v : values) {
    put_u32(out, static_cast<std::uint32_t>(v.size()));
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

SignedRRset sign_rrset(const ZoneKeyPair& keys, std::string_view owner,
                       std::vector<std::string> values, Date inception, Date expiration) {
  if (!keys.has_private_key()) throw MissingPrivateKey(keys.key_id());
  if (normalize_name(owner).empty()) throw std::invalid_argument("empty owner name");
  if (inception > expiration) throw std::invalid_argument("inception after expiration");
  std::sort(values.begin(), values.end());
  SignedRRset rr;
  rr.owner_name = normalize_name(owner);
  rr.signature = keys.sign(canonical_form(rr.owner_name, values, inception, expiration));
  rr.values = std::move(values);
  rr.key_id = keys.key_id();
  rr.inception = inception;
  rr.expiration = expiration;
  return rr;
}

VerifyResult verify_rrset(const PublicKey& key, const SignedRRset& rrset, Date now) {
  const auto message = canonical_form(rrset.owner_name, rrset.values, rrset.inception, rrset.expiration);
  if (rrset.signature.empty() || !key.verify(message, rrset.signature)) {
    return VerifyResult::InvalidSignature;
  }
  if (now < rrset.inception) return VerifyResult::SignatureNotYetValid;
  if (now > rrset.expiration) return VerifyResult::SignatureExpired;
  return VerifyResult::Valid;
}

ZoneStore::ZoneStore(const ZoneStore& other) {
  std::shared_lock lock(other.mu_);
  loaded_ = other.loaded_;
  names_ = other.names_;
  keys_ = other.keys_;
}

ZoneStore& ZoneStore::operator=(const ZoneStore& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_);
  std::shared_lock other_lock(other.mu_);
  loaded_ = other.loaded_;
  names_ = other.names_;
  keys_ = other.keys_;
  return *this;
}

ZoneStore ZoneStore::parse(std::string_view text) {
  ZoneStore zone;
  zone.loaded_ = true;
  struct Sig {
    std::string key_id;
    Date inception, expiration;
    Bytes signature;
  };
  std::map<std::string, Sig> sigs;
  std::map<std::string, std::vector<std::string>> txts;

  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    const auto tok = split_ws(line);
    if (tok[0] == "KEY") {
      if (tok.size() != 3) parse_fail(line_no, "KEY expects <key_id> <base64>");
      try {
        zone.keys_.insert_or_assign(std::string(tok[1]), PublicKey::from_base64(tok[2]));
      } catch (const CryptoError& e) {
        parse_fail(line_no, e.what());
      }
      continue;
    }
    if (tok.size() < 2) parse_fail(line_no, "expected <name> <type> ...");
    const auto name = normalize_name(tok[0]);
    if (name.empty()) parse_fail(line_no, "empty owner name");
    auto& entry = zone.names_[name];
    if (tok[1] == "TXT") {
      const auto after = line.substr(line.find("TXT", tok[0].size()) + 3);
      auto value = unquote_txt(after);
      if (!value) parse_fail(line_no, "TXT value must be a single quoted string");
      txts[name].push_back(std::move(*value));
    } else if (tok[1] == "SIG") {
      if (tok.size() != 6) parse_fail(line_no, "SIG expects <key_id> <inception> <expiration> <base64>");
      auto sig = base64_decode(tok[5]);
      if (!sig) parse_fail(line_no, "signature is not valid base64");
      if (sigs.contains(name)) parse_fail(line_no, "duplicate SIG for " + name);
      sigs[name] = Sig{std::string(tok[2]), parse_date_field(line_no, tok[3]),
                       parse_date_field(line_no, tok[4]), std::move(*sig)};
    } else {
      const auto rest = trim(line.substr(line.find(tok[1], tok[0].size()) + tok[1].size()));
      entry.others.push_back({std::string(tok[1]), std::string(rest)});
    }
  }

  for (auto& [name, values] : txts) {
    SignedRRset rr;
    rr.owner_name = name;
    rr.values = std::move(values);
    if (auto it = sigs.find(name); it != sigs.end()) {
      rr.key_id = it->second.key_id;
      rr.inception = it->second.inception;
      rr.expiration = it->second.expiration;
      rr.signature = std::move(it->second.signature);
      sigs.erase(it);
    }
    zone.names_[name].txt = std::move(rr);
  }
  if (!sigs.empty()) {
    throw ZoneError(ZoneErrorKind::Parse, "SIG without TXT records for " + sigs.begin()->first);
  }
  return zone;
}

ZoneStore ZoneStore::load_file(const std::filesystem::path& path) { return parse(read_file(path)); }

std::string ZoneStore::to_text() const {
  std::shared_lock lock(mu_);
  std::ostringstream out;
  for (const auto& [id, key] : keys_) out << "KEY " << id << ' ' << key.to_base64() << '\n';
  for (const auto& [name, entry] : names_) {
    for (const auto& r : entry.others) out << name << ' ' << r.type << ' ' << r.rdata << '\n';
    if (!entry.txt) continue;
    for (const auto& v : entry.txt->values) out << name << " TXT " << escape_txt(v) << '\n';
    if (!entry.txt->signature.empty()) {
      out << name << " SIG " << entry.txt->key_id << ' ' << entry.txt->inception.to_string() << ' '
          << entry.txt->expiration.to_string() << ' ' << base64_encode(entry.txt->signature) << '\n';
    }
  }
  return out.str();
}

void ZoneStore::save_file(const std::filesystem::path& path) const { write_file(path, to_text()); }

bool ZoneStore::loaded() const {
  std::shared_lock lock(mu_);
  return loaded_;
}

void ZoneStore::add_record(std::string_view name, std::string_view type, std::string_view rdata) {
  std::scoped_lock lock(mu_);
  loaded_ = true;
  names_[normalize_name(name)].others.push_back({std::string(type), std::string(rdata)});
}

void ZoneStore::set_txt(std::string_view name, std::vector<std::string> values) {
  std::scoped_lock lock(mu_);
  loaded_ = true;
  SignedRRset rr;
  rr.owner_name = normalize_name(name);
  rr.values = std::move(values);
  names_[rr.owner_name].txt = std::move(rr);
}

void ZoneStore::put_rrset(SignedRRset rrset) {
  std::scoped_lock lock(mu_);
  loaded_ = true;
  rrset.owner_name = normalize_name(rrset.owner_name);
  auto name = rrset.owner_name;
  names_[name].txt = std::move(rrset);
}

void ZoneStore::publish_key(std::string key_id, PublicKey key) {
  std::scoped_lock lock(mu_);
  loaded_ = true;
  keys_.insert_or_assign(std::move(key_id), std::move(key));
}

void ZoneStore::sign_all(const ZoneKeyPair& keys, Date inception, Date expiration) {
  std::scoped_lock lock(mu_);
  loaded_ = true;
  for (auto& [name, entry] : names_) {
    if (!entry.txt) continue;
    entry.txt = sign_rrset(keys, name, entry.txt->values, inception, expiration);
  }
  keys_.insert_or_assign(keys.key_id(), keys.public_key());
}

std::vector<std::string> ZoneStore::names() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  out.reserve(names_.size());
  for (const auto& [name, entry] : names_) out.push_back(name);
  return out;
}

std::optional<SignedRRset> ZoneStore::rrset(std::string_view name) const {
  std::shared_lock lock(mu_);
  const auto it = names_.find(normalize_name(name));
  if (it == names_.end()) return std::nullopt;
  return it->second.txt;
}

std::map<std::string, PublicKey> ZoneStore::published_keys() const {
  std::shared_lock lock(mu_);
  return keys_;
}

SignedRRset& ZoneStore::txt_or_throw(std::string_view name) {
  const auto it = names_.find(normalize_name(name));
  if (it == names_.end() || !it->second.txt) {
    throw ZoneError(ZoneErrorKind::UnknownName, "no TXT set at " + std::string(name));
  }
  return *it->second.txt;
}

void ZoneStore::attacker_add_value(std::string_view name, std::string value) {
  std::scoped_lock lock(mu_);
  txt_or_throw(name).values.push_back(std::move(value));
}

void ZoneStore::attacker_modify_value(std::string_view name, std::size_t index, std::string value) {
  std::scoped_lock lock(mu_);
  auto& rr = txt_or_throw(name);
  if (index >= rr.values.size()) throw std::out_of_range("TXT value index");
  rr.values[index] = std::move(value);
}

void ZoneStore::attacker_delete_value(std::string_view name, std::size_t index) {
  std::scoped_lock lock(mu_);
  auto& rr = txt_or_throw(name);
  if (index >= rr.values.size()) throw std::out_of_range("TXT value index");
  rr.values.erase(rr.values.begin() + static_cast<std::ptrdiff_t>(index));
}

void ZoneStore::attacker_drop(std::string_view name) {
  std::scoped_lock lock(mu_);
  txt_or_throw(name);
  names_[normalize_name(name)].txt.reset();
}

void ZoneStore::attacker_substitute(SignedRRset replayed) {
  std::scoped_lock lock(mu_);
  replayed.owner_name = normalize_name(replayed.owner_name);
  auto name = replayed.owner_name;
  names_[name].txt = std::move(replayed);
}

void ZoneStore::attacker_inject(std::string_view name, std::vector<std::string> values,
                                std::string key_id, Bytes forged_signature) {
  std::scoped_lock lock(mu_);
  SignedRRset rr;
  rr.owner_name = normalize_name(name);
  rr.values = std::move(values);
  rr.key_id = std::move(key_id);
  rr.signature = std::move(forged_signature);
  // Borrow a plausible window from any genuine set so only the signature is wrong.
  for (const auto& [n, e] : names_) {
    if (e.txt && !e.txt->signature.empty()) {
      rr.inception = e.txt->inception;
      rr.expiration = e.txt->expiration;
      break;
    }
  }
  names_[rr.owner_name].txt = std::move(rr);
}

DnsResponse ZoneStore::resolve(std::string_view name) const {
  std::shared_lock lock(mu_);
  if (!loaded_) throw ZoneError(ZoneErrorKind::ZoneNotLoaded, "zone not loaded");
  DnsResponse resp;
  resp.queried_name = normalize_name(name);
  const auto it = names_.find(resp.queried_name);
  if (it == names_.end()) {
    resp.disposition = Disposition::NoSuchDomain;
  } else if (!it->second.txt || it->second.txt->values.empty()) {
    resp.disposition = Disposition::NoRecord;
  } else {
    resp.disposition = Disposition::Answered;
    resp.rrset = it->second.txt;
  }
  return resp;
}

DnsResponse resolve(const ZoneStore& zone, std::string_view name) { return zone.resolve(name); }

TrustAnchors TrustAnchors::parse(std::string_view text) {
  TrustAnchors out;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    const auto tok = split_ws(line);
    if (tok.size() != 3) parse_fail(line_no, "trust anchor expects <apex> <key_id> <base64>");
    try {
      out.add(tok[0], std::string(tok[1]), PublicKey::from_base64(tok[2]));
    } catch (const CryptoError& e) {
      parse_fail(line_no, e.what());
    }
  }
  return out;
}

TrustAnchors TrustAnchors::load_file(const std::filesystem::path& path) {
  return parse(read_file(path));
}

std::string TrustAnchors::to_text() const {
  std::string out;
  for (const auto& a : anchors_) {
    out += a.apex + ' ' + a.key_id + ' ' + a.key.to_base64() + '\n';
  }
  return out;
}

void TrustAnchors::add(std::string_view apex, std::string key_id, PublicKey key) {
  anchors_.push_back({normalize_name(apex), std::move(key_id), std::move(key)});
}

const PublicKey* TrustAnchors::find(std::string_view domain, std::string_view key_id) const {
  const auto name = normalize_name(domain);
  const Anchor* best = nullptr;
  for (const auto& a : anchors_) {
    if (a.key_id != key_id) continue;
    if (!a.apex.empty() && !is_same_or_subdomain(name, a.apex)) continue;
    if (!best || a.apex.size() > best->apex.size()) best = &a;
  }
  return best ? &best->key : nullptr;
}

}  // namespace dstc
