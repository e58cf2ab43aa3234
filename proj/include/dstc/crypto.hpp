#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// OpenSSL forward declaration; callers never touch EVP_PKEY directly.
typedef struct evp_pkey_st EVP_PKEY;

namespace dstc {

using Bytes = std::vector<std::uint8_t>;

inline constexpr int kMinRsaBits = 2048;
inline constexpr std::string_view kRsaSha256 = "RSASHA256";

class CryptoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class MissingPrivateKey : public CryptoError {
public:
  explicit MissingPrivateKey(const std::string& key_id)
      : CryptoError("MissingPrivateKey: key '" + key_id + "' has no private half") {}
};

std::string base64_encode(std::span<const std::uint8_t> data);
// Returns nullopt on any character outside the alphabet or bad padding.
std::optional<Bytes> base64_decode(std::string_view text);

// RSA public key, kept both as DER SubjectPublicKeyInfo (for files) and parsed.
class PublicKey {
public:
  // Throws CryptoError on unparsable DER, non-RSA keys, or keys below 2048 bits.
  static PublicKey from_der(std::span<const std::uint8_t> der);
  static PublicKey from_base64(std::string_view b64);

  const Bytes& der() const noexcept { return der_; }
  std::string to_base64() const { return base64_encode(der_); }
  int bits() const;

  bool verify(std::span<const std::uint8_t> message, std::span<const std::uint8_t> signature) const;

  friend bool operator==(const PublicKey& a, const PublicKey& b) { return a.der_ == b.der_; }

private:
  PublicKey(Bytes der, std::shared_ptr<EVP_PKEY> pkey) : der_(std::move(der)), pkey_(std::move(pkey)) {}

  Bytes der_;
  std::shared_ptr<EVP_PKEY> pkey_;
};

// Zone signing key. The private half is only present on the signer side.
class ZoneKeyPair {
public:
  static ZoneKeyPair generate(std::string key_id, int bits = kMinRsaBits);
  static ZoneKeyPair from_private_pem(std::string key_id, std::string_view pem);
  static ZoneKeyPair load_private_pem(std::string key_id, const std::filesystem::path& path);
  static ZoneKeyPair public_only(std::string key_id, PublicKey pub);

  const std::string& key_id() const noexcept { return key_id_; }
  const PublicKey& public_key() const noexcept { return public_; }
  std::string_view algorithm() const noexcept { return kRsaSha256; }
  bool has_private_key() const noexcept { return private_ != nullptr; }

  // Throws MissingPrivateKey when the private half is absent.
  Bytes sign(std::span<const std::uint8_t> message) const;
  std::string private_pem() const;

private:
  ZoneKeyPair(std::string key_id, PublicKey pub, std::shared_ptr<EVP_PKEY> priv)
      : key_id_(std::move(key_id)), public_(std::move(pub)), private_(std::move(priv)) {}

  std::string key_id_;
  PublicKey public_;
  std::shared_ptr<EVP_PKEY> private_;
};

}  // namespace dstc
