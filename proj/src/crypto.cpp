#include "dstc/crypto.hpp"

#include <openssl/bio.h>
#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/rsa.h>
#include <openssl/x509.h>

#include <fstream>
#include <sstream>

namespace dstc {

namespace {

using EVP_MD_CTX_ptr = std::unique_ptr<EVP_MD_CTX, decltype([](EVP_MD_CTX* c) { EVP_MD_CTX_free(c); })>;
using BIO_ptr = std::unique_ptr<BIO, decltype([](BIO* b) { BIO_free(b); })>;

std::shared_ptr<EVP_PKEY> own(EVP_PKEY* k) { return {k, EVP_PKEY_free}; }

std::string openssl_error(std::string_view what) {
  std::string msg(what);
  if (const auto code = ERR_get_error(); code != 0) {
    char buf[256];
    ERR_error_string_n(code, buf, sizeof buf);
    msg += ": ";
    msg += buf;
  }
  ERR_clear_error();
  return msg;
}

Bytes public_der(EVP_PKEY* k) {
  const int len = i2d_PUBKEY(k, nullptr);
  if (len <= 0) throw CryptoError(openssl_error("cannot encode public key"));
  Bytes der(static_cast<std::size_t>(len));
  auto* p = der.data();
  i2d_PUBKEY(k, &p);
  return der;
}

void check_rsa(EVP_PKEY* k) {
  if (EVP_PKEY_get_base_id(k) != EVP_PKEY_RSA) throw CryptoError("zone key must be RSA");
  if (EVP_PKEY_get_bits(k) < kMinRsaBits) {
    throw CryptoError("RSA key of " + std::to_string(EVP_PKEY_get_bits(k)) +
                      " bits is below the 2048-bit minimum");
  }
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> data) {
  if (data.empty()) return {};
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(),
                                static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::optional<Bytes> base64_decode(std::string_view text) {
  if (text.empty()) return Bytes{};
  if (text.size() % 4 != 0) return std::nullopt;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const bool alpha = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                       c == '+' || c == '/';
    if (!alpha && !(c == '=' && i + 2 >= text.size())) return std::nullopt;
  }
  if (text[text.size() - 2] == '=' && text.back() != '=') return std::nullopt;
  Bytes out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) return std::nullopt;
  std::size_t len = static_cast<std::size_t>(n);
  // EVP_DecodeBlock keeps the zero bytes produced by padding.
  if (text.back() == '=') --len;
  if (text[text.size() - 2] == '=') --len;
  out.resize(len);
  return out;
}

PublicKey PublicKey::from_der(std::span<const std::uint8_t> der) {
  const unsigned char* p = der.data();
  EVP_PKEY* raw = d2i_PUBKEY(nullptr, &p, static_cast<long>(der.size()));
  if (raw == nullptr || p != der.data() + der.size()) {
    if (raw) EVP_PKEY_free(raw);
    throw CryptoError(openssl_error("malformed public key"));
  }
  auto key = own(raw);
  check_rsa(key.get());
  return PublicKey(Bytes(der.begin(), der.end()), std::move(key));
}

PublicKey PublicKey::from_base64(std::string_view b64) {
  const auto der = base64_decode(b64);
  if (!der) throw CryptoError("public key is not valid base64");
  return from_der(*der);
}

int PublicKey::bits() const { return EVP_PKEY_get_bits(pkey_.get()); }

bool PublicKey::verify(std::span<const std::uint8_t> message,
                       std::span<const std::uint8_t> signature) const {
  EVP_MD_CTX_ptr ctx{EVP_MD_CTX_new()};
  if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, EVP_sha256(), nullptr, pkey_.get()) != 1) {
    throw CryptoError(openssl_error("verify init failed"));
  }
  const int rc = EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(),
                                  message.size());
  ERR_clear_error();
  return rc == 1;
}

ZoneKeyPair ZoneKeyPair::generate(std::string key_id, int bits) {
  if (bits < kMinRsaBits) throw CryptoError("refusing to generate RSA key below 2048 bits");
  EVP_PKEY* raw = EVP_RSA_gen(static_cast<unsigned>(bits));
  if (raw == nullptr) throw CryptoError(openssl_error("RSA key generation failed"));
  auto priv = own(raw);
  auto pub = PublicKey::from_der(public_der(priv.get()));
  return ZoneKeyPair(std::move(key_id), std::move(pub), std::move(priv));
}

ZoneKeyPair ZoneKeyPair::from_private_pem(std::string key_id, std::string_view pem) {
  BIO_ptr bio{BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size()))};
  EVP_PKEY* raw = bio ? PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr) : nullptr;
  if (raw == nullptr) throw CryptoError(openssl_error("cannot read private key PEM"));
  auto priv = own(raw);
  check_rsa(priv.get());
  auto pub = PublicKey::from_der(public_der(priv.get()));
  return ZoneKeyPair(std::move(key_id), std::move(pub), std::move(priv));
}

ZoneKeyPair ZoneKeyPair::load_private_pem(std::string key_id, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CryptoError("cannot open key file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_private_pem(std::move(key_id), ss.str());
}

ZoneKeyPair ZoneKeyPair::public_only(std::string key_id, PublicKey pub) {
  return ZoneKeyPair(std::move(key_id), std::move(pub), nullptr);
}

Bytes ZoneKeyPair::sign(std::span<const std::uint8_t> message) const {
  if (!private_) throw MissingPrivateKey(key_id_);
  EVP_MD_CTX_ptr ctx{EVP_MD_CTX_new()};
  if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, EVP_sha256(), nullptr, private_.get()) != 1) {
    throw CryptoError(openssl_error("sign init failed"));
  }
  std::size_t len = 0;
  if (EVP_DigestSign(ctx.get(), nullptr, &len, message.data(), message.size()) != 1) {
    throw CryptoError(openssl_error("sign failed"));
  }
  Bytes sig(len);
  if (EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1) {
    throw CryptoError(openssl_error("sign failed"));
  }
  sig.resize(len);
  return sig;
}

std::string ZoneKeyPair::private_pem() const {
  if (!private_) throw MissingPrivateKey(key_id_);
  BIO_ptr bio{BIO_new(BIO_s_mem())};
  if (!bio || PEM_write_bio_PrivateKey(bio.get(), private_.get(), nullptr, nullptr, 0, nullptr,
                                       nullptr) != 1) {
    throw CryptoError(openssl_error("cannot write private key"));
  }
  char* data = nullptr;
  const long n = BIO_get_mem_data(bio.get(), &data);
  return std::string(data, static_cast<std::size_t>(n));
}

}  // namespace dstc
