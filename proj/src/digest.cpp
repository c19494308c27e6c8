#include "deriva/digest.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>

#include "deriva/errors.hpp"

namespace deriva {

static std::string to_hex(const unsigned char* digest, unsigned len) {
  static const char* hexdig = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hexdig[digest[i] >> 4]);
    out.push_back(hexdig[digest[i] & 0xf]);
  }
  return out;
}

static std::string one_shot(const EVP_MD* md, std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, md, nullptr);
  return to_hex(digest, len);
}

std::string sha256_hex(std::string_view bytes) {
  return one_shot(EVP_sha256(), bytes);
}

std::string md5_hex(std::string_view bytes) {
  return one_shot(EVP_md5(), bytes);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorKind::Io, "file_unreadable", "cannot read " + path.string());
  Sha256 hasher;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    hasher.update(std::string_view(buf, static_cast<size_t>(in.gcount())));
  }
  return hasher.hex();
}

struct Sha256::Impl {
  EVP_MD_CTX* ctx;
};

Sha256::Sha256() : impl_(new Impl{EVP_MD_CTX_new()}) {
  EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr);
}

Sha256::~Sha256() {
  if (impl_ && impl_->ctx) EVP_MD_CTX_free(impl_->ctx);
}

void Sha256::update(std::string_view bytes) {
  EVP_DigestUpdate(impl_->ctx, bytes.data(), bytes.size());
}

std::string Sha256::hex() {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(impl_->ctx, digest, &len);
  return to_hex(digest, len);
}

bool looks_like_sha256(const std::string& s) {
  if (s.size() != 64) return false;
  for (char c : s)
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  return true;
}

} // namespace deriva
