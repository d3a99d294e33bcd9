#ifndef V2XNOISE_IO_DIGEST_HPP
#define V2XNOISE_IO_DIGEST_HPP

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>

#include "v2xnoise/errors.hpp"

namespace v2xnoise::io {

/// SHA-256 of a byte range, lowercase hex.
inline std::string sha256_hex(const void* data, std::size_t len) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int md_len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
      EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data, len) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md, &md_len) != 1) {
    throw IoError("sha256 computation failed");
  }
  static const char hex[] = "0123456789abcdef";
  std::string out(md_len * 2, '0');
  for (unsigned int i = 0; i < md_len; ++i) {
    out[2 * i] = hex[md[i] >> 4];
    out[2 * i + 1] = hex[md[i] & 0xF];
  }
  return out;
}

inline std::string sha256_hex(const std::string& s) {
  return sha256_hex(s.data(), s.size());
}

/// SHA-256 over file bytes, streamed.
inline std::string sha256_file(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(
      std::fopen(path.string().c_str(), "rb"), std::fclose);
  if (!fp) throw IoError("cannot open for digest: " + path.string());

  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
      EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 init failed");
  }
  char buf[1 << 16];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), fp.get())) > 0) {
    if (EVP_DigestUpdate(ctx.get(), buf, n) != 1) {
      throw IoError("sha256 update failed");
    }
  }
  if (std::ferror(fp.get())) {
    throw IoError("read failed during digest: " + path.string());
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int md_len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), md, &md_len) != 1) {
    throw IoError("sha256 final failed");
  }
  static const char hex[] = "0123456789abcdef";
  std::string out(md_len * 2, '0');
  for (unsigned int i = 0; i < md_len; ++i) {
    out[2 * i] = hex[md[i] >> 4];
    out[2 * i + 1] = hex[md[i] & 0xF];
  }
  return out;
}

}  // namespace v2xnoise::io

#endif  // V2XNOISE_IO_DIGEST_HPP
