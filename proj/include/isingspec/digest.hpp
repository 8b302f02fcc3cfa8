#pragma once

#include <cstdint>
#include <cstddef>
#include <string>

namespace isingspec {

// FNV-1a 64-bit. Used for checkpoint integrity and manifest file digests;
// not cryptographic.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a64_hex(const void* data, size_t len);
std::string digest_file(const std::string& path);  // throws on I/O error

}  // namespace isingspec
