#include "isingspec/digest.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace isingspec {

std::string fnv1a64_hex(const void* data, size_t len) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(data, len)));
  return std::string(buf);
}

std::string digest_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open file for digest: " + path);
  uint64_t h = 0xcbf29ce484222325ULL;
  char chunk[1 << 16];
  while (is) {
    is.read(chunk, sizeof(chunk));
    const auto got = is.gcount();
    if (got > 0) h = fnv1a64(chunk, static_cast<size_t>(got), h);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace isingspec
