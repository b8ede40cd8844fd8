#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace ahc::detail {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

template <class T>
void put_le(std::ostream& os, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  os.write(buf, sizeof(T));
}

template <class T>
bool get_le(std::istream& is, T& value) {
  char buf[sizeof(T)];
  if (!is.read(buf, sizeof(T))) return false;
  std::memcpy(&value, buf, sizeof(T));
  return true;
}

inline void put_le_bytes(char* dst, std::uint64_t v, int n) {
  for (int i = 0; i < n; ++i) dst[i] = static_cast<char>((v >> (8 * i)) & 0xff);
}

}  // namespace ahc::detail
