#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <detworam/detworam.h>

namespace detworam {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

// All core errors carry a dw_status so the C boundary is a direct mapping.
class Error : public std::runtime_error {
 public:
  Error(dw_status code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  dw_status code() const { return code_; }

 private:
  dw_status code_;
};

[[noreturn]] inline void fail(dw_status code, const std::string& what) {
  throw Error(code, what);
}

// Little-endian fixed-width field codec used by every on-disk structure.
inline void put_u16(uint8_t* p, uint16_t v) {
  p[0] = uint8_t(v);
  p[1] = uint8_t(v >> 8);
}
inline void put_u32(uint8_t* p, uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = uint8_t(v >> (8 * i));
}
inline void put_u64(uint8_t* p, uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = uint8_t(v >> (8 * i));
}
inline uint16_t get_u16(const uint8_t* p) {
  return uint16_t(p[0]) | uint16_t(p[1]) << 8;
}
inline uint32_t get_u32(const uint8_t* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= uint32_t(p[i]) << (8 * i);
  return v;
}
inline uint64_t get_u64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t(p[i]) << (8 * i);
  return v;
}

// Bit o of a block: little-endian within the byte.
inline int bit_at(ByteView data, uint64_t o) {
  return (data[o / 8] >> (o % 8)) & 1;
}

}  // namespace detworam
