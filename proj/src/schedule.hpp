#pragma once

// Deterministic write-schedule arithmetic shared by every WoORAM variant.

#include "common.hpp"

namespace detworam {

struct Geometry {
  uint64_t num_main;     // N
  uint64_t num_holding;  // M
  uint32_t unit_bytes;   // size of one storage unit (block or trie node)
};

// Main-area interval [start, end) to refresh at write step i, as counts of
// addresses mod N.  The interval may be empty and may wrap: when end < start
// it denotes [start,N) followed by [0,end).  Exact integer arithmetic; the
// i*N product is taken at 128 bits so the floor never suffers rounding.
struct RefreshRange {
  uint64_t start;
  uint64_t end;
  uint64_t count;  // number of addresses in the interval

  template <typename Fn>
  void for_each(uint64_t n, Fn&& fn) const {
    uint64_t a = start;
    for (uint64_t k = 0; k < count; ++k) {
      fn(a);
      if (++a == n) a = 0;
    }
  }
};

inline RefreshRange refresh_range(uint64_t i, uint64_t n, uint64_t m) {
  using u128 = unsigned __int128;
  u128 lo = (u128(i) * n) / m;
  u128 hi = (u128(i) + 1) * n / m;
  RefreshRange r;
  r.start = uint64_t(lo % n);
  r.end = uint64_t(hi % n);
  r.count = uint64_t(hi - lo);
  return r;
}

// Lowest bit position where the two equal-length buffers differ, plus that
// bit of d_new.  Equal buffers yield offset 0 and bit 0 of d_new, which
// still satisfies the read-side check because the "stale" copy is not
// actually stale.
struct BitDiff {
  uint64_t offset;
  int bit;
};

inline BitDiff bit_diff(ByteView d_new, ByteView d_old) {
  if (d_new.size() != d_old.size())
    fail(DW_ERR_SIZE_MISMATCH, "bit_diff on unequal lengths");
  for (size_t b = 0; b < d_new.size(); ++b) {
    uint8_t x = d_new[b] ^ d_old[b];
    if (x) {
      uint64_t o = b * 8 + uint64_t(__builtin_ctz(x));
      return BitDiff{o, bit_at(d_new, o)};
    }
  }
  return BitDiff{0, bit_at(d_new, 0)};
}

}  // namespace detworam
