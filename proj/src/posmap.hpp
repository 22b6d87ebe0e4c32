#pragma once

// Position map pointer (a_h, o, q) and the abstract map interface.  The
// pointer locates a possibly-fresher holding-area copy plus a one-bit
// staleness witness: bit o of the main copy equal to q means the main copy
// is fresh.

#include "common.hpp"

namespace detworam {

struct PosPointer {
  static constexpr uint32_t kNull = 0xFFFFFFFFu;

  uint32_t holding_index = kNull;  // a_h, relative to the holding area
  uint16_t bit_offset = 0;         // o, in [0, 8*unit_bytes)
  uint16_t diff_bit = 0;           // q, only bit 0 is meaningful

  bool is_null() const { return holding_index == kNull; }

  static constexpr size_t kWireBytes = 8;
  void store(uint8_t* p) const {
    put_u32(p, holding_index);
    put_u16(p + 4, bit_offset);
    put_u16(p + 6, diff_bit & 1);
  }
  static PosPointer parse(const uint8_t* p) {
    PosPointer r;
    r.holding_index = get_u32(p);
    r.bit_offset = get_u16(p + 4);
    r.diff_bit = get_u16(p + 6) & 1;
    return r;
  }
  friend bool operator==(const PosPointer& a, const PosPointer& b) {
    if (a.is_null() && b.is_null()) return true;
    return a.holding_index == b.holding_index && a.bit_offset == b.bit_offset &&
           (a.diff_bit & 1) == (b.diff_bit & 1);
  }
};

class PositionMap {
 public:
  virtual ~PositionMap() = default;
  // Returns the pointer most recently set for a, or a null pointer.
  virtual PosPointer getpos(uint64_t a) = 0;
  virtual void setpos(uint64_t a, const PosPointer& ptr) = 0;
};

// Plain in-memory map; used by small schemes and as an isolation harness
// for the write engine.
class MemPositionMap : public PositionMap {
 public:
  explicit MemPositionMap(uint64_t n) : map_(n) {}
  PosPointer getpos(uint64_t a) override { return map_.at(a); }
  void setpos(uint64_t a, const PosPointer& ptr) override { map_.at(a) = ptr; }

 private:
  std::vector<PosPointer> map_;
};

}  // namespace detworam
