#include "engine.hpp"

namespace detworam {

void RangeRefreshPolicy::refresh(DetEngine& eng, uint64_t i, PositionMap& pm) {
  const auto& g = eng.geometry();
  refresh_range(i, g.num_main, g.num_holding)
      .for_each(g.num_main, [&](uint64_t a) { eng.refresh_main(a, pm); });
}

Bytes DetEngine::read(uint64_t a, PositionMap& pm) {
  if (a >= geo_.num_main)
    fail(DW_ERR_ADDRESS_RANGE, "logical address " + std::to_string(a) +
                                   " out of range [0," +
                                   std::to_string(geo_.num_main) + ")");
  PosPointer ptr = pm.getpos(a);
  Bytes main_copy = backend_.read_main(a);
  if (ptr.is_null()) return main_copy;
  if (ptr.bit_offset >= 8 * geo_.unit_bytes || ptr.holding_index >= geo_.num_holding)
    fail(DW_ERR_MALFORMED, "position pointer out of bounds");
  if (bit_at(main_copy, ptr.bit_offset) == (ptr.diff_bit & 1)) return main_copy;
  return backend_.read_holding(ptr.holding_index);
}

void DetEngine::write(uint64_t a, ByteView d, PositionMap& pm) {
  if (a >= geo_.num_main)
    fail(DW_ERR_ADDRESS_RANGE, "logical address " + std::to_string(a) +
                                   " out of range [0," +
                                   std::to_string(geo_.num_main) + ")");
  if (d.size() != geo_.unit_bytes)
    fail(DW_ERR_SIZE_MISMATCH, "write payload must be one unit");

  uint64_t holding_slot = counter_ % geo_.num_holding;
  backend_.write_holding(holding_slot, d);

  BitDiff diff = bit_diff(d, backend_.read_main(a));
  PosPointer ptr;
  ptr.holding_index = uint32_t(holding_slot);
  ptr.bit_offset = uint16_t(diff.offset);
  ptr.diff_bit = uint16_t(diff.bit);
  pm.setpos(a, ptr);

  finish_write(pm);
}

void DetEngine::write_dummy(PositionMap& pm) {
  Bytes zeros(geo_.unit_bytes, 0);
  backend_.write_holding(counter_ % geo_.num_holding, zeros);
  finish_write(pm);
}

void DetEngine::finish_write(PositionMap& pm) {
  if (!debug_skip_refreshes_) policy_.refresh(*this, counter_, pm);
  ++counter_;
}

}  // namespace detworam
