#include "toy.hpp"

#include "backends.hpp"

namespace detworam {

ToyWoram::ToyWoram(uint32_t block_bytes, uint64_t n, const CipherKey& key)
    : n_(n), store_(block_bytes, 2 * n), cipher_(key), pos_(n) {
  if (n == 0) fail(DW_ERR_INVALID_ARG, "N must be positive");
  // Main area starts as encrypted zeros; a fresh map points every address
  // at its own main slot.
  Bytes zeros(block_bytes, 0);
  for (uint64_t a = 0; a < n_; ++a) {
    store_.write_block(a, cipher_.ctr_encrypt(CtrContext{0, uint32_t(a)}, zeros));
    pos_[a] = a;
  }
}

Bytes ToyWoram::decrypt_slot(uint64_t idx) {
  uint64_t epoch;
  if (idx < n_) {
    epoch = refresh_passes_;  // whole main area moves in lockstep
  } else {
    epoch = cyclic_epoch(i_, n_, idx - n_);
  }
  return cipher_.ctr_decrypt(CtrContext{epoch, uint32_t(idx)},
                             store_.read_block(idx));
}

Bytes ToyWoram::read(uint64_t a) {
  if (a >= n_) fail(DW_ERR_ADDRESS_RANGE, "address out of range");
  return decrypt_slot(pos_[a]);
}

void ToyWoram::write(uint64_t a, ByteView d) {
  if (a >= n_) fail(DW_ERR_ADDRESS_RANGE, "address out of range");
  if (d.size() != store_.block_bytes())
    fail(DW_ERR_SIZE_MISMATCH, "write payload must be one block");
  uint64_t slot = n_ + (i_ % n_);
  ++i_;
  store_.write_block(
      slot, cipher_.ctr_encrypt(
                CtrContext{cyclic_epoch(i_, n_, slot - n_), uint32_t(slot)}, d));
  pos_[a] = slot;

  if (i_ % n_ == 0) {
    // Refresh the whole main area from the freshest copies.  pos_[m] is
    // either m itself or a holding slot, so reading before rewriting m is
    // safe; main reads still use the previous pass's epoch.
    for (uint64_t m = 0; m < n_; ++m) {
      Bytes fresh = decrypt_slot(pos_[m]);
      store_.write_block(
          m, cipher_.ctr_encrypt(CtrContext{refresh_passes_ + 1, uint32_t(m)},
                                 fresh));
      pos_[m] = m;
    }
    ++refresh_passes_;
  }
}

}  // namespace detworam
