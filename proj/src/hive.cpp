#include "hive.hpp"

namespace detworam {

HiveWoram::HiveWoram(uint32_t block_bytes, uint64_t n, uint64_t m,
                     const CipherKey& key, uint64_t seed, uint32_t k)
    : n_(n),
      m_(m),
      k_(k),
      payload_bytes_(block_bytes),
      store_(uint32_t(BlockCipher::iv_blob_size(8 + block_bytes)), m),
      cipher_(key),
      rng_(seed),
      pos_(n, kNone),
      slot_addr_(m, kNone) {
  if (m < 2 * n) fail(DW_ERR_INVALID_ARG, "HiVE needs M >= 2N");
  if (k == 0) fail(DW_ERR_INVALID_ARG, "k must be positive");
}

bool HiveWoram::slot_free(uint64_t r) const {
  uint64_t a = slot_addr_[r];
  return a == kNone || pos_[a] != r;
}

void HiveWoram::store_slot(uint64_t r, uint64_t addr, ByteView d) {
  Bytes plain(8 + payload_bytes_);
  put_u64(plain.data(), addr);
  std::memcpy(plain.data() + 8, d.data(), d.size());
  Bytes blob = cipher_.iv_encrypt(plain);
  blob.resize(store_.block_bytes(), 0);
  store_.write_block(r, blob);
}

std::pair<uint64_t, Bytes> HiveWoram::load_slot(uint64_t r) {
  Bytes blob = store_.read_block(r);
  blob.resize(BlockCipher::iv_blob_size(8 + payload_bytes_));
  Bytes plain = cipher_.iv_decrypt(blob);
  if (plain.size() != 8 + payload_bytes_)
    fail(DW_ERR_MALFORMED, "slot payload has wrong size");
  uint64_t addr = get_u64(plain.data());
  return {addr, Bytes(plain.begin() + 8, plain.end())};
}

Bytes HiveWoram::read(uint64_t a) {
  if (a >= n_) fail(DW_ERR_ADDRESS_RANGE, "address out of range");
  // Freshest copy may still sit in the stash.
  for (auto it = stash_.rbegin(); it != stash_.rend(); ++it)
    if (it->first == a) return it->second;
  if (pos_[a] == kNone) return Bytes(payload_bytes_, 0);
  auto [addr, data] = load_slot(pos_[a]);
  if (addr != a) fail(DW_ERR_INTERNAL, "position map points at a stale slot");
  return data;
}

void HiveWoram::write(uint64_t a, ByteView d) {
  if (a >= n_) fail(DW_ERR_ADDRESS_RANGE, "address out of range");
  if (d.size() != payload_bytes_)
    fail(DW_ERR_SIZE_MISMATCH, "write payload must be one block");
  stash_.emplace_back(a, Bytes(d.begin(), d.end()));
  stash_max_ = std::max<uint64_t>(stash_max_, stash_.size());

  for (uint32_t step = 0; step < k_; ++step) {
    uint64_t r = std::uniform_int_distribution<uint64_t>(0, m_ - 1)(rng_);
    if (slot_free(r) && !stash_.empty()) {
      auto [addr, data] = stash_.front();
      stash_.pop_front();
      store_slot(r, addr, data);
      slot_addr_[r] = addr;
      pos_[addr] = r;  // the previous slot, if any, is now free
    } else if (slot_addr_[r] == kNone) {
      // Virgin slot: rewrite as an encrypted empty pair.
      store_slot(r, kNone, Bytes(payload_bytes_, 0));
      slot_addr_[r] = kNone;
    } else {
      // Re-encrypt in place under a fresh IV.
      auto [addr, data] = load_slot(r);
      store_slot(r, addr, data);
    }
  }
}

}  // namespace detworam
