#pragma once

// HiVE-WoORAM baseline: every logical write pushes to a stash and then
// rewrites k uniformly random slots, placing stash items into the free
// ones.  A slot is free iff the position map does not map its stored
// address back to it.  The position map is held in memory; each slot holds
// an encrypted (address, data) pair under a fresh random IV.

#include <deque>
#include <random>

#include "crypto.hpp"
#include "drive.hpp"

namespace detworam {

class HiveWoram : public OramDrive {
 public:
  HiveWoram(uint32_t block_bytes, uint64_t n, uint64_t m, const CipherKey& key,
            uint64_t seed, uint32_t k = 3);

  uint32_t block_bytes() const override { return payload_bytes_; }
  uint64_t logical_blocks() const override { return n_; }
  std::string scheme_name() const override { return "hive"; }
  BlockStore& device() override { return store_; }

  Bytes read(uint64_t a) override;
  void write(uint64_t a, ByteView d) override;

  uint32_t k() const { return k_; }
  uint64_t stash_size() const { return stash_.size(); }
  uint64_t stash_max() const { return stash_max_; }
  // Free iff the stored address does not map back here.
  bool slot_free(uint64_t r) const;

 private:
  static constexpr uint64_t kNone = ~uint64_t(0);

  void store_slot(uint64_t r, uint64_t addr, ByteView d);
  std::pair<uint64_t, Bytes> load_slot(uint64_t r);

  uint64_t n_, m_;
  uint32_t k_;
  uint32_t payload_bytes_;
  MemStore store_;
  BlockCipher cipher_;
  std::mt19937_64 rng_;
  std::vector<uint64_t> pos_;        // address -> slot
  std::vector<uint64_t> slot_addr_;  // slot -> last stored address
  std::deque<std::pair<uint64_t, Bytes>> stash_;
  uint64_t stash_max_ = 0;
};

}  // namespace detworam
