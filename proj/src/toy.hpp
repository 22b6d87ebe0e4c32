#pragma once

// Toy deterministic WoORAM: M = N, an in-memory position map of physical
// locations, and a full main-area refresh every N writes.

#include "crypto.hpp"
#include "drive.hpp"

namespace detworam {

class ToyWoram : public OramDrive {
 public:
  ToyWoram(uint32_t block_bytes, uint64_t n, const CipherKey& key);

  uint32_t block_bytes() const override { return store_.block_bytes(); }
  uint64_t logical_blocks() const override { return n_; }
  std::string scheme_name() const override { return "toy"; }
  BlockStore& device() override { return store_; }

  Bytes read(uint64_t a) override;
  void write(uint64_t a, ByteView d) override;

  uint64_t counter() const { return i_; }

 private:
  Bytes decrypt_slot(uint64_t idx);

  uint64_t n_;
  MemStore store_;  // [0,N) main, [N,2N) holding
  BlockCipher cipher_;
  uint64_t i_ = 0;
  uint64_t refresh_passes_ = 0;
  std::vector<uint64_t> pos_;  // logical -> physical in [0,2N)
};

}  // namespace detworam
