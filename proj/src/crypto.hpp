#pragma once

// Block encryption services.  Data blocks use AES-256-CTR keyed by the
// (epoch, physical index) pair: the 128-bit counter block is
// epoch(64) || physical_index(32) || intra-block counter(32), big-endian,
// so no IV is ever stored.  Packed trie blocks use AES-256-CBC with one
// fresh random IV kept in-band at offset 0 of the blob.
//
// All transforms are stateless and safe for concurrent use under a shared
// key.  Epoch counters are owned by the engine's single-writer context.

#include <array>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

#include "common.hpp"

namespace detworam {

inline constexpr size_t kKeyBytes = 32;
inline constexpr size_t kIvBytes = 16;

struct CipherKey {
  std::array<uint8_t, kKeyBytes> bytes;

  static CipherKey random();
  static CipherKey load(const std::string& path);
  void save(const std::string& path) const;
};

struct CtrContext {
  uint64_t epoch;
  uint32_t index;
};

// Debug aid: records every (epoch, index) pair used for encryption and
// fails on reuse.  Attach one per key when instrumenting a run.
class CtrAudit {
 public:
  void record(const CtrContext& ctx);
  uint64_t contexts_seen() const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<uint64_t, std::unordered_set<uint32_t>> seen_;
  uint64_t count_ = 0;
};

void random_bytes(std::span<uint8_t> out);

class BlockCipher {
 public:
  explicit BlockCipher(const CipherKey& key) : key_(key) {}

  // Counter mode; deterministic given (key, ctx, input) and its own inverse.
  void ctr_encrypt(const CtrContext& ctx, ByteView in,
                   std::span<uint8_t> out) const;
  void ctr_decrypt(const CtrContext& ctx, ByteView in,
                   std::span<uint8_t> out) const;
  Bytes ctr_encrypt(const CtrContext& ctx, ByteView in) const;
  Bytes ctr_decrypt(const CtrContext& ctx, ByteView in) const;

  // CBC with a fresh random IV prepended; PKCS#7 padded, so the output is
  // kIvBytes + (len/16 + 1)*16 bytes.
  Bytes iv_encrypt(ByteView plaintext) const;
  Bytes iv_decrypt(ByteView blob) const;

  // Output size of iv_encrypt for a given plaintext length.
  static size_t iv_blob_size(size_t plaintext_len) {
    return kIvBytes + (plaintext_len / 16 + 1) * 16;
  }
  // Largest plaintext whose iv_encrypt output fits in cap bytes.
  static size_t iv_capacity(size_t cap) {
    if (cap < kIvBytes + 16) return 0;
    return ((cap - kIvBytes) / 16) * 16 - 1;
  }

  void attach_audit(CtrAudit* a) { audit_ = a; }

 private:
  void ctr_run(const CtrContext& ctx, ByteView in, std::span<uint8_t> out,
               bool encrypting) const;
  CipherKey key_;
  CtrAudit* audit_ = nullptr;
};

}  // namespace detworam
