#pragma once

// The assembled DetWoORAM container: data WoORAM + trie position WoORAM
// over one block device, with an encrypted superblock carrying the client
// state (counters, root trie node, and the interleaved in-flight refresh
// half).  Everything else on the device is reconstructible from those.

#include "backends.hpp"
#include "drive.hpp"
#include "trie.hpp"

namespace detworam {

struct DetConfig {
  uint32_t block_bytes = 4096;
  uint64_t num_main = 0;     // N
  uint64_t num_holding = 0;  // M; 0 means 3N
  uint32_t branch = 64;
  LayoutMode mode = LayoutMode::Segmented;
};

inline constexpr char kMagic[8] = {'D', 'W', 'O', 'R', 'A', 'M', '0', '1'};
inline constexpr uint32_t kVersion = 1;

class DetWoram : public OramDrive {
 public:
  static std::unique_ptr<DetWoram> create(std::unique_ptr<BlockStore> store,
                                          const DetConfig& cfg,
                                          const CipherKey& key);
  static std::unique_ptr<DetWoram> open(std::unique_ptr<BlockStore> store,
                                        const CipherKey& key);

  static std::unique_ptr<DetWoram> create_file(const std::string& path,
                                               const DetConfig& cfg,
                                               const CipherKey& key);
  static std::unique_ptr<DetWoram> open_file(const std::string& path,
                                             const CipherKey& key);
  // In-memory container; sparse backing keeps huge geometries affordable
  // (untouched main blocks are synthesized by the deterministic
  // initialization cipher stream).
  static std::unique_ptr<DetWoram> create_mem(const DetConfig& cfg,
                                              const CipherKey& key,
                                              bool sparse = false);

  // Size of a container with this configuration, in blocks.
  static uint64_t container_blocks(const DetConfig& cfg);

  uint32_t block_bytes() const override { return plan_.block_bytes; }
  uint64_t logical_blocks() const override { return plan_.num_main; }
  std::string scheme_name() const override {
    return plan_.mode == LayoutMode::Segmented ? "det-seg" : "det-ilv";
  }
  BlockStore& device() override { return *store_; }
  uint64_t payload_base() const override { return 1; }

  Bytes read(uint64_t a) override;
  void write(uint64_t a, ByteView d) override;
  void persist() override;
  void close() override;

  void set_lazy_state(bool lazy) { lazy_state_ = lazy; }
  const LayoutPlan& plan() const { return plan_; }
  const WoramState& state() const { return state_; }
  TriePosMap& posmap() { return *trie_; }
  BlockCipher& cipher() { return cipher_; }

  // Test hook, see DetEngine.
  void debug_skip_refreshes(bool skip) {
    data_engine_->debug_skip_refreshes(skip);
  }

 private:
  DetWoram(std::unique_ptr<BlockStore> store, const CipherKey& key,
           const LayoutPlan& plan);
  void build_stack();
  void persist_superblock();
  void load_superblock();
  Bytes encode_superblock();

  std::unique_ptr<BlockStore> store_;
  BlockCipher cipher_;
  LayoutPlan plan_;
  WoramState state_;

  RangeRefreshPolicy range_policy_;
  std::unique_ptr<SegDataBackend> seg_data_;
  std::unique_ptr<PackedNodeBackend> seg_nodes_;
  std::unique_ptr<IlvBackend> ilv_;
  std::unique_ptr<DetEngine> data_engine_;
  std::unique_ptr<DetEngine> pos_engine_;
  std::unique_ptr<TriePosMap> trie_;

  bool lazy_state_ = false;
  bool closed_ = false;
};

// Geometry fields parsed from a superblock without the key.
struct SuperblockInfo {
  uint32_t block_bytes;
  uint64_t num_main, num_holding;
  uint32_t branch;
  LayoutMode mode;
  uint64_t i, i_p;
  uint64_t total_blocks;
};
SuperblockInfo peek_superblock(const std::string& path);

}  // namespace detworam
