#pragma once

// Storage adapters binding the write engine to a device.  Each adapter
// derives counter-mode epochs from its own write counts — the cycle count
// of the region a block lives in — so nothing but the two write counters
// has to survive a restart.

#include <deque>
#include <optional>

#include "device.hpp"
#include "engine.hpp"
#include "layout.hpp"

namespace detworam {

// Shared persistent counters of one DetWoORAM container.
struct WoramState {
  uint64_t i = 0;    // data write counter
  uint64_t i_p = 0;  // position write counter
};

// Epoch of the slot last written in a region that is cycled sequentially:
// `writes_done` writes have happened, region has `size` slots, slot was
// written with epoch floor(c/size)+1 where c was the counter at write time.
// Epoch 0 is the initialization pass.
inline uint64_t cyclic_epoch(uint64_t writes_done, uint64_t size,
                             uint64_t slot) {
  uint64_t cycles = writes_done / size, pos = writes_done % size;
  return slot < pos ? cycles + 1 : cycles;
}

// ---- segmented ------------------------------------------------------

class SegDataBackend : public WoramBackend {
 public:
  SegDataBackend(const LayoutPlan& plan, BlockStore& store,
                 BlockCipher& cipher, const WoramState& state);

  Bytes read_main(uint64_t a) override;
  void write_main(uint64_t a, ByteView d) override;
  Bytes read_holding(uint64_t j) override;
  void write_holding(uint64_t j, ByteView d) override;

  uint64_t main_writes() const { return main_writes_; }

 private:
  const LayoutPlan& plan_;
  BlockStore& store_;
  BlockCipher& cipher_;
  uint64_t holding_writes_;
  uint64_t main_writes_;
};

// Packed trie-node storage: nodes are appended through two one-block open
// buffers (position holding / position main) that flush once filled; a
// partial buffer is flushed padded on close and reloaded on open.
class PackedNodeBackend : public WoramBackend {
 public:
  PackedNodeBackend(const LayoutPlan& plan, BlockStore& store,
                    BlockCipher& cipher, const WoramState& state);

  Bytes read_main(uint64_t a) override;
  void write_main(uint64_t a, ByteView d) override;
  Bytes read_holding(uint64_t j) override;
  void write_holding(uint64_t j, ByteView d) override;

  void flush_partial();  // clean-shutdown flush of both open buffers

 private:
  struct PackBuf {
    bool open = false;
    bool dirty = false;
    uint64_t block = 0;           // physical index
    std::vector<Bytes> slots;     // pack nodes
  };
  uint64_t holding_cursor() const;  // next holding node index
  uint64_t main_cursor() const;     // next refreshed node index
  void load(PackBuf& buf, uint64_t block, bool virgin);
  void flush(PackBuf& buf);
  Bytes read_node(PackBuf& buf, uint64_t region_base, uint64_t node_index);
  void write_node(PackBuf& buf, uint64_t region_base, uint64_t region_nodes,
                  uint64_t node_index, ByteView d, bool virgin);

  const LayoutPlan& plan_;
  BlockStore& store_;
  BlockCipher& cipher_;
  const WoramState& state_;
  PackBuf holding_buf_;
  PackBuf main_buf_;
  uint64_t holding_writes_;
  uint64_t main_writes_;
};

// ---- interleaved ----------------------------------------------------

// One object owns the per-step staging and exposes the data-block and
// trie-node views of the payload region plus the half-block refresh
// policy.  Step protocol, driven by the container:
//   begin_step(); engine.write(...); end_step();
// which emits exactly two physical writes at consecutive indices.
class IlvBackend {
 public:
  IlvBackend(const LayoutPlan& plan, BlockStore& store, BlockCipher& cipher,
             WoramState& state);

  WoramBackend& data_view() { return data_view_; }
  WoramBackend& node_view() { return node_view_; }
  RefreshPolicy& data_refresh_policy() { return policy_; }

  void begin_step();
  void end_step();

  // In-flight half-refresh; the back half is part of persistent state.
  bool inflight() const { return snapshot_.has_value(); }
  uint64_t inflight_addr() const { return snapshot_->addr; }
  Bytes inflight_back_half() const;
  void restore_inflight(uint64_t addr, ByteView back_half);

 private:
  struct Snapshot {
    uint64_t addr;
    Bytes block;  // full plaintext main block
  };

  class DataView : public WoramBackend {
   public:
    explicit DataView(IlvBackend& o) : o_(o) {}
    Bytes read_main(uint64_t a) override { return o_.data_read_main(a); }
    void write_main(uint64_t, ByteView) override {
      fail(DW_ERR_INTERNAL, "interleaved main halves are staged, not written");
    }
    Bytes read_holding(uint64_t j) override { return o_.data_read_holding(j); }
    void write_holding(uint64_t j, ByteView d) override {
      o_.data_write_holding(j, d);
    }

   private:
    IlvBackend& o_;
  };

  class NodeView : public WoramBackend {
   public:
    explicit NodeView(IlvBackend& o) : o_(o) {}
    Bytes read_main(uint64_t a) override { return o_.node_read_main(a); }
    void write_main(uint64_t a, ByteView d) override {
      o_.node_write_main(a, d);
    }
    Bytes read_holding(uint64_t j) override { return o_.node_read_holding(j); }
    void write_holding(uint64_t j, ByteView d) override {
      o_.node_write_holding(j, d);
    }

   private:
    IlvBackend& o_;
  };

  class HalfRefreshPolicy : public RefreshPolicy {
   public:
    explicit HalfRefreshPolicy(IlvBackend& o) : o_(o) {}
    void refresh(DetEngine& eng, uint64_t i, PositionMap& pm) override {
      o_.stage_half_refresh(eng, i, pm);
    }

   private:
    IlvBackend& o_;
  };

  Bytes data_read_main(uint64_t a);
  Bytes data_read_holding(uint64_t j);
  void data_write_holding(uint64_t j, ByteView d);
  Bytes node_read_main(uint64_t a);
  void node_write_main(uint64_t a, ByteView d);
  Bytes node_read_holding(uint64_t j);
  void node_write_holding(uint64_t j, ByteView d);
  void stage_half_refresh(DetEngine& eng, uint64_t i, PositionMap& pm);

  Bytes decrypt_half(uint64_t unit, Half half);
  Bytes committed_payload_node(uint64_t step, uint32_t slot);

  const LayoutPlan& plan_;
  BlockStore& store_;
  BlockCipher& cipher_;
  WoramState& state_;

  DataView data_view_;
  NodeView node_view_;
  HalfRefreshPolicy policy_;

  bool in_step_ = false;
  uint64_t step_ip_start_ = 0;
  std::vector<Bytes> staged_nodes_;
  std::optional<std::pair<uint64_t, Bytes>> staged_refresh_;
  std::optional<Bytes> staged_half_;
  bool clear_snapshot_after_flush_ = false;

  std::optional<Snapshot> snapshot_;
  uint64_t holding_writes_;
  uint64_t combined_writes_;
};

// Initialization writes for a fresh container: pre-encrypts the main areas
// so the device never exposes plaintext zeros.  `lazy` uses the sparse
// store's deterministic fill for the counter-mode regions.
void init_regions(const LayoutPlan& plan, BlockStore& store,
                  BlockCipher& cipher, bool lazy_data_main);

}  // namespace detworam
