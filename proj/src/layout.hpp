#pragma once

// Physical placement of the WoORAM regions on one device.
//
// SEGMENTED (the default): [superblock | data main | data holding |
// position main, packed | position holding, packed].  Trie nodes are packed
// `pack` per block behind two open buffers that fill sequentially and flush
// once full, so each of the four regions sees its own circular sequential
// write pattern.
//
// INTERLEAVED: requires M = 2N.  The payload is a single region of 4N
// blocks arranged as repeating units h_t, (main half + trie payload), and
// every logical write lands exactly 2 physically consecutive blocks.  Main
// block a is split: its front half lives in unit 2a's combined block, its
// back half in unit 2a+1's.

#include "crypto.hpp"
#include "trie.hpp"

namespace detworam {

enum class LayoutMode : uint32_t { Segmented = 0, Interleaved = 1 };

enum class Half : uint8_t { Front, Back };

struct HalfBlockRef {
  uint64_t index;
  Half half;
};

struct LayoutPlan {
  LayoutMode mode;
  uint32_t block_bytes;
  uint64_t num_main;     // N
  uint64_t num_holding;  // M
  TrieParams trie;
  uint32_t pack = 0;  // nodes per packed block (segmented)

  uint64_t data_main_base = 0, data_main_blocks = 0;
  uint64_t data_holding_base = 0, data_holding_blocks = 0;
  uint64_t pos_main_base = 0, pos_main_blocks = 0;
  uint64_t pos_holding_base = 0, pos_holding_blocks = 0;
  uint64_t payload_base = 0, payload_blocks = 0;  // interleaved
  uint64_t total_blocks = 0;

  uint32_t half_bytes() const { return block_bytes / 2; }
  // Nodes carried in each interleaved step: one trie path (dummies
  // included) plus the single refreshed node.
  uint32_t step_nodes() const {
    return trie.path_writes + (trie.node_count ? 1 : 0);
  }
  uint32_t step_payload_bytes() const {
    return uint32_t(1 + size_t(step_nodes()) * trie.node_bytes);
  }

  uint64_t holding_block(uint64_t unit) const { return payload_base + 2 * unit; }
  uint64_t combined_block(uint64_t unit) const {
    return payload_base + 2 * unit + 1;
  }
};

LayoutPlan plan_layout(uint32_t block_bytes, uint64_t n, uint64_t m,
                       uint32_t branch, LayoutMode mode);

// Placement of main block a: one index in SEGMENTED mode, both half-block
// references in INTERLEAVED mode.
uint64_t resolve_main_segmented(const LayoutPlan& plan, uint64_t a);
std::pair<HalfBlockRef, HalfBlockRef> resolve_main_interleaved(
    const LayoutPlan& plan, uint64_t a);

}  // namespace detworam
