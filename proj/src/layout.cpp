#include "layout.hpp"

namespace detworam {

LayoutPlan plan_layout(uint32_t block_bytes, uint64_t n, uint64_t m,
                       uint32_t branch, LayoutMode mode) {
  if (block_bytes == 0 || block_bytes % 16 != 0)
    fail(DW_ERR_INVALID_ARG, "block size must be a positive multiple of 16");
  if (block_bytes > 8192)
    fail(DW_ERR_INVALID_ARG,
         "block size above 8192 exceeds the pointer bit-offset width");
  if (n == 0 || m == 0) fail(DW_ERR_INVALID_ARG, "N and M must be positive");
  if (m >= PosPointer::kNull || n >= PosPointer::kNull)
    fail(DW_ERR_INVALID_ARG, "geometry exceeds pointer width");

  LayoutPlan p;
  p.mode = mode;
  p.block_bytes = block_bytes;
  p.num_main = n;
  p.num_holding = m;
  p.trie = trie_params(n, branch);
  if (p.trie.node_count > 0 &&
      p.trie.node_bytes > BlockCipher::iv_capacity(block_bytes))
    fail(DW_ERR_INFEASIBLE, "one trie node does not fit in a block");
  if (p.trie.holding_count >= PosPointer::kNull)
    fail(DW_ERR_INVALID_ARG, "position holding area exceeds pointer width");

  if (mode == LayoutMode::Segmented) {
    if (p.trie.node_count > 0) {
      p.pack = uint32_t(BlockCipher::iv_capacity(block_bytes) / p.trie.node_bytes);
      if (p.pack == 0) fail(DW_ERR_INFEASIBLE, "cannot pack trie nodes");
      p.pos_main_blocks = (p.trie.node_count + p.pack - 1) / p.pack;
      p.pos_holding_blocks = (p.trie.holding_count + p.pack - 1) / p.pack;
    }
    p.data_main_base = 1;
    p.data_main_blocks = n;
    p.data_holding_base = p.data_main_base + p.data_main_blocks;
    p.data_holding_blocks = m;
    p.pos_main_base = p.data_holding_base + p.data_holding_blocks;
    p.pos_holding_base = p.pos_main_base + p.pos_main_blocks;
    p.total_blocks = p.pos_holding_base + p.pos_holding_blocks;
    return p;
  }

  // Interleaved.
  if (m != 2 * n)
    fail(DW_ERR_INFEASIBLE, "interleaved layout requires M = 2N");
  if (!feasibility(n, branch, uint64_t(block_bytes) * 8))
    fail(DW_ERR_INFEASIBLE,
         "trie path does not fit the half-block packing budget");
  if (BlockCipher::iv_blob_size(p.step_payload_bytes()) > p.half_bytes())
    fail(DW_ERR_INFEASIBLE,
         "serialized step payload does not fit in half a block");
  p.payload_base = 1;
  p.payload_blocks = 4 * n;
  p.total_blocks = 1 + p.payload_blocks;
  return p;
}

uint64_t resolve_main_segmented(const LayoutPlan& plan, uint64_t a) {
  if (a >= plan.num_main) fail(DW_ERR_ADDRESS_RANGE, "main address range");
  return plan.data_main_base + a;
}

std::pair<HalfBlockRef, HalfBlockRef> resolve_main_interleaved(
    const LayoutPlan& plan, uint64_t a) {
  if (a >= plan.num_main) fail(DW_ERR_ADDRESS_RANGE, "main address range");
  return {HalfBlockRef{plan.combined_block(2 * a), Half::Front},
          HalfBlockRef{plan.combined_block(2 * a + 1), Half::Back}};
}

}  // namespace detworam
