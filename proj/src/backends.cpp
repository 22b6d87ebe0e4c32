#include "backends.hpp"

namespace detworam {

// ---- segmented data -------------------------------------------------

SegDataBackend::SegDataBackend(const LayoutPlan& plan, BlockStore& store,
                               BlockCipher& cipher, const WoramState& state)
    : plan_(plan), store_(store), cipher_(cipher) {
  holding_writes_ = state.i;
  // Refreshes completed so far; exact by the de-amortized schedule.
  main_writes_ =
      uint64_t((unsigned __int128)(state.i) * plan.num_main / plan.num_holding);
}

Bytes SegDataBackend::read_main(uint64_t a) {
  uint64_t idx = plan_.data_main_base + a;
  Bytes raw = store_.read_block(idx);
  CtrContext ctx{cyclic_epoch(main_writes_, plan_.num_main, a), uint32_t(idx)};
  return cipher_.ctr_decrypt(ctx, raw);
}

void SegDataBackend::write_main(uint64_t a, ByteView d) {
  uint64_t idx = plan_.data_main_base + a;
  ++main_writes_;
  CtrContext ctx{cyclic_epoch(main_writes_, plan_.num_main, a), uint32_t(idx)};
  store_.write_block(idx, cipher_.ctr_encrypt(ctx, d));
}

Bytes SegDataBackend::read_holding(uint64_t j) {
  uint64_t idx = plan_.data_holding_base + j;
  uint64_t epoch = cyclic_epoch(holding_writes_, plan_.num_holding, j);
  if (epoch == 0) fail(DW_ERR_INTERNAL, "read of never-written holding slot");
  Bytes raw = store_.read_block(idx);
  return cipher_.ctr_decrypt(CtrContext{epoch, uint32_t(idx)}, raw);
}

void SegDataBackend::write_holding(uint64_t j, ByteView d) {
  uint64_t idx = plan_.data_holding_base + j;
  ++holding_writes_;
  uint64_t epoch = cyclic_epoch(holding_writes_, plan_.num_holding, j);
  store_.write_block(idx, cipher_.ctr_encrypt(CtrContext{epoch, uint32_t(idx)}, d));
}

// ---- packed trie nodes ----------------------------------------------

PackedNodeBackend::PackedNodeBackend(const LayoutPlan& plan, BlockStore& store,
                                     BlockCipher& cipher,
                                     const WoramState& state)
    : plan_(plan), store_(store), cipher_(cipher), state_(state) {
  holding_writes_ = state.i_p;
  main_writes_ = uint64_t((unsigned __int128)(state.i_p) *
                          plan.trie.node_count / plan.trie.holding_count);
}

uint64_t PackedNodeBackend::holding_cursor() const {
  return holding_writes_ % plan_.trie.holding_count;
}

uint64_t PackedNodeBackend::main_cursor() const {
  return main_writes_ % plan_.trie.node_count;
}

void PackedNodeBackend::load(PackBuf& buf, uint64_t block, bool virgin) {
  buf.block = block;
  buf.open = true;
  buf.dirty = false;
  if (virgin) {
    // Holding block the cursor has not reached yet: nothing live inside.
    buf.slots.assign(plan_.pack, Bytes(plan_.trie.node_bytes, 0));
    return;
  }
  Bytes blob = store_.read_block(block);
  size_t payload = size_t(plan_.pack) * plan_.trie.node_bytes;
  Bytes plain = cipher_.iv_decrypt(
      ByteView(blob.data(), BlockCipher::iv_blob_size(payload)));
  if (plain.size() != payload)
    fail(DW_ERR_MALFORMED, "packed trie block has wrong payload size");
  buf.slots.assign(plan_.pack, Bytes());
  for (uint32_t s = 0; s < plan_.pack; ++s)
    buf.slots[s].assign(plain.begin() + s * plan_.trie.node_bytes,
                        plain.begin() + (s + 1) * plan_.trie.node_bytes);
}

void PackedNodeBackend::flush(PackBuf& buf) {
  if (!buf.open || !buf.dirty) return;
  store_.write_block(buf.block,
                     pack_node_images(cipher_, buf.slots, plan_.block_bytes));
  buf.dirty = false;
}

Bytes PackedNodeBackend::read_node(PackBuf& buf, uint64_t region_base,
                                   uint64_t node_index) {
  uint64_t block = region_base + node_index / plan_.pack;
  uint32_t slot = uint32_t(node_index % plan_.pack);
  if (buf.open && buf.block == block) return buf.slots[slot];
  Bytes blob = store_.read_block(block);
  size_t payload = size_t(plan_.pack) * plan_.trie.node_bytes;
  Bytes plain = cipher_.iv_decrypt(
      ByteView(blob.data(), BlockCipher::iv_blob_size(payload)));
  return Bytes(plain.begin() + slot * plan_.trie.node_bytes,
               plain.begin() + (slot + 1) * plan_.trie.node_bytes);
}

void PackedNodeBackend::write_node(PackBuf& buf, uint64_t region_base,
                                   uint64_t region_nodes, uint64_t node_index,
                                   ByteView d, bool virgin) {
  uint64_t block = region_base + node_index / plan_.pack;
  if (!buf.open || buf.block != block) {
    flush(buf);
    load(buf, block, virgin);
  }
  buf.slots[node_index % plan_.pack].assign(d.begin(), d.end());
  buf.dirty = true;
  // Flush once the block's window is fully written (or the region wraps).
  if (node_index % plan_.pack == plan_.pack - 1 ||
      node_index == region_nodes - 1) {
    flush(buf);
    buf.open = false;
  }
}

Bytes PackedNodeBackend::read_main(uint64_t a) {
  if (a >= plan_.trie.node_count)
    fail(DW_ERR_ADDRESS_RANGE, "trie node index range");
  return read_node(main_buf_, plan_.pos_main_base, a);
}

void PackedNodeBackend::write_main(uint64_t a, ByteView d) {
  if (a != main_cursor())
    fail(DW_ERR_INTERNAL, "trie main refresh out of schedule order");
  // The main region is fully initialized at create, so it is never virgin.
  write_node(main_buf_, plan_.pos_main_base, plan_.trie.node_count, a, d,
             false);
  ++main_writes_;
}

Bytes PackedNodeBackend::read_holding(uint64_t j) {
  if (j >= plan_.trie.holding_count)
    fail(DW_ERR_ADDRESS_RANGE, "trie holding index range");
  return read_node(holding_buf_, plan_.pos_holding_base, j);
}

void PackedNodeBackend::write_holding(uint64_t j, ByteView d) {
  if (j != holding_cursor())
    fail(DW_ERR_INTERNAL, "trie holding write out of schedule order");
  // Until the cursor first enters a holding block there is nothing live in
  // it; afterwards it always carries a valid blob (full flush, or the
  // padded flush-on-close).
  bool virgin = holding_writes_ <= (j / plan_.pack) * plan_.pack;
  write_node(holding_buf_, plan_.pos_holding_base, plan_.trie.holding_count, j,
             d, virgin);
  ++holding_writes_;
}

void PackedNodeBackend::flush_partial() {
  flush(holding_buf_);
  flush(main_buf_);
}

// ---- interleaved ----------------------------------------------------

IlvBackend::IlvBackend(const LayoutPlan& plan, BlockStore& store,
                       BlockCipher& cipher, WoramState& state)
    : plan_(plan),
      store_(store),
      cipher_(cipher),
      state_(state),
      data_view_(*this),
      node_view_(*this),
      policy_(*this) {
  holding_writes_ = state.i;
  combined_writes_ = state.i;
}

void IlvBackend::begin_step() {
  if (in_step_) fail(DW_ERR_INTERNAL, "nested interleaved step");
  in_step_ = true;
  step_ip_start_ = state_.i_p;
  staged_nodes_.clear();
  staged_refresh_.reset();
  staged_half_.reset();
  clear_snapshot_after_flush_ = false;
}

void IlvBackend::end_step() {
  if (!in_step_) fail(DW_ERR_INTERNAL, "end_step without begin_step");
  if (staged_nodes_.size() != plan_.trie.path_writes ||
      bool(staged_refresh_) != (plan_.trie.node_count > 0) || !staged_half_)
    fail(DW_ERR_INTERNAL, "interleaved step staged the wrong payload");

  // [count | path nodes in write order | refreshed node]
  Bytes payload(plan_.step_payload_bytes(), 0);
  payload[0] = uint8_t(plan_.step_nodes());
  size_t off = 1;
  for (const auto& n : staged_nodes_) {
    std::memcpy(payload.data() + off, n.data(), n.size());
    off += n.size();
  }
  if (staged_refresh_) {
    std::memcpy(payload.data() + off, staged_refresh_->second.data(),
                staged_refresh_->second.size());
  }

  uint64_t i = combined_writes_;
  uint64_t unit = i % plan_.num_holding;
  uint64_t block = plan_.combined_block(unit);
  Bytes out(plan_.block_bytes, 0);
  CtrContext ctx{i / plan_.num_holding + 1, uint32_t(block)};
  cipher_.ctr_encrypt(ctx, *staged_half_,
                      std::span<uint8_t>(out.data(), plan_.half_bytes()));
  Bytes blob = cipher_.iv_encrypt(payload);
  std::memcpy(out.data() + plan_.half_bytes(), blob.data(), blob.size());
  store_.write_block(block, out);
  ++combined_writes_;

  if (clear_snapshot_after_flush_) snapshot_.reset();
  staged_nodes_.clear();
  staged_refresh_.reset();
  staged_half_.reset();
  in_step_ = false;
}

Bytes IlvBackend::decrypt_half(uint64_t unit, Half half) {
  uint64_t block = plan_.combined_block(unit);
  uint64_t epoch = cyclic_epoch(combined_writes_, plan_.num_holding, unit);
  Bytes raw = store_.read_block(block);
  Bytes plain(plan_.half_bytes());
  cipher_.ctr_decrypt(CtrContext{epoch, uint32_t(block)},
                      ByteView(raw.data(), plan_.half_bytes()), plain);
  (void)half;
  return plain;
}

Bytes IlvBackend::data_read_main(uint64_t a) {
  if (snapshot_ && snapshot_->addr == a) return snapshot_->block;
  auto [front, back] = resolve_main_interleaved(plan_, a);
  Bytes out(plan_.block_bytes);
  Bytes f = decrypt_half((front.index - plan_.payload_base - 1) / 2, Half::Front);
  Bytes b = decrypt_half((back.index - plan_.payload_base - 1) / 2, Half::Back);
  std::memcpy(out.data(), f.data(), plan_.half_bytes());
  std::memcpy(out.data() + plan_.half_bytes(), b.data(), plan_.half_bytes());
  return out;
}

Bytes IlvBackend::data_read_holding(uint64_t j) {
  uint64_t epoch = cyclic_epoch(holding_writes_, plan_.num_holding, j);
  if (epoch == 0) fail(DW_ERR_INTERNAL, "read of never-written holding slot");
  uint64_t block = plan_.holding_block(j);
  Bytes raw = store_.read_block(block);
  return cipher_.ctr_decrypt(CtrContext{epoch, uint32_t(block)}, raw);
}

void IlvBackend::data_write_holding(uint64_t j, ByteView d) {
  if (!in_step_) fail(DW_ERR_INTERNAL, "holding write outside a step");
  uint64_t block = plan_.holding_block(j);
  ++holding_writes_;
  uint64_t epoch = cyclic_epoch(holding_writes_, plan_.num_holding, j);
  store_.write_block(block, cipher_.ctr_encrypt(CtrContext{epoch, uint32_t(block)}, d));
}

// Trie nodes, staged into the current step and located by the deterministic
// schedule afterwards: holding node j was the (j mod h)-th node of step
// j/h of its cycle, the refreshed node of step s is node s mod N_p.
Bytes IlvBackend::committed_payload_node(uint64_t step, uint32_t slot) {
  uint64_t unit = step % plan_.num_holding;
  uint64_t block = plan_.combined_block(unit);
  Bytes raw = store_.read_block(block);
  Bytes payload = cipher_.iv_decrypt(
      ByteView(raw.data() + plan_.half_bytes(),
               BlockCipher::iv_blob_size(plan_.step_payload_bytes())));
  if (payload.size() != plan_.step_payload_bytes() ||
      payload[0] != plan_.step_nodes() || slot >= plan_.step_nodes())
    fail(DW_ERR_MALFORMED, "interleaved payload has wrong shape");
  const uint8_t* base = payload.data() + 1 + size_t(slot) * plan_.trie.node_bytes;
  return Bytes(base, base + plan_.trie.node_bytes);
}

Bytes IlvBackend::node_read_main(uint64_t a) {
  if (staged_refresh_ && staged_refresh_->first == a)
    return staged_refresh_->second;
  // Refresh k lands in step k and targets node k mod N_p.
  uint64_t cur = state_.i;  // completed steps
  if (cur <= a) return TrieNode(plan_.trie.branch).serialize();  // all-NULL
  uint64_t last = cur - 1 - ((cur - 1 - a) % plan_.trie.node_count);
  return committed_payload_node(last, plan_.step_nodes() - 1);
}

void IlvBackend::node_write_main(uint64_t a, ByteView d) {
  if (!in_step_) fail(DW_ERR_INTERNAL, "node refresh outside a step");
  if (staged_refresh_)
    fail(DW_ERR_INTERNAL, "more than one node refresh in a step");
  if (a != state_.i % plan_.trie.node_count)
    fail(DW_ERR_INTERNAL, "node refresh out of schedule order");
  staged_refresh_.emplace(a, Bytes(d.begin(), d.end()));
}

Bytes IlvBackend::node_read_holding(uint64_t j) {
  uint64_t h = plan_.trie.path_writes;
  uint64_t mp = plan_.trie.holding_count;
  // The engine increments its counter after the refreshes, so staged
  // visibility must key on the staged list itself: the write that is still
  // in flight has to be resolvable by its own refresh.
  if (in_step_ && !staged_nodes_.empty()) {
    uint64_t offset = (j + mp - step_ip_start_ % mp) % mp;
    if (offset < staged_nodes_.size()) return staged_nodes_[offset];
  }
  uint64_t committed = step_ip_start_;
  if (!in_step_) committed = state_.i_p;
  if (committed == 0 || j >= mp)
    fail(DW_ERR_INTERNAL, "read of never-written node holding slot");
  uint64_t last = committed - 1 - ((committed - 1 - j) % mp);
  return committed_payload_node(last / h, uint32_t(last % h));
}

void IlvBackend::node_write_holding(uint64_t j, ByteView d) {
  if (!in_step_) fail(DW_ERR_INTERNAL, "node write outside a step");
  if (j != state_.i_p % plan_.trie.holding_count)
    fail(DW_ERR_INTERNAL, "node holding write out of schedule order");
  if (staged_nodes_.size() >= plan_.trie.path_writes)
    fail(DW_ERR_INTERNAL, "step exceeded its node budget");
  staged_nodes_.emplace_back(d.begin(), d.end());
}

void IlvBackend::stage_half_refresh(DetEngine& eng, uint64_t i,
                                    PositionMap& pm) {
  uint64_t t = i % plan_.num_holding;
  uint64_t addr = t / 2;
  uint32_t half = plan_.half_bytes();
  if (t % 2 == 0) {
    // Front step: read the freshest block once, emit its front half; the
    // back half follows from the same snapshot on the next step.
    Snapshot s{addr, eng.read(addr, pm)};
    staged_half_ = Bytes(s.block.begin(), s.block.begin() + half);
    snapshot_ = std::move(s);
  } else {
    if (!snapshot_ || snapshot_->addr != addr)
      fail(DW_ERR_INTERNAL, "back half-refresh without its snapshot");
    staged_half_ = Bytes(snapshot_->block.begin() + half, snapshot_->block.end());
    clear_snapshot_after_flush_ = true;
  }
}

Bytes IlvBackend::inflight_back_half() const {
  if (!snapshot_) fail(DW_ERR_STATE, "no in-flight refresh");
  return Bytes(snapshot_->block.begin() + plan_.half_bytes(),
               snapshot_->block.end());
}

void IlvBackend::restore_inflight(uint64_t addr, ByteView back_half) {
  if (back_half.size() != plan_.half_bytes())
    fail(DW_ERR_MALFORMED, "in-flight half has wrong size");
  // The front half was committed when the snapshot was staged; rebuild the
  // full plaintext block from it.
  Snapshot s{addr, Bytes(plan_.block_bytes)};
  Bytes f = decrypt_half(2 * addr, Half::Front);
  std::memcpy(s.block.data(), f.data(), plan_.half_bytes());
  std::memcpy(s.block.data() + plan_.half_bytes(), back_half.data(),
              back_half.size());
  snapshot_ = std::move(s);
}

// ---- initialization ---------------------------------------------------

void init_regions(const LayoutPlan& plan, BlockStore& store,
                  BlockCipher& cipher, bool lazy_data_main) {
  Bytes zeros(plan.block_bytes, 0);
  if (plan.mode == LayoutMode::Segmented) {
    auto fill = [&cipher, &plan](uint64_t idx, std::span<uint8_t> out) {
      Bytes z(plan.block_bytes, 0);
      cipher.ctr_encrypt(CtrContext{0, uint32_t(idx)}, z, out);
    };
    auto* sparse = dynamic_cast<SparseMemStore*>(&store);
    if (lazy_data_main && sparse) {
      sparse->set_fill(plan.data_main_base, plan.data_main_blocks, fill);
    } else {
      Bytes out(plan.block_bytes);
      for (uint64_t a = 0; a < plan.data_main_blocks; ++a) {
        fill(plan.data_main_base + a, out);
        store.write_block(plan.data_main_base + a, out);
      }
    }
    if (plan.trie.node_count > 0) {
      // Position main holds all-NULL nodes; holding is written before read.
      std::vector<TrieNode> nodes(plan.pack, TrieNode(plan.trie.branch));
      for (uint64_t blk = 0; blk < plan.pos_main_blocks; ++blk)
        store.write_block(plan.pos_main_base + blk,
                          pack_nodes(cipher, nodes, plan.block_bytes));
    }
    return;
  }

  // Interleaved: every unit gets an epoch-0 holding block and an epoch-0
  // combined block with a well-formed (never parsed) payload blob.
  Bytes payload(plan.step_payload_bytes(), 0);
  payload[0] = uint8_t(plan.step_nodes());
  for (uint64_t u = 0; u < plan.num_holding; ++u) {
    uint64_t hb = plan.holding_block(u);
    store.write_block(hb, cipher.ctr_encrypt(CtrContext{0, uint32_t(hb)}, zeros));
    uint64_t cb = plan.combined_block(u);
    Bytes out(plan.block_bytes, 0);
    cipher.ctr_encrypt(CtrContext{0, uint32_t(cb)},
                       ByteView(zeros.data(), plan.half_bytes()),
                       std::span<uint8_t>(out.data(), plan.half_bytes()));
    Bytes blob = cipher.iv_encrypt(payload);
    std::memcpy(out.data() + plan.half_bytes(), blob.data(), blob.size());
    store.write_block(cb, out);
  }
}

}  // namespace detworam
