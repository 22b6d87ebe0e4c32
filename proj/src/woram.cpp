#include "woram.hpp"

namespace detworam {

namespace {

constexpr char kStateTag[8] = {'D', 'W', 'S', 'T', 'A', 'T', 'E', '1'};

// Plaintext superblock header, little-endian fixed-width.
constexpr size_t kOffMagic = 0;
constexpr size_t kOffVersion = 8;
constexpr size_t kOffBlockBytes = 12;
constexpr size_t kOffN = 16;
constexpr size_t kOffM = 24;
constexpr size_t kOffBranch = 32;
constexpr size_t kOffMode = 36;
constexpr size_t kOffNp = 40;
constexpr size_t kOffMp = 48;
constexpr size_t kOffPathWrites = 56;
constexpr size_t kOffPack = 60;
constexpr size_t kOffI = 64;
constexpr size_t kOffIp = 72;
constexpr size_t kOffMainRefreshes = 80;
constexpr size_t kOffHoldingWrites = 88;
constexpr size_t kOffPayloadWrites = 96;
constexpr size_t kOffReserved = 104;
constexpr size_t kOffBlobLen = 112;
constexpr size_t kOffBlob = 116;

struct ParsedHeader {
  uint32_t block_bytes;
  uint64_t n, m;
  uint32_t branch;
  LayoutMode mode;
  uint64_t n_p, m_p;
  uint32_t path_writes, pack;
  uint64_t i, i_p;
  uint32_t blob_len;
};

ParsedHeader parse_header(ByteView sb) {
  if (sb.size() < kOffBlob) fail(DW_ERR_BAD_MAGIC, "superblock too small");
  if (std::memcmp(sb.data(), kMagic, 8) != 0)
    fail(DW_ERR_BAD_MAGIC, "not a container (bad magic)");
  if (get_u32(sb.data() + kOffVersion) != kVersion)
    fail(DW_ERR_BAD_MAGIC, "unsupported container version");
  ParsedHeader h;
  h.block_bytes = get_u32(sb.data() + kOffBlockBytes);
  h.n = get_u64(sb.data() + kOffN);
  h.m = get_u64(sb.data() + kOffM);
  h.branch = get_u32(sb.data() + kOffBranch);
  uint32_t mode = get_u32(sb.data() + kOffMode);
  if (mode > 1) fail(DW_ERR_BAD_MAGIC, "unknown layout mode");
  h.mode = LayoutMode(mode);
  h.n_p = get_u64(sb.data() + kOffNp);
  h.m_p = get_u64(sb.data() + kOffMp);
  h.path_writes = get_u32(sb.data() + kOffPathWrites);
  h.pack = get_u32(sb.data() + kOffPack);
  h.i = get_u64(sb.data() + kOffI);
  h.i_p = get_u64(sb.data() + kOffIp);
  h.blob_len = get_u32(sb.data() + kOffBlobLen);
  return h;
}

}  // namespace

uint64_t DetWoram::container_blocks(const DetConfig& cfg) {
  DetConfig c = cfg;
  if (c.num_holding == 0) c.num_holding = 3 * c.num_main;
  return plan_layout(c.block_bytes, c.num_main, c.num_holding, c.branch, c.mode)
      .total_blocks;
}

DetWoram::DetWoram(std::unique_ptr<BlockStore> store, const CipherKey& key,
                   const LayoutPlan& plan)
    : store_(std::move(store)), cipher_(key), plan_(plan) {}

void DetWoram::build_stack() {
  Geometry data_geo{plan_.num_main, plan_.num_holding, plan_.block_bytes};
  Geometry node_geo{plan_.trie.node_count, plan_.trie.holding_count,
                    plan_.trie.node_bytes};
  if (plan_.mode == LayoutMode::Segmented) {
    seg_data_ =
        std::make_unique<SegDataBackend>(plan_, *store_, cipher_, state_);
    data_engine_ = std::make_unique<DetEngine>(data_geo, *seg_data_, state_.i,
                                               range_policy_);
    if (plan_.trie.node_count > 0) {
      seg_nodes_ =
          std::make_unique<PackedNodeBackend>(plan_, *store_, cipher_, state_);
      pos_engine_ = std::make_unique<DetEngine>(node_geo, *seg_nodes_,
                                                state_.i_p, range_policy_);
    }
  } else {
    ilv_ = std::make_unique<IlvBackend>(plan_, *store_, cipher_, state_);
    data_engine_ = std::make_unique<DetEngine>(
        data_geo, ilv_->data_view(), state_.i, ilv_->data_refresh_policy());
    if (plan_.trie.node_count > 0) {
      pos_engine_ = std::make_unique<DetEngine>(node_geo, ilv_->node_view(),
                                                state_.i_p, range_policy_);
    }
  }
  trie_ = std::make_unique<TriePosMap>(plan_.trie, pos_engine_.get());
}

std::unique_ptr<DetWoram> DetWoram::create(std::unique_ptr<BlockStore> store,
                                           const DetConfig& cfg,
                                           const CipherKey& key) {
  DetConfig c = cfg;
  if (c.num_holding == 0) c.num_holding = 3 * c.num_main;
  LayoutPlan plan =
      plan_layout(c.block_bytes, c.num_main, c.num_holding, c.branch, c.mode);
  if (store->block_bytes() != plan.block_bytes ||
      store->num_blocks() != plan.total_blocks)
    fail(DW_ERR_INVALID_ARG, "store geometry does not match the layout");

  auto w = std::unique_ptr<DetWoram>(
      new DetWoram(std::move(store), key, plan));
  // Superblock must hold header + encrypted root (+ the in-flight refresh
  // half in interleaved mode).
  size_t blob_plain = 8 + size_t(plan.trie.branch) * PosPointer::kWireBytes +
                      1 + 8;
  if (plan.mode == LayoutMode::Interleaved) blob_plain += plan.half_bytes();
  if (kOffBlob + BlockCipher::iv_blob_size(blob_plain) > plan.block_bytes)
    fail(DW_ERR_INFEASIBLE, "client state does not fit the superblock");

  bool lazy = dynamic_cast<SparseMemStore*>(w->store_.get()) != nullptr;
  init_regions(w->plan_, *w->store_, w->cipher_, lazy);
  w->build_stack();
  w->persist_superblock();
  return w;
}

std::unique_ptr<DetWoram> DetWoram::open(std::unique_ptr<BlockStore> store,
                                         const CipherKey& key) {
  Bytes sb = store->read_block(0);
  ParsedHeader h = parse_header(sb);
  LayoutPlan plan = plan_layout(h.block_bytes, h.n, h.m, h.branch, h.mode);
  if (plan.trie.node_count != h.n_p || plan.trie.holding_count != h.m_p ||
      plan.trie.path_writes != h.path_writes || plan.pack != h.pack)
    fail(DW_ERR_BAD_MAGIC, "superblock geometry is inconsistent");
  if (store->block_bytes() != plan.block_bytes ||
      store->num_blocks() != plan.total_blocks)
    fail(DW_ERR_BAD_MAGIC, "device size does not match the superblock");

  auto w = std::unique_ptr<DetWoram>(
      new DetWoram(std::move(store), key, plan));
  w->state_.i = h.i;
  w->state_.i_p = h.i_p;
  w->build_stack();
  w->load_superblock();
  return w;
}

std::unique_ptr<DetWoram> DetWoram::create_file(const std::string& path,
                                                const DetConfig& cfg,
                                                const CipherKey& key) {
  uint64_t blocks = container_blocks(cfg);
  auto store = FileStore::create(path, cfg.block_bytes, blocks);
  return create(std::move(store), cfg, key);
}

std::unique_ptr<DetWoram> DetWoram::open_file(const std::string& path,
                                              const CipherKey& key) {
  SuperblockInfo info = peek_superblock(path);
  auto store = FileStore::open(path, info.block_bytes, info.total_blocks);
  return open(std::move(store), key);
}

std::unique_ptr<DetWoram> DetWoram::create_mem(const DetConfig& cfg,
                                               const CipherKey& key,
                                               bool sparse) {
  DetConfig c = cfg;
  if (c.num_holding == 0) c.num_holding = 3 * c.num_main;
  uint64_t blocks = container_blocks(c);
  std::unique_ptr<BlockStore> store;
  if (sparse)
    store = std::make_unique<SparseMemStore>(c.block_bytes, blocks);
  else
    store = std::make_unique<MemStore>(c.block_bytes, blocks);
  return create(std::move(store), c, key);
}

SuperblockInfo peek_superblock(const std::string& path) {
  Bytes head = FileStore::read_prefix(path, kOffBlob);
  ParsedHeader h = parse_header(head);
  LayoutPlan plan = plan_layout(h.block_bytes, h.n, h.m, h.branch, h.mode);
  return SuperblockInfo{h.block_bytes, h.n,   h.m,
                        h.branch,      h.mode, h.i,
                        h.i_p,         plan.total_blocks};
}

Bytes DetWoram::encode_superblock() {
  Bytes sb(plan_.block_bytes, 0);
  std::memcpy(sb.data() + kOffMagic, kMagic, 8);
  put_u32(sb.data() + kOffVersion, kVersion);
  put_u32(sb.data() + kOffBlockBytes, plan_.block_bytes);
  put_u64(sb.data() + kOffN, plan_.num_main);
  put_u64(sb.data() + kOffM, plan_.num_holding);
  put_u32(sb.data() + kOffBranch, plan_.trie.branch);
  put_u32(sb.data() + kOffMode, uint32_t(plan_.mode));
  put_u64(sb.data() + kOffNp, plan_.trie.node_count);
  put_u64(sb.data() + kOffMp, plan_.trie.holding_count);
  put_u32(sb.data() + kOffPathWrites, plan_.trie.path_writes);
  put_u32(sb.data() + kOffPack, plan_.pack);
  put_u64(sb.data() + kOffI, state_.i);
  put_u64(sb.data() + kOffIp, state_.i_p);
  // Region epoch counters; all derivable from i, recorded for inspection.
  uint64_t main_refreshes = uint64_t((unsigned __int128)(state_.i) *
                                     plan_.num_main / plan_.num_holding);
  put_u64(sb.data() + kOffMainRefreshes, main_refreshes);
  put_u64(sb.data() + kOffHoldingWrites, state_.i);
  put_u64(sb.data() + kOffPayloadWrites,
          plan_.mode == LayoutMode::Interleaved ? state_.i : 0);
  put_u64(sb.data() + kOffReserved, 0);

  bool inflight = ilv_ && ilv_->inflight();
  Bytes plain(8 + trie_->root().serialize().size() + 1 + 8 +
              (inflight ? plan_.half_bytes() : 0));
  std::memcpy(plain.data(), kStateTag, 8);
  Bytes root = trie_->root().serialize();
  std::memcpy(plain.data() + 8, root.data(), root.size());
  size_t off = 8 + root.size();
  plain[off++] = inflight ? 1 : 0;
  put_u64(plain.data() + off, inflight ? ilv_->inflight_addr() : 0);
  off += 8;
  if (inflight) {
    Bytes half = ilv_->inflight_back_half();
    std::memcpy(plain.data() + off, half.data(), half.size());
  }
  Bytes blob = cipher_.iv_encrypt(plain);
  if (kOffBlob + blob.size() > sb.size())
    fail(DW_ERR_INTERNAL, "superblock overflow");
  put_u32(sb.data() + kOffBlobLen, uint32_t(blob.size()));
  std::memcpy(sb.data() + kOffBlob, blob.data(), blob.size());
  return sb;
}

void DetWoram::persist_superblock() { store_->write_block(0, encode_superblock()); }

void DetWoram::load_superblock() {
  Bytes sb = store_->read_block(0);
  uint32_t blob_len = get_u32(sb.data() + kOffBlobLen);
  if (kOffBlob + blob_len > sb.size())
    fail(DW_ERR_BAD_MAGIC, "state blob length out of range");
  Bytes plain;
  try {
    plain = cipher_.iv_decrypt(ByteView(sb.data() + kOffBlob, blob_len));
  } catch (const Error&) {
    fail(DW_ERR_WRONG_KEY, "state blob does not decrypt");
  }
  size_t root_bytes = size_t(plan_.trie.branch) * PosPointer::kWireBytes;
  if (plain.size() < 8 + root_bytes + 9 ||
      std::memcmp(plain.data(), kStateTag, 8) != 0)
    fail(DW_ERR_WRONG_KEY, "state blob does not decrypt to a valid state");
  trie_->root() =
      TrieNode::parse(ByteView(plain.data() + 8, root_bytes), plan_.trie.branch);
  size_t off = 8 + root_bytes;
  bool inflight = plain[off++] != 0;
  uint64_t addr = get_u64(plain.data() + off);
  off += 8;
  if (inflight) {
    if (plan_.mode != LayoutMode::Interleaved ||
        plain.size() != off + plan_.half_bytes() || state_.i % 2 != 1)
      fail(DW_ERR_MALFORMED, "in-flight state is inconsistent");
    ilv_->restore_inflight(addr,
                           ByteView(plain.data() + off, plan_.half_bytes()));
  } else if (plan_.mode == LayoutMode::Interleaved && state_.i % 2 == 1) {
    fail(DW_ERR_MALFORMED, "odd step count but no in-flight refresh half");
  }
}

Bytes DetWoram::read(uint64_t a) {
  if (closed_) fail(DW_ERR_STATE, "container is closed");
  return data_engine_->read(a, *trie_);
}

void DetWoram::write(uint64_t a, ByteView d) {
  if (closed_) fail(DW_ERR_STATE, "container is closed");
  if (ilv_) ilv_->begin_step();
  data_engine_->write(a, d, *trie_);
  if (ilv_) ilv_->end_step();
  if (!lazy_state_) persist_superblock();
}

void DetWoram::persist() {
  if (closed_) fail(DW_ERR_STATE, "container is closed");
  persist_superblock();
}

void DetWoram::close() {
  if (closed_) return;
  if (seg_nodes_) seg_nodes_->flush_partial();
  persist_superblock();
  store_->flush();
  closed_ = true;
}

}  // namespace detworam
