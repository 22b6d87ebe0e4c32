#include "trie.hpp"

#include <algorithm>

namespace detworam {

namespace {

using u128 = unsigned __int128;

// ceil(lg x) for x >= 1.
uint32_t ceil_lg(u128 x) {
  if (x <= 1) return 0;
  uint32_t bits = 0;
  u128 v = x - 1;
  while (v) {
    v >>= 1;
    ++bits;
  }
  return bits;
}

// Smallest t with b^t >= x.
uint32_t ceil_log(uint32_t b, u128 x) {
  uint32_t t = 0;
  u128 pow = 1;
  while (pow < x) {
    if (pow > (~u128(0)) / b) return t + 1;
    pow *= b;
    ++t;
  }
  return t;
}

}  // namespace

uint32_t heap_depth(uint64_t a, uint32_t b) {
  uint32_t d = 0;
  while (a != 0) {
    a = (a - 1) / b;
    ++d;
  }
  return d;
}

std::vector<uint32_t> path_indices(uint64_t a, uint32_t b) {
  std::vector<uint32_t> idx;
  while (a != 0) {
    idx.push_back(uint32_t((a - 1) % b));
    a = (a - 1) / b;
  }
  std::reverse(idx.begin(), idx.end());
  return idx;
}

TrieParams trie_params(uint64_t n, uint32_t b) {
  if (n < 2 || b < 2) fail(DW_ERR_INVALID_GEOMETRY, "need N >= 2 and b >= 2");
  TrieParams p;
  p.branch = b;
  p.data_blocks = n;
  p.node_count = (n - 2) / (b - 1);
  p.node_bytes = b * uint32_t(PosPointer::kWireBytes);

  if (p.node_count == 0) {
    // Every data pointer fits in the root; no position WoORAM at all.
    return p;
  }

  uint32_t dummy_level = ceil_log(b, p.node_count);
  uint32_t lmin = heap_depth(p.data_heap_address(0), b) - 1;
  uint32_t lmax = heap_depth(p.data_heap_address(n - 1), b) - 1;
  auto writes = [&](uint32_t l) { return l + (l != dummy_level ? 1u : 0u); };
  for (uint32_t l = lmin; l <= lmax; ++l) {
    if (writes(l) != writes(lmin))
      fail(DW_ERR_INVALID_GEOMETRY,
           "per-write trie node count is not constant for N=" +
               std::to_string(n) + " b=" + std::to_string(b) +
               " (path lengths " + std::to_string(lmin) + ".." +
               std::to_string(lmax) + ", dummy threshold " +
               std::to_string(dummy_level) + ")");
  }
  p.dummy_level = dummy_level;
  p.path_writes = writes(lmin);
  p.holding_count = p.node_count * p.path_writes;
  return p;
}

Bytes TrieNode::serialize() const {
  Bytes out(slots.size() * PosPointer::kWireBytes);
  for (size_t i = 0; i < slots.size(); ++i)
    slots[i].store(out.data() + i * PosPointer::kWireBytes);
  return out;
}

TrieNode TrieNode::parse(ByteView wire, uint32_t branch) {
  if (wire.size() != size_t(branch) * PosPointer::kWireBytes)
    fail(DW_ERR_MALFORMED, "trie node wire size mismatch");
  TrieNode n(branch);
  for (size_t i = 0; i < branch; ++i)
    n.slots[i] = PosPointer::parse(wire.data() + i * PosPointer::kWireBytes);
  return n;
}

Bytes pack_node_images(const BlockCipher& cipher,
                       const std::vector<Bytes>& images,
                       uint32_t block_bytes) {
  Bytes plain;
  for (const auto& img : images) plain.insert(plain.end(), img.begin(), img.end());
  if (BlockCipher::iv_blob_size(plain.size()) > block_bytes)
    fail(DW_ERR_OVERFLOW, "trie nodes do not fit the packing budget");
  Bytes blob = cipher.iv_encrypt(plain);
  blob.resize(block_bytes, 0);
  return blob;
}

Bytes pack_nodes(const BlockCipher& cipher, const std::vector<TrieNode>& nodes,
                 uint32_t block_bytes) {
  std::vector<Bytes> images;
  images.reserve(nodes.size());
  for (const auto& n : nodes) images.push_back(n.serialize());
  return pack_node_images(cipher, images, block_bytes);
}

std::vector<TrieNode> unpack_nodes(const BlockCipher& cipher, ByteView block,
                                   uint32_t count, uint32_t branch) {
  size_t payload = size_t(count) * branch * PosPointer::kWireBytes;
  if (BlockCipher::iv_blob_size(payload) > block.size())
    fail(DW_ERR_MALFORMED, "block cannot hold that many nodes");
  Bytes plain =
      cipher.iv_decrypt(block.first(BlockCipher::iv_blob_size(payload)));
  if (plain.size() != payload)
    fail(DW_ERR_MALFORMED, "packed block has the wrong payload size");
  std::vector<TrieNode> nodes;
  nodes.reserve(count);
  size_t node_bytes = size_t(branch) * PosPointer::kWireBytes;
  for (uint32_t s = 0; s < count; ++s)
    nodes.push_back(TrieNode::parse(
        ByteView(plain.data() + s * node_bytes, node_bytes), branch));
  return nodes;
}

bool feasibility(u128 n, uint32_t b, uint64_t block_bits) {
  if (b < 2 || block_bits == 0) return false;
  if (n < 2) return true;
  u128 node_count = (n - 2) / (b - 1);
  u128 h = ceil_log(b, node_count);
  u128 pointer_bits = ceil_lg(2 * n) + ceil_lg(block_bits) + 1;
  return (h + 1) * pointer_bits <= block_bits / 2;
}

u128 feasibility_boundary(uint32_t b, uint64_t block_bits) {
  u128 lo = 0, hi = u128(1) << 126;
  if (!feasibility(1, b, block_bits)) return 0;
  while (lo + 1 < hi) {
    u128 mid = lo + (hi - lo) / 2;
    if (feasibility(mid, b, block_bits))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

u128 parse_u128(const std::string& decimal) {
  if (decimal.empty()) fail(DW_ERR_INVALID_ARG, "empty number");
  u128 v = 0;
  for (char c : decimal) {
    if (c < '0' || c > '9') fail(DW_ERR_INVALID_ARG, "bad decimal digit");
    u128 next = v * 10 + u128(c - '0');
    if (next < v) fail(DW_ERR_INVALID_ARG, "number too large");
    v = next;
  }
  return v;
}

std::string format_u128(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v) {
    s.push_back(char('0' + int(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

// ---- TriePosMap -----------------------------------------------------

namespace {

// getpos during position-WoORAM refreshes resolves through the trie itself;
// setpos lands in the in-memory parent node.
class SetposRedirectMap : public PositionMap {
 public:
  SetposRedirectMap(TriePosMap& trie, TrieNode* parent, uint32_t slot,
                    uint64_t expected_addr)
      : trie_(trie), parent_(parent), slot_(slot), expected_(expected_addr) {}
  PosPointer getpos(uint64_t a) override { return trie_.getpos_node(a); }
  void setpos(uint64_t a, const PosPointer& ptr) override {
    if (a != expected_)
      fail(DW_ERR_INTERNAL, "redirected setpos for unexpected node");
    parent_->slots[slot_] = ptr;
  }

 private:
  TriePosMap& trie_;
  TrieNode* parent_;
  uint32_t slot_;
  uint64_t expected_;
};

class RefreshOnlyMap : public PositionMap {
 public:
  explicit RefreshOnlyMap(TriePosMap& trie) : trie_(trie) {}
  PosPointer getpos(uint64_t a) override { return trie_.getpos_node(a); }
  void setpos(uint64_t, const PosPointer&) override {
    fail(DW_ERR_INTERNAL, "dummy write must not update the position map");
  }

 private:
  TriePosMap& trie_;
};

class FixedPtrMap : public PositionMap {
 public:
  explicit FixedPtrMap(const PosPointer& p) : p_(p) {}
  PosPointer getpos(uint64_t) override { return p_; }
  void setpos(uint64_t, const PosPointer&) override {
    fail(DW_ERR_INTERNAL, "fetch must not update the position map");
  }

 private:
  PosPointer p_;
};

}  // namespace

TriePosMap::TriePosMap(const TrieParams& params, DetEngine* pos_engine)
    : params_(params), pos_engine_(pos_engine), root_(params.branch) {
  if (params_.node_count > 0 && !pos_engine_)
    fail(DW_ERR_INVALID_ARG, "trie with stored nodes needs an engine");
}

std::vector<uint64_t> TriePosMap::heap_chain(uint64_t heap_addr) const {
  std::vector<uint64_t> chain;
  uint64_t a = heap_addr;
  while (a != 0) {
    a = (a - 1) / params_.branch;
    chain.push_back(a);
  }
  std::reverse(chain.begin(), chain.end());
  return chain;  // root first, target's parent last
}

TrieNode TriePosMap::fetch_node(uint64_t heap, const PosPointer& ptr) {
  if (heap == 0 || heap > params_.node_count)
    fail(DW_ERR_MALFORMED, "trie walk left the stored node range");
  FixedPtrMap pm(ptr);
  Bytes wire = pos_engine_->read(heap - 1, pm);
  return TrieNode::parse(wire, params_.branch);
}

std::vector<TrieNode> TriePosMap::path_nodes(
    const std::vector<uint32_t>& indices, const std::vector<uint64_t>& heaps) {
  std::vector<TrieNode> nodes;
  nodes.reserve(indices.size() + 1);

  auto active_copy = [&](uint64_t heap) -> const TrieNode* {
    if (!active_.active) return nullptr;
    for (size_t i = 0; i < active_.heap.size(); ++i)
      if (active_.heap[i] == heap) return &(*active_.nodes)[i];
    return nullptr;
  };

  const TrieNode* r = active_copy(0);
  nodes.push_back(r ? *r : root_);
  uint64_t addr = 0;
  for (size_t i = 0; i < indices.size(); ++i) {
    PosPointer ptr = nodes[i].slots[indices[i]];
    addr = addr * params_.branch + indices[i] + 1;
    if (addr != heaps[i + 1])
      fail(DW_ERR_INTERNAL, "heap chain mismatch during walk");
    const TrieNode* a = active_copy(addr);
    nodes.push_back(a ? *a : fetch_node(addr, ptr));
  }
  return nodes;
}

PosPointer TriePosMap::walk(uint64_t heap_addr) {
  std::vector<uint32_t> full = path_indices(heap_addr, params_.branch);
  std::vector<uint64_t> heaps = heap_chain(heap_addr);
  std::vector<uint32_t> parents(full.begin(), full.end() - 1);
  std::vector<TrieNode> nodes = path_nodes(parents, heaps);
  return nodes.back().slots[full.back()];
}

PosPointer TriePosMap::getpos(uint64_t a) {
  if (a >= params_.data_blocks)
    fail(DW_ERR_ADDRESS_RANGE, "position map address out of range");
  return walk(params_.data_heap_address(a));
}

PosPointer TriePosMap::getpos_node(uint64_t node_main) {
  if (node_main >= params_.node_count)
    fail(DW_ERR_ADDRESS_RANGE, "trie node address out of range");
  return walk(node_main + 1);
}

void TriePosMap::setpos(uint64_t a, const PosPointer& ptr) {
  if (a >= params_.data_blocks)
    fail(DW_ERR_ADDRESS_RANGE, "position map address out of range");
  uint64_t target = params_.data_heap_address(a);
  std::vector<uint32_t> full = path_indices(target, params_.branch);
  std::vector<uint64_t> heaps = heap_chain(target);
  std::vector<uint32_t> parents(full.begin(), full.end() - 1);
  std::vector<TrieNode> nodes = path_nodes(parents, heaps);
  size_t levels = full.size() - 1;  // nodes rewritten bottom-up

  active_ = ActivePath{true, heaps, &nodes};
  nodes[levels].slots[full[levels]] = ptr;
  for (size_t j = levels; j >= 1; --j) {
    SetposRedirectMap pm(*this, &nodes[j - 1], full[j - 1], heaps[j] - 1);
    pos_engine_->write(heaps[j] - 1, nodes[j].serialize(), pm);
  }
  if (levels != params_.dummy_level) {
    RefreshOnlyMap pm(*this);
    pos_engine_->write_dummy(pm);
  }
  root_ = nodes[0];
  active_ = ActivePath{};
}

}  // namespace detworam
