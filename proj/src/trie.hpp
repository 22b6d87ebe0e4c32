#pragma once

// Write-only oblivious trie serving as the position map.  Nodes are
// addressed by heap indexing (children of node t are b*t+1 .. b*t+b), so
// structure implies location and the trie is its own position map: trie
// lookups never consult an auxiliary map.
//
// Heap address layout: 0 is the root (kept in client state, never stored);
// 1..N_p are stored trie nodes, held in the position WoORAM's main area at
// slot t-1; data address a occupies virtual heap address N_p+1+a, whose
// pointer lives in the final slot of the walk.  Node counting gives
// (N_p+1)*b >= N_p + N, so these virtual addresses never collide with
// stored nodes.

#include <optional>

#include "crypto.hpp"
#include "engine.hpp"
#include "posmap.hpp"

namespace detworam {

struct TrieParams {
  uint32_t branch = 2;        // b
  uint64_t node_count = 0;    // N_p = floor((N-2)/(b-1))
  uint64_t holding_count = 0; // M_p = N_p * path_writes
  uint32_t path_writes = 0;   // h: holding-node writes per setpos, dummies in
  uint32_t dummy_level = 0;   // path lengths below this get one dummy write
  uint32_t node_bytes = 0;    // b * 8
  uint64_t data_blocks = 0;   // N

  uint64_t data_heap_address(uint64_t a) const { return node_count + 1 + a; }
};

// Derives the trie geometry for N data blocks with branching factor b, and
// rejects combinations whose per-write node count would not be constant
// (path lengths spanning more than the one dummy write can equalize).
TrieParams trie_params(uint64_t n, uint32_t b);

// Child indices on the path from the root to heap address a; empty for the
// root itself.
std::vector<uint32_t> path_indices(uint64_t a, uint32_t b);

// Depth of heap address a (= path_indices(a,b).size()) without
// materializing the path.
uint32_t heap_depth(uint64_t a, uint32_t b);

struct TrieNode {
  explicit TrieNode(uint32_t branch)
      : slots(branch) {}
  std::vector<PosPointer> slots;

  Bytes serialize() const;
  static TrieNode parse(ByteView wire, uint32_t branch);
};

// Packs trie nodes into one encrypted block: fresh IV at offset 0, then the
// concatenated node images, zero padding to the block size.  Throws
// Overflow when the nodes cannot fit.
Bytes pack_nodes(const BlockCipher& cipher, const std::vector<TrieNode>& nodes,
                 uint32_t block_bytes);
Bytes pack_node_images(const BlockCipher& cipher,
                       const std::vector<Bytes>& images, uint32_t block_bytes);
std::vector<TrieNode> unpack_nodes(const BlockCipher& cipher, ByteView block,
                                   uint32_t count, uint32_t branch);

// Half-block packing feasibility (branching factor b, M = 2N, B in bits):
// h+1 trie nodes of ceil(lg M) + ceil(lg B) + 1 bits each must fit in B/2.
// N is taken at 128 bits; use parse_u128 for decimal input.
bool feasibility(unsigned __int128 n, uint32_t b, uint64_t block_bits);
unsigned __int128 feasibility_boundary(uint32_t b, uint64_t block_bits);
unsigned __int128 parse_u128(const std::string& decimal);
std::string format_u128(unsigned __int128 v);

// The trie itself.  `pos_engine` is a DetWoORAM engine over node-sized
// units (absent when N_p = 0 and the root covers every data address).
class TriePosMap : public PositionMap {
 public:
  TriePosMap(const TrieParams& params, DetEngine* pos_engine);

  // Data-WoORAM bindings (Alg-4 DATA source).
  PosPointer getpos(uint64_t a) override;
  void setpos(uint64_t a, const PosPointer& ptr) override;

  // TRIE-source lookup for position-WoORAM refreshes: the pointer for the
  // stored node at main slot `node_main` (heap address node_main+1).
  PosPointer getpos_node(uint64_t node_main);

  TrieNode& root() { return root_; }
  const TrieParams& params() const { return params_; }

 private:
  friend class TrieRefreshMap;
  struct ActivePath {
    bool active = false;
    std::vector<uint64_t> heap;   // heap address per level, root first
    std::vector<TrieNode>* nodes = nullptr;
  };

  // Node at heap address `heap`, given the pointer stored in its parent.
  TrieNode fetch_node(uint64_t heap, const PosPointer& ptr);
  // Walks indices from the root, returning one node per level (root first).
  std::vector<TrieNode> path_nodes(const std::vector<uint32_t>& indices,
                                   const std::vector<uint64_t>& heaps);
  PosPointer walk(uint64_t heap_addr);
  std::vector<uint64_t> heap_chain(uint64_t heap_addr) const;

  TrieParams params_;
  DetEngine* pos_engine_;
  TrieNode root_;
  ActivePath active_;
};

}  // namespace detworam
