#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bench.hpp"
#include "woram.hpp"

using namespace detworam;

TEST_CASE("segmented regions are disjoint and sized from the trie") {
  LayoutPlan p = plan_layout(512, 16, 16, 4, LayoutMode::Segmented);
  CHECK(p.data_main_base == 1);
  CHECK(p.data_main_blocks == 16);
  CHECK(p.data_holding_base == 17);
  CHECK(p.data_holding_blocks == 16);
  // N_p = floor(14/3) = 4 nodes of 32 bytes; pack = capacity(512)/32.
  CHECK(p.trie.node_count == 4);
  CHECK(p.pack == BlockCipher::iv_capacity(512) / 32);
  CHECK(p.pos_main_blocks == (p.trie.node_count + p.pack - 1) / p.pack);
  CHECK(p.pos_holding_blocks ==
        (p.trie.holding_count + p.pack - 1) / p.pack);
  CHECK(p.pos_main_base == p.data_holding_base + p.data_holding_blocks);
  CHECK(p.pos_holding_base == p.pos_main_base + p.pos_main_blocks);
  CHECK(p.total_blocks == p.pos_holding_base + p.pos_holding_blocks);
}

TEST_CASE("interleaved payload is 4N blocks plus the superblock") {
  LayoutPlan p = plan_layout(512, 16, 32, 2, LayoutMode::Interleaved);
  CHECK(p.payload_base == 1);
  CHECK(p.payload_blocks == 64);
  CHECK(p.total_blocks == 65);
  CHECK_THROWS_AS(plan_layout(512, 16, 16, 2, LayoutMode::Interleaved), Error);
}

TEST_CASE("infeasible packing is rejected up front") {
  // One 512-byte node cannot fit a 256-byte block at all.
  CHECK_THROWS_AS(plan_layout(256, 1024, 2048, 64, LayoutMode::Interleaved),
                  Error);
  try {
    plan_layout(256, 1024, 2048, 64, LayoutMode::Interleaved);
  } catch (const Error& e) {
    CHECK(e.code() == DW_ERR_INFEASIBLE);
  }
  // Block size constraints.
  CHECK_THROWS_AS(plan_layout(100, 16, 32, 2, LayoutMode::Segmented), Error);
  CHECK_THROWS_AS(plan_layout(16384, 16, 32, 2, LayoutMode::Segmented), Error);
}

TEST_CASE("main block placement") {
  LayoutPlan seg = plan_layout(512, 16, 16, 4, LayoutMode::Segmented);
  CHECK(resolve_main_segmented(seg, 0) == seg.data_main_base);
  CHECK(resolve_main_segmented(seg, 7) == seg.data_main_base + 7);
  CHECK_THROWS_AS(resolve_main_segmented(seg, 16), Error);

  LayoutPlan ilv = plan_layout(512, 16, 32, 2, LayoutMode::Interleaved);
  auto [front, back] = resolve_main_interleaved(ilv, 0);
  CHECK(front.index == 2);  // unit 0's combined block
  CHECK(front.half == Half::Front);
  CHECK(back.index == 4);  // unit 1's combined block
  CHECK(back.half == Half::Back);
  for (uint64_t a = 0; a < 16; ++a) {
    auto [f, b] = resolve_main_interleaved(ilv, a);
    CHECK(f.index != b.index);
    CHECK(f.index == ilv.combined_block(2 * a));
    CHECK(b.index == ilv.combined_block(2 * a + 1));
  }
}

namespace {

std::unique_ptr<DetWoram> ilv_container(uint64_t n, uint32_t b = 2,
                                        uint32_t bb = 512) {
  DetConfig cfg;
  cfg.block_bytes = bb;
  cfg.num_main = n;
  cfg.num_holding = 2 * n;
  cfg.branch = b;
  cfg.mode = LayoutMode::Interleaved;
  return DetWoram::create_mem(cfg, CipherKey::random());
}

std::vector<uint64_t> payload_writes(const Trace& t, const LayoutPlan& p) {
  std::vector<uint64_t> out;
  for (const auto& e : t.events())
    if (e.kind == OpKind::Write && e.index >= p.payload_base)
      out.push_back(e.index);
  return out;
}

}  // namespace

TEST_CASE("interleaved writes land exactly 2 consecutive payload blocks") {
  auto w = ilv_container(16);
  Trace t;
  w->device().attach_trace(&t);
  w->device().set_tracing(true);
  std::mt19937_64 rng(41);
  uint64_t ops = 4 * w->plan().num_holding;  // wrap the region twice
  for (uint64_t k = 0; k < ops; ++k)
    w->write(rng() % 16, random_block(rng, 512));

  auto locs = payload_writes(t, w->plan());
  REQUIRE(locs.size() == 2 * ops);
  for (uint64_t k = 0; k < ops; ++k) {
    uint64_t unit = k % w->plan().num_holding;
    CHECK(locs[2 * k] == w->plan().holding_block(unit));
    CHECK(locs[2 * k + 1] == locs[2 * k] + 1);
  }
}

TEST_CASE("interleaved payload forms one circular non-decreasing sequence") {
  auto w = ilv_container(8);
  Trace t;
  w->device().attach_trace(&t);
  w->device().set_tracing(true);
  std::mt19937_64 rng(42);
  uint64_t ops = 4 * w->plan().num_holding;
  for (uint64_t k = 0; k < ops; ++k) w->write(rng() % 8, random_block(rng, 512));
  auto locs = payload_writes(t, w->plan());
  uint64_t wraps = 0;
  for (size_t k = 1; k < locs.size(); ++k) {
    if (locs[k] < locs[k - 1]) ++wraps;
  }
  CHECK(wraps == 3);  // 4 passes over the region wrap three times
}

TEST_CASE("interleaved reads reassemble main blocks from both halves") {
  auto w = ilv_container(16);
  std::mt19937_64 rng(43);
  std::vector<Bytes> ref(16, Bytes(512, 0));
  // Write everything, then run enough ops that every address has been
  // refreshed into its two halves, then check reads.
  for (uint64_t a = 0; a < 16; ++a) {
    ref[a] = random_block(rng, 512);
    w->write(a, ref[a]);
  }
  for (uint64_t k = 0; k < 2 * w->plan().num_holding; ++k) {
    uint64_t a = rng() % 4;  // touch a few addresses only
    ref[a] = random_block(rng, 512);
    w->write(a, ref[a]);
  }
  for (uint64_t a = 0; a < 16; ++a) CHECK(w->read(a) == ref[a]);
}

TEST_CASE("interleaved fuzz against the reference map") {
  auto w = ilv_container(32, 2);
  FuzzResult r = run_fuzz(*w, 8000, 44);
  CHECK(r.pass);
  CHECK(r.failures == 0);
}

TEST_CASE("segmented regions each see circular sequential writes") {
  DetConfig cfg;
  cfg.block_bytes = 512;
  cfg.num_main = 32;
  cfg.num_holding = 64;
  cfg.branch = 4;
  auto w = DetWoram::create_mem(cfg, CipherKey::random());
  Trace t;
  w->device().attach_trace(&t);
  w->device().set_tracing(true);
  std::mt19937_64 rng(45);
  for (int k = 0; k < 500; ++k) w->write(rng() % 32, random_block(rng, 512));

  const LayoutPlan& p = w->plan();
  struct Region {
    uint64_t base, blocks;
    std::vector<uint64_t> seq;
  };
  std::vector<Region> regions{
      {p.data_main_base, p.data_main_blocks, {}},
      {p.data_holding_base, p.data_holding_blocks, {}},
      {p.pos_main_base, p.pos_main_blocks, {}},
      {p.pos_holding_base, p.pos_holding_blocks, {}}};
  for (const auto& e : t.events()) {
    if (e.kind != OpKind::Write) continue;
    for (auto& r : regions)
      if (e.index >= r.base && e.index < r.base + r.blocks)
        r.seq.push_back(e.index - r.base);
  }
  for (auto& r : regions) {
    CHECK(!r.seq.empty());
    for (size_t k = 1; k < r.seq.size(); ++k) {
      uint64_t step = (r.seq[k] + r.blocks - r.seq[k - 1]) % r.blocks;
      CHECK(step <= 1);  // same block again (packed fills) or the next one
    }
  }
}
