#include "bench.hpp"

#include <chrono>
#include <unordered_map>

#include "verifier.hpp"

namespace detworam {

Bytes random_block(std::mt19937_64& rng, uint32_t bytes) {
  Bytes b(bytes);
  size_t i = 0;
  for (; i + 8 <= b.size(); i += 8) put_u64(b.data() + i, rng());
  for (; i < b.size(); ++i) b[i] = uint8_t(rng());
  return b;
}

namespace {

// Attaches a scratch trace for the duration of a workload, restoring
// whatever the caller had attached.
class ScopedTrace {
 public:
  ScopedTrace(OramDrive& drive, Trace& t) : dev_(drive.device()) {
    prev_trace_ = dev_.trace();
    prev_on_ = dev_.tracing();
    t.meta() = drive.trace_meta();
    dev_.attach_trace(&t);
    dev_.set_tracing(true);
  }
  ~ScopedTrace() {
    dev_.attach_trace(prev_trace_);
    dev_.set_tracing(prev_on_);
  }

 private:
  BlockStore& dev_;
  Trace* prev_trace_;
  bool prev_on_;
};

}  // namespace

BenchResult run_bench(OramDrive& drive, Workload w, uint64_t ops,
                      uint64_t seed, Trace* trace_out) {
  BenchResult r;
  Trace trace;
  std::mt19937_64 rng(seed);
  uint64_t n = drive.logical_blocks();
  std::uniform_int_distribution<uint64_t> addr_dist(0, n - 1);
  Bytes data = random_block(rng, drive.block_bytes());

  auto t0 = std::chrono::steady_clock::now();
  {
    ScopedTrace scoped(drive, trace);
    for (uint64_t op = 0; op < ops; ++op) {
      switch (w) {
        case Workload::SeqW:
          put_u64(data.data(), rng());
          drive.write(op % n, data);
          ++r.logical_writes;
          break;
        case Workload::RandW:
          put_u64(data.data(), rng());
          drive.write(addr_dist(rng), data);
          ++r.logical_writes;
          break;
        case Workload::SeqR:
          drive.read(op % n);
          ++r.logical_reads;
          break;
        case Workload::RandR:
          drive.read(addr_dist(rng));
          ++r.logical_reads;
          break;
      }
    }
  }
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  uint64_t base = drive.payload_base();
  for (const auto& e : trace.events()) {
    if (e.kind == OpKind::Read)
      ++r.physical_reads;
    else if (e.index >= base)
      ++r.physical_writes;
    else
      ++r.superblock_writes;
  }
  if (trace_out) *trace_out = std::move(trace);
  return r;
}

FuzzResult run_fuzz(OramDrive& drive, uint64_t ops, uint64_t seed) {
  FuzzResult r;
  r.ops = ops;
  std::mt19937_64 rng(seed);
  uint64_t n = drive.logical_blocks();
  std::uniform_int_distribution<uint64_t> addr_dist(0, n - 1);
  std::unordered_map<uint64_t, Bytes> reference;
  Bytes zeros(drive.block_bytes(), 0);

  for (uint64_t op = 0; op < ops; ++op) {
    uint64_t a = addr_dist(rng);
    if (rng() & 1) {
      Bytes d = random_block(rng, drive.block_bytes());
      drive.write(a, d);
      reference[a] = std::move(d);
    } else {
      Bytes got = drive.read(a);
      auto it = reference.find(a);
      const Bytes& want = it == reference.end() ? zeros : it->second;
      if (got != want) {
        ++r.failures;
        if (r.pass) {
          r.pass = false;
          r.first_failure =
              "op " + std::to_string(op) + ": read of address " +
              std::to_string(a) + " diverged from the reference";
        }
      }
    }
  }
  return r;
}

}  // namespace detworam
