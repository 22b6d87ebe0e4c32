#pragma once

// Seeded workloads: the fuzz oracle (random ops against a reference map)
// and op-count benchmarks.

#include <random>

#include "drive.hpp"

namespace detworam {

enum class Workload { SeqW, SeqR, RandW, RandR };

struct BenchResult {
  uint64_t logical_reads = 0;
  uint64_t logical_writes = 0;
  uint64_t physical_reads = 0;
  uint64_t physical_writes = 0;   // payload regions only
  uint64_t superblock_writes = 0;
  double wall_seconds = 0;

  double writes_per_logical_write() const {
    return logical_writes ? double(physical_writes) / double(logical_writes)
                          : 0;
  }
  double reads_per_logical_read() const {
    return logical_reads ? double(physical_reads) / double(logical_reads) : 0;
  }
};

struct FuzzResult {
  bool pass = true;
  uint64_t ops = 0;
  uint64_t failures = 0;
  std::string first_failure;
};

BenchResult run_bench(OramDrive& drive, Workload w, uint64_t ops,
                      uint64_t seed, Trace* trace_out = nullptr);

// Random mix of reads and writes checked against an in-memory reference.
FuzzResult run_fuzz(OramDrive& drive, uint64_t ops, uint64_t seed);

Bytes random_block(std::mt19937_64& rng, uint32_t bytes);

}  // namespace detworam
