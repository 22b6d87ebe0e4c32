#pragma once

// Obliviousness test harness over recorded traces and device snapshots.
// Every check is a function of physical locations and ciphertext bytes
// only; plaintext never enters here.  Computational indistinguishability is
// replaced by the exact location-equality proxy the determinism argument
// reduces to.

#include "device.hpp"

namespace detworam {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // measurements, or the first offending event

  std::string line() const {
    return std::string(pass ? "PASS" : "FAIL") + " " + name +
           (detail.empty() ? "" : ": " + detail);
  }
};

// All WRITE-location sequences must be pairwise identical.  Traces must
// come from freshly-created containers with identical geometry.
CheckResult check_determinism(const std::vector<Trace>& traces);

// Payload WRITEs per logical write <= num/den, exactly rational.  Physical
// indices below the trace's payload_base are client-state writes and are
// not counted.
CheckResult check_write_budget(const Trace& t, uint64_t logical_writes,
                               uint32_t bound_num, uint32_t bound_den,
                               double* measured = nullptr);

// Average physical reads per logical read <= bound.
CheckResult check_read_budget(const Trace& t, uint64_t logical_reads,
                              double bound, double* measured = nullptr);

// Changed-block index sets between consecutive snapshots must be identical
// across the two runs.
CheckResult check_snapshot_freshness(const std::vector<Bytes>& run_a,
                                     const std::vector<Bytes>& run_b,
                                     uint32_t block_bytes);

// Payload base recorded in a trace's metadata ("payload_base=k"), 0 when
// absent.
uint64_t trace_payload_base(const TraceMeta& meta);

}  // namespace detworam
