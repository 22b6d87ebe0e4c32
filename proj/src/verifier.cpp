#include "verifier.hpp"

#include <set>
#include <sstream>

namespace detworam {

uint64_t trace_payload_base(const TraceMeta& meta) {
  std::istringstream is(meta.params);
  std::string tok;
  while (is >> tok) {
    if (tok.rfind("payload_base=", 0) == 0)
      return std::stoull(tok.substr(strlen("payload_base=")));
  }
  return 0;
}

CheckResult check_determinism(const std::vector<Trace>& traces) {
  CheckResult r;
  r.name = "write-location-determinism";
  if (traces.size() < 2) {
    r.pass = true;
    r.detail = "fewer than two traces, trivially equal";
    return r;
  }
  const TraceMeta& m0 = traces[0].meta();
  for (size_t k = 1; k < traces.size(); ++k) {
    const TraceMeta& mk = traces[k].meta();
    if (mk.block_bytes != m0.block_bytes || mk.num_blocks != m0.num_blocks ||
        mk.scheme != m0.scheme)
      fail(DW_ERR_INVALID_ARG, "geometry mismatch between traces");
  }

  std::vector<std::vector<uint64_t>> locs(traces.size());
  for (size_t k = 0; k < traces.size(); ++k)
    for (const auto& e : traces[k].events())
      if (e.kind == OpKind::Write) locs[k].push_back(e.index);

  for (size_t k = 1; k < locs.size(); ++k) {
    if (locs[k].size() != locs[0].size()) {
      r.detail = "trace " + std::to_string(k) + " has " +
                 std::to_string(locs[k].size()) + " writes, trace 0 has " +
                 std::to_string(locs[0].size());
      return r;
    }
    for (size_t j = 0; j < locs[0].size(); ++j) {
      if (locs[k][j] != locs[0][j]) {
        r.detail = "trace " + std::to_string(k) + " write #" +
                   std::to_string(j) + " hits block " +
                   std::to_string(locs[k][j]) + ", trace 0 hits " +
                   std::to_string(locs[0][j]);
        return r;
      }
    }
  }
  r.pass = true;
  r.detail = std::to_string(traces.size()) + " traces, " +
             std::to_string(locs[0].size()) + " writes each, identical";
  return r;
}

CheckResult check_write_budget(const Trace& t, uint64_t logical_writes,
                               uint32_t bound_num, uint32_t bound_den,
                               double* measured) {
  CheckResult r;
  r.name = "write-budget";
  if (bound_den == 0 || logical_writes == 0) {
    r.pass = logical_writes == 0;
    r.detail = "no logical writes";
    return r;
  }
  uint64_t base = trace_payload_base(t.meta());
  uint64_t writes = 0;
  for (const auto& e : t.events())
    if (e.kind == OpKind::Write && e.index >= base) ++writes;
  double avg = double(writes) / double(logical_writes);
  if (measured) *measured = avg;
  // Exact rational comparison.
  r.pass = (unsigned __int128)(writes)*bound_den <=
           (unsigned __int128)(logical_writes)*bound_num;
  std::ostringstream os;
  os << writes << " payload writes / " << logical_writes << " logical = "
     << avg << " (bound " << bound_num << "/" << bound_den << ")";
  r.detail = os.str();
  return r;
}

CheckResult check_read_budget(const Trace& t, uint64_t logical_reads,
                              double bound, double* measured) {
  CheckResult r;
  r.name = "read-budget";
  if (logical_reads == 0) {
    r.pass = true;
    r.detail = "no logical reads";
    return r;
  }
  double avg = double(t.read_count()) / double(logical_reads);
  if (measured) *measured = avg;
  r.pass = avg <= bound;
  std::ostringstream os;
  os << t.read_count() << " physical reads / " << logical_reads
     << " logical = " << avg << " (bound " << bound << ")";
  r.detail = os.str();
  return r;
}

CheckResult check_snapshot_freshness(const std::vector<Bytes>& run_a,
                                     const std::vector<Bytes>& run_b,
                                     uint32_t block_bytes) {
  CheckResult r;
  r.name = "snapshot-changed-sets";
  if (run_a.size() != run_b.size() || run_a.size() < 2) {
    r.detail = "need two equally long snapshot sequences";
    return r;
  }
  auto changed = [&](const Bytes& x, const Bytes& y) {
    std::set<uint64_t> idx;
    if (x.size() != y.size()) fail(DW_ERR_INVALID_ARG, "image size mismatch");
    for (uint64_t b = 0; b * block_bytes < x.size(); ++b) {
      if (std::memcmp(x.data() + b * block_bytes, y.data() + b * block_bytes,
                      block_bytes) != 0)
        idx.insert(b);
    }
    return idx;
  };
  for (size_t s = 1; s < run_a.size(); ++s) {
    auto ca = changed(run_a[s - 1], run_a[s]);
    auto cb = changed(run_b[s - 1], run_b[s]);
    if (ca != cb) {
      std::vector<uint64_t> diff;
      std::set_symmetric_difference(ca.begin(), ca.end(), cb.begin(), cb.end(),
                                    std::back_inserter(diff));
      r.detail = "interval " + std::to_string(s) + ": changed sets differ at " +
                 std::to_string(diff.size()) + " blocks (first " +
                 std::to_string(diff.front()) + ")";
      return r;
    }
  }
  r.pass = true;
  r.detail = std::to_string(run_a.size() - 1) + " intervals, identical sets";
  return r;
}

}  // namespace detworam
