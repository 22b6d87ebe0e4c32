// extern-C surface of the library: opaque handles over the C++ core, every
// error reported as a dw_status.

#include <detworam/detworam.h>

#include <cstdio>
#include <cstring>

#include "bench.hpp"
#include "datalair.hpp"
#include "hive.hpp"
#include "toy.hpp"
#include "verifier.hpp"
#include "woram.hpp"

using namespace detworam;

struct dw_woram {
  std::unique_ptr<OramDrive> drive;
  Trace trace;
  dw_scheme scheme;
  uint64_t logical_reads = 0;
  uint64_t logical_writes = 0;
};

namespace {

dw_status wrap(const std::exception& e) {
  if (auto* err = dynamic_cast<const Error*>(&e)) return err->code();
  return DW_ERR_INTERNAL;
}

template <typename Fn>
dw_status guarded(Fn&& fn) {
  try {
    fn();
    return DW_OK;
  } catch (const std::exception& e) {
    return wrap(e);
  } catch (...) {
    return DW_ERR_INTERNAL;
  }
}

void copy_report(const std::string& text, char* buf, size_t len) {
  if (!buf || len == 0) return;
  size_t n = std::min(text.size(), len - 1);
  std::memcpy(buf, text.data(), n);
  buf[n] = 0;
}

dw_woram* make_handle(std::unique_ptr<OramDrive> drive, dw_scheme scheme) {
  auto* h = new dw_woram{std::move(drive), Trace(), scheme, 0, 0};
  h->trace.meta() = h->drive->trace_meta();
  h->drive->device().attach_trace(&h->trace);
  return h;
}

}  // namespace

extern "C" {

DW_API dw_status dw_keyfile_generate(const char* path) {
  if (!path) return DW_ERR_INVALID_ARG;
  return guarded([&] { CipherKey::random().save(path); });
}

DW_API dw_status dw_container_create(const dw_create_params* params,
                                     dw_woram** out) {
  if (!params || !out || !params->keyfile) return DW_ERR_INVALID_ARG;
  return guarded([&] {
    DetConfig cfg;
    cfg.block_bytes = params->block_bytes ? params->block_bytes : 4096;
    cfg.num_main = params->num_main;
    uint32_t ratio = params->ratio ? params->ratio : 3;
    cfg.num_holding = uint64_t(ratio) * params->num_main;
    cfg.branch = params->branch ? params->branch : 64;
    cfg.mode = params->mode == DW_MODE_INTERLEAVED ? LayoutMode::Interleaved
                                                   : LayoutMode::Segmented;
    CipherKey key = CipherKey::load(params->keyfile);
    std::unique_ptr<DetWoram> w;
    if (params->path)
      w = DetWoram::create_file(params->path, cfg, key);
    else
      w = DetWoram::create_mem(cfg, key);
    *out = make_handle(std::move(w), DW_SCHEME_DET);
  });
}

DW_API dw_status dw_container_open(const char* path, const char* keyfile,
                                   dw_woram** out) {
  if (!path || !keyfile || !out) return DW_ERR_INVALID_ARG;
  return guarded([&] {
    CipherKey key = CipherKey::load(keyfile);
    *out = make_handle(DetWoram::open_file(path, key), DW_SCHEME_DET);
  });
}

DW_API dw_status dw_sim_create(dw_scheme scheme, dw_mode mode,
                               uint32_t block_bytes, uint64_t num_main,
                               uint64_t num_holding, uint32_t branch,
                               uint64_t seed, dw_woram** out) {
  if (!out) return DW_ERR_INVALID_ARG;
  return guarded([&] {
    if (block_bytes == 0) block_bytes = 4096;
    if (branch == 0) branch = 64;
    CipherKey key = CipherKey::random();
    std::unique_ptr<OramDrive> drive;
    switch (scheme) {
      case DW_SCHEME_TOY:
        drive = std::make_unique<ToyWoram>(block_bytes, num_main, key);
        break;
      case DW_SCHEME_HIVE:
        drive = std::make_unique<HiveWoram>(
            block_bytes, num_main,
            num_holding ? num_holding : 2 * num_main, key, seed);
        break;
      case DW_SCHEME_DET: {
        DetConfig cfg;
        cfg.block_bytes = block_bytes;
        cfg.num_main = num_main;
        cfg.num_holding = num_holding;
        cfg.branch = branch;
        cfg.mode = mode == DW_MODE_INTERLEAVED ? LayoutMode::Interleaved
                                               : LayoutMode::Segmented;
        uint64_t blocks = DetWoram::container_blocks(cfg);
        bool sparse = double(blocks) * block_bytes > 512.0 * 1024 * 1024;
        drive = DetWoram::create_mem(cfg, key, sparse);
        break;
      }
      default:
        fail(DW_ERR_INVALID_ARG, "unknown scheme");
    }
    *out = make_handle(std::move(drive), scheme);
  });
}

DW_API void dw_close(dw_woram* w) {
  if (!w) return;
  try {
    w->drive->close();
  } catch (...) {
  }
  delete w;
}

DW_API dw_status dw_read(dw_woram* w, uint64_t addr, uint8_t* buf,
                         size_t len) {
  if (!w || !buf) return DW_ERR_INVALID_ARG;
  return guarded([&] {
    if (len != w->drive->block_bytes())
      fail(DW_ERR_SIZE_MISMATCH, "buffer length must equal the block size");
    Bytes d = w->drive->read(addr);
    std::memcpy(buf, d.data(), d.size());
    ++w->logical_reads;
  });
}

DW_API dw_status dw_write(dw_woram* w, uint64_t addr, const uint8_t* buf,
                          size_t len) {
  if (!w || !buf) return DW_ERR_INVALID_ARG;
  return guarded([&] {
    if (len != w->drive->block_bytes())
      fail(DW_ERR_SIZE_MISMATCH, "buffer length must equal the block size");
    w->drive->write(addr, ByteView(buf, len));
    ++w->logical_writes;
  });
}

DW_API dw_status dw_persist(dw_woram* w) {
  if (!w) return DW_ERR_INVALID_ARG;
  return guarded([&] { w->drive->persist(); });
}

DW_API dw_status dw_lazy_state(dw_woram* w, int enable) {
  if (!w) return DW_ERR_INVALID_ARG;
  return guarded([&] {
    auto* det = dynamic_cast<DetWoram*>(w->drive.get());
    if (!det) fail(DW_ERR_STATE, "lazy state applies to containers only");
    det->set_lazy_state(enable != 0);
  });
}

DW_API dw_status dw_get_geometry(dw_woram* w, dw_geometry* out) {
  if (!w || !out) return DW_ERR_INVALID_ARG;
  return guarded([&] {
    std::memset(out, 0, sizeof(*out));
    out->block_bytes = w->drive->block_bytes();
    out->device_block_bytes = w->drive->device().block_bytes();
    out->num_main = w->drive->logical_blocks();
    out->scheme = uint32_t(w->scheme);
    out->total_blocks = w->drive->device().num_blocks();
    if (auto* det = dynamic_cast<DetWoram*>(w->drive.get())) {
      const LayoutPlan& p = det->plan();
      out->num_holding = p.num_holding;
      out->branch = p.trie.branch;
      out->mode = uint32_t(p.mode);
      out->trie_nodes = p.trie.node_count;
      out->trie_holding = p.trie.holding_count;
      out->path_writes = p.trie.path_writes;
      out->write_counter = det->state().i;
      out->posmap_counter = det->state().i_p;
    } else if (auto* hive = dynamic_cast<HiveWoram*>(w->drive.get())) {
      out->num_holding = hive->device().num_blocks();
    } else {
      out->num_holding = w->drive->logical_blocks();
    }
  });
}

DW_API dw_status dw_get_counters(dw_woram* w, dw_counters* out) {
  if (!w || !out) return DW_ERR_INVALID_ARG;
  return guarded([&] {
    std::memset(out, 0, sizeof(*out));
    out->logical_reads = w->logical_reads;
    out->logical_writes = w->logical_writes;
    uint64_t base = w->drive->payload_base();
    for (const auto& e : w->trace.events()) {
      if (e.kind == OpKind::Read)
        ++out->physical_reads;
      else if (e.index >= base)
        ++out->physical_writes;
      else
        ++out->superblock_writes;
    }
  });
}

DW_API dw_status dw_hive_stash(dw_woram* w, uint64_t* current, uint64_t* max) {
  if (!w) return DW_ERR_INVALID_ARG;
  return guarded([&] {
    auto* hive = dynamic_cast<HiveWoram*>(w->drive.get());
    if (!hive) fail(DW_ERR_STATE, "not a HiVE handle");
    if (current) *current = hive->stash_size();
    if (max) *max = hive->stash_max();
  });
}

DW_API dw_status dw_trace_enable(dw_woram* w, int on) {
  if (!w) return DW_ERR_INVALID_ARG;
  w->drive->device().set_tracing(on != 0);
  return DW_OK;
}

DW_API dw_status dw_trace_clear(dw_woram* w) {
  if (!w) return DW_ERR_INVALID_ARG;
  w->trace.clear();
  return DW_OK;
}

DW_API dw_status dw_trace_save(dw_woram* w, const char* path) {
  if (!w || !path) return DW_ERR_INVALID_ARG;
  return guarded([&] { w->trace.save(path); });
}

DW_API dw_status dw_device_image(dw_woram* w, uint8_t* buf, size_t len) {
  if (!w || !buf) return DW_ERR_INVALID_ARG;
  return guarded([&] {
    Bytes img = w->drive->device().image();
    if (img.size() != len) fail(DW_ERR_SIZE_MISMATCH, "image length mismatch");
    std::memcpy(buf, img.data(), len);
  });
}

DW_API dw_status dw_fuzz(dw_woram* w, uint64_t ops, uint64_t seed,
                         uint64_t* failures, char* errbuf, size_t errlen) {
  if (!w) return DW_ERR_INVALID_ARG;
  return guarded([&] {
    FuzzResult r = run_fuzz(*w->drive, ops, seed);
    if (failures) *failures = r.failures;
    copy_report(r.first_failure, errbuf, errlen);
    if (!r.pass) fail(DW_ERR_INTERNAL, "fuzz found read divergence");
  });
}

DW_API dw_status dw_bench(dw_woram* w, dw_workload workload, uint64_t ops,
                          uint64_t seed, dw_bench_result* out) {
  if (!w || !out) return DW_ERR_INVALID_ARG;
  return guarded([&] {
    Workload wl = Workload::SeqW;
    switch (workload) {
      case DW_WORKLOAD_SEQ_W: wl = Workload::SeqW; break;
      case DW_WORKLOAD_SEQ_R: wl = Workload::SeqR; break;
      case DW_WORKLOAD_RAND_W: wl = Workload::RandW; break;
      case DW_WORKLOAD_RAND_R: wl = Workload::RandR; break;
    }
    BenchResult r = run_bench(*w->drive, wl, ops, seed);
    std::memset(out, 0, sizeof(*out));
    out->counters.logical_reads = r.logical_reads;
    out->counters.logical_writes = r.logical_writes;
    out->counters.physical_reads = r.physical_reads;
    out->counters.physical_writes = r.physical_writes;
    out->counters.superblock_writes = r.superblock_writes;
    out->wall_seconds = r.wall_seconds;
    out->writes_per_logical_write = r.writes_per_logical_write();
    out->reads_per_logical_read = r.reads_per_logical_read();
  });
}

DW_API dw_status dw_feasible(const char* n_decimal, uint32_t branch,
                             uint64_t block_bits, int* out) {
  if (!n_decimal || !out) return DW_ERR_INVALID_ARG;
  return guarded([&] {
    *out = feasibility(parse_u128(n_decimal), branch, block_bits) ? 1 : 0;
  });
}

DW_API dw_status dw_feasible_boundary(uint32_t branch, uint64_t block_bits,
                                      char* buf, size_t buflen) {
  if (!buf) return DW_ERR_INVALID_ARG;
  return guarded([&] {
    std::string s = format_u128(feasibility_boundary(branch, block_bits));
    if (s.size() + 1 > buflen) fail(DW_ERR_SIZE_MISMATCH, "buffer too small");
    std::memcpy(buf, s.c_str(), s.size() + 1);
  });
}

DW_API dw_status dw_verify_determinism(const char* const* trace_paths,
                                       size_t count, int* pass, char* report,
                                       size_t reportlen) {
  if (!trace_paths || !pass) return DW_ERR_INVALID_ARG;
  return guarded([&] {
    std::vector<Trace> traces;
    traces.reserve(count);
    for (size_t i = 0; i < count; ++i)
      traces.push_back(Trace::load(trace_paths[i]));
    CheckResult r = check_determinism(traces);
    *pass = r.pass ? 1 : 0;
    copy_report(r.line(), report, reportlen);
  });
}

DW_API dw_status dw_verify_write_budget(const char* trace_path,
                                        uint64_t logical_writes,
                                        uint32_t bound_num, uint32_t bound_den,
                                        double* measured, int* pass,
                                        char* report, size_t reportlen) {
  if (!trace_path || !pass) return DW_ERR_INVALID_ARG;
  return guarded([&] {
    Trace t = Trace::load(trace_path);
    double m = 0;
    CheckResult r =
        check_write_budget(t, logical_writes, bound_num, bound_den, &m);
    if (measured) *measured = m;
    *pass = r.pass ? 1 : 0;
    copy_report(r.line(), report, reportlen);
  });
}

DW_API dw_status dw_verify_read_budget(const char* trace_path,
                                       uint64_t logical_reads, double bound,
                                       double* measured, int* pass,
                                       char* report, size_t reportlen) {
  if (!trace_path || !pass) return DW_ERR_INVALID_ARG;
  return guarded([&] {
    Trace t = Trace::load(trace_path);
    double m = 0;
    CheckResult r = check_read_budget(t, logical_reads, bound, &m);
    if (measured) *measured = m;
    *pass = r.pass ? 1 : 0;
    copy_report(r.line(), report, reportlen);
  });
}

DW_API dw_status dw_verify_snapshots(const uint8_t* const* images_a,
                                     const uint8_t* const* images_b,
                                     size_t count, size_t image_len,
                                     uint32_t block_bytes, int* pass,
                                     char* report, size_t reportlen) {
  if (!images_a || !images_b || !pass || block_bytes == 0 ||
      image_len % block_bytes != 0)
    return DW_ERR_INVALID_ARG;
  return guarded([&] {
    std::vector<Bytes> a, b;
    for (size_t i = 0; i < count; ++i) {
      a.emplace_back(images_a[i], images_a[i] + image_len);
      b.emplace_back(images_b[i], images_b[i] + image_len);
    }
    CheckResult r = check_snapshot_freshness(a, b, block_bytes);
    *pass = r.pass ? 1 : 0;
    copy_report(r.line(), report, reportlen);
  });
}

DW_API dw_status dw_attack_datalair(uint64_t n, uint32_t k, uint64_t trials,
                                    uint64_t seed, dw_attack_result* out,
                                    char* report, size_t reportlen) {
  return guarded([&] {
    AttackResult r = run_datalair_attack(n, k, trials, seed);
    if (out) {
      std::memset(out, 0, sizeof(*out));
      out->trials_per_sequence = r.trials;
      out->aborted_trials = r.aborted;
      out->p0 = r.p0;
      out->p1 = r.p1;
      out->advantage = r.advantage;
      out->bound = r.bound;
      out->p0_lo = r.p0_lo;
      out->p0_hi = r.p0_hi;
      out->p1_lo = r.p1_lo;
      out->p1_hi = r.p1_hi;
      out->distinguishes = r.distinguishes ? 1 : 0;
    }
    copy_report(r.report(n, k, seed), report, reportlen);
  });
}

DW_API const char* dw_status_str(dw_status s) {
  switch (s) {
    case DW_OK: return "ok";
    case DW_ERR_INVALID_ARG: return "invalid argument";
    case DW_ERR_INDEX_RANGE: return "block index out of range";
    case DW_ERR_ADDRESS_RANGE: return "logical address out of range";
    case DW_ERR_SIZE_MISMATCH: return "size mismatch";
    case DW_ERR_IO: return "i/o failure";
    case DW_ERR_BAD_MAGIC: return "not a container or bad version";
    case DW_ERR_WRONG_KEY: return "wrong key";
    case DW_ERR_INFEASIBLE: return "infeasible packing";
    case DW_ERR_OVERFLOW: return "payload overflow";
    case DW_ERR_PAYLOAD_TOO_LARGE: return "payload too large";
    case DW_ERR_MALFORMED: return "malformed data";
    case DW_ERR_INVALID_GEOMETRY: return "invalid geometry";
    case DW_ERR_STATE: return "invalid handle state";
    case DW_ERR_NOMEM: return "out of memory";
    case DW_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

DW_API const char* dw_version(void) { return "1.0.0"; }

}  // extern "C"
