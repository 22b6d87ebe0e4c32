// Command-line front end.  Everything goes through the public C interface
// in detworam/detworam.h; this file never touches the library internals.

#include <CLI11.hpp>
#include <detworam/detworam.h>
#include <json.hpp>

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

using json = nlohmann::json;

namespace {

struct Target {
  // Either a container on disk or an in-memory simulation.
  std::string container, key;
  std::string scheme = "det";  // det | toy | hive
  std::string mode = "seg";    // seg | ilv
  uint64_t n = 1024;
  uint64_t m = 0;  // 0: derive from ratio
  uint32_t ratio = 3;
  uint32_t branch = 64;
  uint32_t block_bytes = 4096;
  uint64_t seed = 1;
  bool lazy_state = false;
};

void add_target_flags(CLI::App* cmd, Target& t, bool sim_params = true) {
  cmd->add_option("--container", t.container, "container file path");
  cmd->add_option("--key", t.key, "key file (raw 32 bytes)");
  if (sim_params) {
    cmd->add_option("--scheme", t.scheme, "det | toy | hive (in-memory run)")
        ->check(CLI::IsMember({"det", "toy", "hive"}));
    cmd->add_option("--mode", t.mode, "seg | ilv")
        ->check(CLI::IsMember({"seg", "ilv"}));
    cmd->add_option("--size-blocks,--n", t.n, "logical blocks N");
    cmd->add_option("--holding,--m", t.m, "holding blocks M (overrides ratio)");
    cmd->add_option("--ratio", t.ratio, "M = ratio * N (default 3; ilv needs 2)");
    cmd->add_option("--branch", t.branch, "trie branching factor b");
    cmd->add_option("--block-bytes", t.block_bytes, "block size in bytes");
    cmd->add_option("--sim-seed", t.seed, "seed for randomized schemes");
  }
  cmd->add_flag("--lazy-state", t.lazy_state,
                "persist state on close only, not after every write");
}

[[noreturn]] void die(const std::string& what, dw_status s) {
  std::cerr << "error: " << what << ": " << dw_status_str(s) << "\n";
  std::exit(2);
}

struct Handle {
  dw_woram* w = nullptr;
  ~Handle() {
    if (w) dw_close(w);
  }
};

void open_target(const Target& t, Handle& h, bool allow_sim = true) {
  if (!t.container.empty()) {
    if (t.key.empty()) die("container access needs --key", DW_ERR_INVALID_ARG);
    dw_status s = dw_container_open(t.container.c_str(), t.key.c_str(), &h.w);
    if (s != DW_OK) die("open " + t.container, s);
  } else if (allow_sim) {
    dw_scheme scheme = t.scheme == "toy"    ? DW_SCHEME_TOY
                       : t.scheme == "hive" ? DW_SCHEME_HIVE
                                            : DW_SCHEME_DET;
    dw_mode mode =
        t.mode == "ilv" ? DW_MODE_INTERLEAVED : DW_MODE_SEGMENTED;
    uint64_t m = t.m;
    if (m == 0)
      m = (scheme == DW_SCHEME_DET && mode == DW_MODE_INTERLEAVED)
              ? 2 * t.n
              : uint64_t(t.ratio) * t.n;
    dw_status s = dw_sim_create(scheme, mode, t.block_bytes, t.n, m, t.branch,
                                t.seed, &h.w);
    if (s != DW_OK) die("create in-memory " + t.scheme, s);
  } else {
    die("this command needs --container", DW_ERR_INVALID_ARG);
  }
  if (t.lazy_state && !t.container.empty()) dw_lazy_state(h.w, 1);
}

std::vector<uint8_t> parse_hex(const std::string& hex) {
  if (hex.size() % 2) die("odd hex length", DW_ERR_INVALID_ARG);
  auto nib = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    die("bad hex digit", DW_ERR_INVALID_ARG);
  };
  std::vector<uint8_t> out(hex.size() / 2);
  for (size_t k = 0; k < out.size(); ++k)
    out[k] = uint8_t(nib(hex[2 * k]) << 4 | nib(hex[2 * k + 1]));
  return out;
}

uint32_t block_size_of(dw_woram* w) {
  dw_geometry g{};
  if (dw_get_geometry(w, &g) != DW_OK) die("geometry", DW_ERR_INTERNAL);
  return g.block_bytes;
}

void write_json(const std::string& path, const json& j) {
  if (path.empty()) return;
  std::ofstream os(path, std::ios::trunc);
  os << j.dump(2) << "\n";
  if (!os.good()) die("write " + path, DW_ERR_IO);
}

dw_workload parse_workload(const std::string& w) {
  if (w == "seqw") return DW_WORKLOAD_SEQ_W;
  if (w == "seqr") return DW_WORKLOAD_SEQ_R;
  if (w == "randw") return DW_WORKLOAD_RAND_W;
  if (w == "randr") return DW_WORKLOAD_RAND_R;
  die("unknown workload " + w, DW_ERR_INVALID_ARG);
}

json bench_json(const dw_bench_result& r) {
  return json{{"logical_reads", r.counters.logical_reads},
              {"logical_writes", r.counters.logical_writes},
              {"physical_reads", r.counters.physical_reads},
              {"physical_writes", r.counters.physical_writes},
              {"superblock_writes", r.counters.superblock_writes},
              {"wall_seconds", r.wall_seconds},
              {"writes_per_logical_write", r.writes_per_logical_write},
              {"reads_per_logical_read", r.reads_per_logical_read}};
}

// "2.5" -> 25/10 exactly.
std::pair<uint32_t, uint32_t> parse_bound(const std::string& s) {
  auto dot = s.find('.');
  if (dot == std::string::npos) return {uint32_t(std::stoul(s)), 1};
  std::string digits = s.substr(0, dot) + s.substr(dot + 1);
  uint32_t den = 1;
  for (size_t k = 0; k < s.size() - dot - 1; ++k) den *= 10;
  return {uint32_t(std::stoul(digits)), den};
}

void run_sequences_and_collect(const Target& t, uint64_t runs, uint64_t ops,
                               uint64_t seed,
                               std::vector<std::string>& trace_files) {
  for (uint64_t r = 0; r < runs; ++r) {
    Target tr = t;
    tr.seed = seed + r;
    Handle h;
    open_target(tr, h);
    dw_trace_enable(h.w, 1);
    dw_geometry g{};
    dw_get_geometry(h.w, &g);
    std::vector<uint8_t> block(g.block_bytes);
    // Simple multiplicative generator, seeded per run, so the logical
    // sequences differ between runs.
    uint64_t x = (seed + r) * 6364136223846793005ull + 1442695040888963407ull;
    for (uint64_t k = 0; k < ops; ++k) {
      x = x * 6364136223846793005ull + 1442695040888963407ull;
      uint64_t addr = (x >> 33) % g.num_main;
      for (auto& b : block) b = uint8_t((x >> 24) ^ b);
      if (dw_write(h.w, addr, block.data(), block.size()) != DW_OK)
        die("write during verification run", DW_ERR_INTERNAL);
    }
    std::string path = "/tmp/dw_verify_" + std::to_string(::getpid()) + "_" +
                       std::to_string(r) + ".trace";
    if (dw_trace_save(h.w, path.c_str()) != DW_OK) die("save trace", DW_ERR_IO);
    trace_files.push_back(path);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic write-only oblivious block storage"};
  app.require_subcommand(1);

  // ---- create ---------------------------------------------------------
  auto* c_create = app.add_subcommand("create", "create a container file");
  Target t_create;
  add_target_flags(c_create, t_create);
  bool gen_key = false;
  c_create->add_flag("--gen-key", gen_key, "generate the key file first");

  // ---- read / write ---------------------------------------------------
  auto* c_read = app.add_subcommand("read", "read one logical block");
  Target t_read;
  add_target_flags(c_read, t_read, false);
  uint64_t read_addr = 0;
  std::string read_out;
  c_read->add_option("--addr", read_addr, "logical address")->required();
  c_read->add_option("--out", read_out,
                     "write raw block to file (hex to stdout otherwise)");

  auto* c_write = app.add_subcommand("write", "write one logical block");
  Target t_write;
  add_target_flags(c_write, t_write, false);
  uint64_t write_addr = 0;
  std::string write_hex, write_in;
  c_write->add_option("--addr", write_addr, "logical address")->required();
  c_write->add_option("--data-hex", write_hex,
                      "block content as hex (zero padded)");
  c_write->add_option("--in", write_in, "read block content from file");

  // ---- fuzz -----------------------------------------------------------
  auto* c_fuzz =
      app.add_subcommand("fuzz", "random ops against a reference map");
  Target t_fuzz;
  add_target_flags(c_fuzz, t_fuzz);
  uint64_t fuzz_ops = 100000, fuzz_seed = 1;
  c_fuzz->add_option("--ops", fuzz_ops, "operation count");
  c_fuzz->add_option("--seed", fuzz_seed, "workload seed");

  // ---- bench ----------------------------------------------------------
  auto* c_bench = app.add_subcommand("bench", "op-count benchmark");
  Target t_bench;
  add_target_flags(c_bench, t_bench);
  std::string bench_workload = "seqw", bench_trace, bench_json_path;
  uint64_t bench_ops = 10000, bench_seed = 1;
  c_bench
      ->add_option("--workload", bench_workload, "seqw | seqr | randw | randr")
      ->check(CLI::IsMember({"seqw", "seqr", "randw", "randr"}));
  c_bench->add_option("--ops", bench_ops, "operation count");
  c_bench->add_option("--seed", bench_seed, "workload seed");
  c_bench->add_option("--trace", bench_trace, "save the physical trace here");
  c_bench->add_option("--json", bench_json_path, "machine-readable summary");

  // ---- trace ----------------------------------------------------------
  auto* c_trace =
      app.add_subcommand("trace", "run a workload and export its trace");
  Target t_trace;
  add_target_flags(c_trace, t_trace);
  std::string trace_workload = "randw", trace_out;
  uint64_t trace_ops = 1000, trace_seed = 1;
  c_trace->add_option("--workload", trace_workload)
      ->check(CLI::IsMember({"seqw", "seqr", "randw", "randr"}));
  c_trace->add_option("--ops", trace_ops);
  c_trace->add_option("--seed", trace_seed);
  c_trace->add_option("--out", trace_out, "trace file")->required();

  // ---- verify ---------------------------------------------------------
  auto* c_verify = app.add_subcommand("verify", "obliviousness checks");
  Target t_verify;
  add_target_flags(c_verify, t_verify);
  std::string check = "det", verify_json_path;
  std::vector<std::string> verify_traces;
  uint64_t verify_runs = 20, verify_ops = 500, verify_seed = 1,
           verify_writes = 0, verify_reads = 0, verify_every = 100;
  std::string verify_bound = "2.5";
  double verify_read_bound = 10.0;
  c_verify->add_option("--check", check, "det | budget | read | snapshot")
      ->check(CLI::IsMember({"det", "budget", "read", "snapshot"}));
  c_verify->add_option("--traces", verify_traces, "pre-recorded trace files");
  c_verify->add_option("--runs", verify_runs,
                       "sequences to generate (det/snapshot)");
  c_verify->add_option("--ops", verify_ops, "writes per sequence");
  c_verify->add_option("--seed", verify_seed);
  c_verify->add_option("--writes", verify_writes,
                       "logical writes behind --traces (budget)");
  c_verify->add_option("--reads", verify_reads,
                       "logical reads behind --traces (read)");
  c_verify->add_option("--bound", verify_bound,
                       "write budget, e.g. 2.5 (budget)");
  c_verify->add_option("--read-bound", verify_read_bound,
                       "read budget (read)");
  c_verify->add_option("--every", verify_every, "snapshot interval (snapshot)");
  c_verify->add_option("--json", verify_json_path, "machine-readable summary");

  // ---- attack ---------------------------------------------------------
  auto* c_attack =
      app.add_subcommand("attack", "write-policy attack demonstrator");
  std::string attack_scheme = "datalair", attack_json_path, attack_report;
  uint64_t attack_n = 64, attack_trials = 1000000, attack_seed = 1;
  uint32_t attack_k = 3;
  c_attack->add_option("--scheme", attack_scheme)
      ->check(CLI::IsMember({"datalair"}));
  c_attack->add_option("--n", attack_n, "logical blocks");
  c_attack->add_option("--k", attack_k, "physical writes per logical write");
  c_attack->add_option("--trials", attack_trials,
                       "Monte-Carlo trials per sequence");
  c_attack->add_option("--seed", attack_seed);
  c_attack->add_option("--json", attack_json_path, "machine-readable summary");
  c_attack->add_option("--report", attack_report,
                       "write the text report here too");

  // ---- feasible -------------------------------------------------------
  auto* c_feasible =
      app.add_subcommand("feasible", "half-block packing feasibility");
  std::string feas_n = "1024";
  uint32_t feas_branch = 2;
  uint64_t feas_bits = 32768;
  bool feas_boundary = false;
  c_feasible->add_option("--n", feas_n, "logical blocks (decimal, any size)");
  c_feasible->add_option("--branch", feas_branch);
  c_feasible->add_option("--block-bits", feas_bits);
  c_feasible->add_flag("--boundary", feas_boundary,
                       "binary search the largest feasible N");

  CLI11_PARSE(app, argc, argv);

  if (c_create->parsed()) {
    if (t_create.container.empty() || t_create.key.empty())
      die("create needs --container and --key", DW_ERR_INVALID_ARG);
    if (gen_key) {
      dw_status s = dw_keyfile_generate(t_create.key.c_str());
      if (s != DW_OK) die("generate key", s);
    }
    dw_create_params p{};
    p.path = t_create.container.c_str();
    p.keyfile = t_create.key.c_str();
    p.block_bytes = t_create.block_bytes;
    p.num_main = t_create.n;
    p.ratio = t_create.ratio;
    if (t_create.m) {
      if (t_create.m % t_create.n)
        die("--holding must be a multiple of N", DW_ERR_INVALID_ARG);
      p.ratio = uint32_t(t_create.m / t_create.n);
    }
    p.branch = t_create.branch;
    p.mode = t_create.mode == "ilv" ? DW_MODE_INTERLEAVED : DW_MODE_SEGMENTED;
    dw_woram* w = nullptr;
    dw_status s = dw_container_create(&p, &w);
    if (s != DW_OK) die("create container", s);
    dw_geometry g{};
    dw_get_geometry(w, &g);
    std::cout << "created " << t_create.container << ": N=" << g.num_main
              << " M=" << g.num_holding << " b=" << g.branch
              << " block=" << g.block_bytes << " mode=" << t_create.mode
              << " blocks=" << g.total_blocks << "\n";
    dw_close(w);
    return 0;
  }

  if (c_read->parsed()) {
    Handle h;
    open_target(t_read, h, false);
    std::vector<uint8_t> buf(block_size_of(h.w));
    dw_status s = dw_read(h.w, read_addr, buf.data(), buf.size());
    if (s != DW_OK) die("read", s);
    if (!read_out.empty()) {
      std::ofstream os(read_out, std::ios::binary | std::ios::trunc);
      os.write(reinterpret_cast<char*>(buf.data()), buf.size());
    } else {
      static const char* hexd = "0123456789abcdef";
      std::string line;
      for (uint8_t b : buf) {
        line += hexd[b >> 4];
        line += hexd[b & 15];
      }
      std::cout << line << "\n";
    }
    return 0;
  }

  if (c_write->parsed()) {
    Handle h;
    open_target(t_write, h, false);
    std::vector<uint8_t> buf(block_size_of(h.w), 0);
    if (!write_in.empty()) {
      std::ifstream is(write_in, std::ios::binary);
      if (!is) die("open " + write_in, DW_ERR_IO);
      is.read(reinterpret_cast<char*>(buf.data()), buf.size());
    } else if (!write_hex.empty()) {
      auto bytes = parse_hex(write_hex);
      if (bytes.size() > buf.size())
        die("--data-hex longer than a block", DW_ERR_SIZE_MISMATCH);
      std::copy(bytes.begin(), bytes.end(), buf.begin());
    } else {
      die("write needs --data-hex or --in", DW_ERR_INVALID_ARG);
    }
    dw_status s = dw_write(h.w, write_addr, buf.data(), buf.size());
    if (s != DW_OK) die("write", s);
    std::cout << "wrote address " << write_addr << "\n";
    return 0;
  }

  if (c_fuzz->parsed()) {
    Handle h;
    open_target(t_fuzz, h);
    uint64_t failures = 0;
    char err[512] = {0};
    dw_status s =
        dw_fuzz(h.w, fuzz_ops, fuzz_seed, &failures, err, sizeof(err));
    if (s == DW_OK) {
      std::cout << "fuzz PASS: " << fuzz_ops << " ops, seed " << fuzz_seed
                << "\n";
      return 0;
    }
    std::cout << "fuzz FAIL: " << failures << " divergent reads (" << err
              << ")\n";
    return 1;
  }

  if (c_bench->parsed() || c_trace->parsed()) {
    const Target& t = c_bench->parsed() ? t_bench : t_trace;
    std::string workload = c_bench->parsed() ? bench_workload : trace_workload;
    uint64_t ops = c_bench->parsed() ? bench_ops : trace_ops;
    uint64_t seed = c_bench->parsed() ? bench_seed : trace_seed;
    std::string trace_path = c_bench->parsed() ? bench_trace : trace_out;

    Handle h;
    open_target(t, h);
    if (!trace_path.empty()) dw_trace_enable(h.w, 1);
    dw_bench_result r{};
    dw_status s = dw_bench(h.w, parse_workload(workload), ops, seed, &r);
    if (s != DW_OK) die("bench", s);
    std::cout << "scheme=" << (t.container.empty() ? t.scheme : "det")
              << " workload=" << workload << " ops=" << ops
              << " seed=" << seed << "\n"
              << "  logical: " << r.counters.logical_reads << " reads, "
              << r.counters.logical_writes << " writes\n"
              << "  physical: " << r.counters.physical_reads << " reads, "
              << r.counters.physical_writes << " payload writes, "
              << r.counters.superblock_writes << " state writes\n"
              << "  writes/logical-write = " << r.writes_per_logical_write
              << "\n"
              << "  reads/logical-read = " << r.reads_per_logical_read << "\n"
              << "  wall = " << r.wall_seconds << " s\n";
    if (!trace_path.empty()) {
      if (dw_trace_save(h.w, trace_path.c_str()) != DW_OK)
        die("save trace", DW_ERR_IO);
      std::cout << "  trace -> " << trace_path << "\n";
    }
    if (c_bench->parsed()) write_json(bench_json_path, bench_json(r));
    return 0;
  }

  if (c_verify->parsed()) {
    int pass = 0;
    char report[2048] = {0};
    json j;
    if (check == "det") {
      std::vector<std::string> files = verify_traces;
      if (files.empty())
        run_sequences_and_collect(t_verify, verify_runs, verify_ops,
                                  verify_seed, files);
      std::vector<const char*> ptrs;
      for (auto& f : files) ptrs.push_back(f.c_str());
      dw_status s = dw_verify_determinism(ptrs.data(), ptrs.size(), &pass,
                                          report, sizeof(report));
      if (s != DW_OK) die("verify det", s);
      if (verify_traces.empty())
        for (auto& f : files) std::remove(f.c_str());
      j = json{{"check", "det"}, {"runs", files.size()}, {"pass", pass == 1}};
    } else if (check == "budget") {
      if (verify_traces.size() != 1 || verify_writes == 0)
        die("budget needs --traces FILE and --writes", DW_ERR_INVALID_ARG);
      auto [num, den] = parse_bound(verify_bound);
      double measured = 0;
      dw_status s = dw_verify_write_budget(verify_traces[0].c_str(),
                                           verify_writes, num, den, &measured,
                                           &pass, report, sizeof(report));
      if (s != DW_OK) die("verify budget", s);
      j = json{{"check", "budget"},
               {"bound", verify_bound},
               {"measured", measured},
               {"pass", pass == 1}};
    } else if (check == "read") {
      if (verify_traces.size() != 1 || verify_reads == 0)
        die("read check needs --traces FILE and --reads", DW_ERR_INVALID_ARG);
      double measured = 0;
      dw_status s = dw_verify_read_budget(verify_traces[0].c_str(),
                                          verify_reads, verify_read_bound,
                                          &measured, &pass, report,
                                          sizeof(report));
      if (s != DW_OK) die("verify read", s);
      j = json{{"check", "read"},
               {"bound", verify_read_bound},
               {"measured", measured},
               {"pass", pass == 1}};
    } else {  // snapshot
      std::vector<std::vector<uint8_t>> images[2];
      size_t image_len = 0;
      uint64_t total_blocks = 0;
      for (int run = 0; run < 2; ++run) {
        Target tr = t_verify;
        tr.seed = verify_seed + uint64_t(run);
        Handle h;
        open_target(tr, h);
        dw_geometry g{};
        dw_get_geometry(h.w, &g);
        image_len = size_t(g.total_blocks) * g.device_block_bytes;
        total_blocks = g.total_blocks;
        std::vector<uint8_t> block(g.block_bytes);
        uint64_t x = tr.seed * 2862933555777941757ull + 3037000493ull;
        std::vector<uint8_t> img(image_len);
        if (dw_device_image(h.w, img.data(), img.size()) != DW_OK)
          die("device image", DW_ERR_INTERNAL);
        images[run].push_back(img);
        for (uint64_t k = 0; k < verify_ops; ++k) {
          x = x * 2862933555777941757ull + 3037000493ull;
          for (auto& b : block) b = uint8_t(b ^ (x >> 13));
          if (dw_write(h.w, (x >> 33) % g.num_main, block.data(),
                       block.size()) != DW_OK)
            die("snapshot run write", DW_ERR_INTERNAL);
          if ((k + 1) % verify_every == 0) {
            if (dw_device_image(h.w, img.data(), img.size()) != DW_OK)
              die("device image", DW_ERR_INTERNAL);
            images[run].push_back(img);
          }
        }
      }
      std::vector<const uint8_t*> pa, pb;
      for (auto& i : images[0]) pa.push_back(i.data());
      for (auto& i : images[1]) pb.push_back(i.data());
      uint32_t device_block = uint32_t(image_len / total_blocks);
      dw_status s = dw_verify_snapshots(pa.data(), pb.data(), pa.size(),
                                        image_len, device_block, &pass,
                                        report, sizeof(report));
      if (s != DW_OK) die("verify snapshot", s);
      j = json{{"check", "snapshot"},
               {"snapshots", pa.size()},
               {"pass", pass == 1}};
    }
    std::cout << report << "\n";
    write_json(verify_json_path, j);
    return pass == 1 ? 0 : 1;
  }

  if (c_attack->parsed()) {
    dw_attack_result r{};
    char report[2048] = {0};
    dw_status s = dw_attack_datalair(attack_n, attack_k, attack_trials,
                                     attack_seed, &r, report, sizeof(report));
    if (s != DW_OK) die("attack", s);
    std::cout << report;
    if (!attack_report.empty()) {
      std::ofstream os(attack_report, std::ios::trunc);
      os << report;
    }
    write_json(attack_json_path,
               json{{"scheme", "datalair"},
                    {"n", attack_n},
                    {"k", attack_k},
                    {"trials", r.trials_per_sequence},
                    {"aborted", r.aborted_trials},
                    {"p0", r.p0},
                    {"p1", r.p1},
                    {"p0_wilson99", {r.p0_lo, r.p0_hi}},
                    {"p1_wilson99", {r.p1_lo, r.p1_hi}},
                    {"advantage", r.advantage},
                    {"bound", r.bound},
                    {"distinguishes", r.distinguishes == 1}});
    return r.distinguishes ? 0 : 1;
  }

  if (c_feasible->parsed()) {
    if (feas_boundary) {
      char buf[64];
      dw_status s =
          dw_feasible_boundary(feas_branch, feas_bits, buf, sizeof(buf));
      if (s != DW_OK) die("boundary", s);
      std::cout << "largest feasible N at b=" << feas_branch
                << ", B=" << feas_bits << " bits: " << buf << "\n";
    } else {
      int ok = 0;
      dw_status s = dw_feasible(feas_n.c_str(), feas_branch, feas_bits, &ok);
      if (s != DW_OK) die("feasible", s);
      std::cout << "N=" << feas_n << " b=" << feas_branch << " B=" << feas_bits
                << " bits: " << (ok ? "feasible" : "infeasible") << "\n";
      return ok ? 0 : 1;
    }
    return 0;
  }

  return 0;
}
