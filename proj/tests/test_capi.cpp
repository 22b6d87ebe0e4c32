// Exercises the library through the public extern-C surface only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <detworam/detworam.h>

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const char* name)
      : path(std::string("/tmp/dw_capi_") + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("status strings") {
  CHECK(std::string(dw_status_str(DW_OK)) == "ok");
  CHECK(std::string(dw_status_str(DW_ERR_WRONG_KEY)) == "wrong key");
  CHECK(dw_version() != nullptr);
}

TEST_CASE("container lifecycle through the C interface") {
  TempFile key("key.bin"), box("box.dw");
  REQUIRE(dw_keyfile_generate(key.path.c_str()) == DW_OK);

  dw_create_params params{};
  params.path = box.path.c_str();
  params.keyfile = key.path.c_str();
  params.block_bytes = 512;
  params.num_main = 64;
  params.ratio = 2;
  params.branch = 4;
  params.mode = DW_MODE_SEGMENTED;
  dw_woram* w = nullptr;
  REQUIRE(dw_container_create(&params, &w) == DW_OK);

  std::vector<uint8_t> buf(512, 0x5C), back(512);
  CHECK(dw_write(w, 5, buf.data(), buf.size()) == DW_OK);
  CHECK(dw_read(w, 5, back.data(), back.size()) == DW_OK);
  CHECK(back == buf);
  CHECK(dw_write(w, 64, buf.data(), buf.size()) == DW_ERR_ADDRESS_RANGE);
  CHECK(dw_read(w, 5, back.data(), 100) == DW_ERR_SIZE_MISMATCH);

  dw_geometry g{};
  CHECK(dw_get_geometry(w, &g) == DW_OK);
  CHECK(g.num_main == 64);
  CHECK(g.num_holding == 128);
  CHECK(g.block_bytes == 512);
  CHECK(g.write_counter == 1);
  dw_close(w);

  // Reopen and read back.
  REQUIRE(dw_container_open(box.path.c_str(), key.path.c_str(), &w) == DW_OK);
  CHECK(dw_read(w, 5, back.data(), back.size()) == DW_OK);
  CHECK(back == buf);
  dw_close(w);

  // Wrong key.
  TempFile key2("key2.bin");
  REQUIRE(dw_keyfile_generate(key2.path.c_str()) == DW_OK);
  CHECK(dw_container_open(box.path.c_str(), key2.path.c_str(), &w) ==
        DW_ERR_WRONG_KEY);
}

TEST_CASE("simulated drives, fuzz and bench") {
  dw_woram* w = nullptr;
  REQUIRE(dw_sim_create(DW_SCHEME_DET, DW_MODE_INTERLEAVED, 512, 32, 64, 2, 1,
                        &w) == DW_OK);
  uint64_t failures = 1;
  char err[256] = {0};
  CHECK(dw_fuzz(w, 2000, 42, &failures, err, sizeof(err)) == DW_OK);
  CHECK(failures == 0);

  dw_bench_result bench{};
  CHECK(dw_bench(w, DW_WORKLOAD_SEQ_W, 256, 7, &bench) == DW_OK);
  CHECK(bench.counters.logical_writes == 256);
  CHECK(bench.writes_per_logical_write == doctest::Approx(2.0));
  dw_close(w);

  REQUIRE(dw_sim_create(DW_SCHEME_HIVE, DW_MODE_SEGMENTED, 64, 32, 64, 0, 5,
                        &w) == DW_OK);
  CHECK(dw_bench(w, DW_WORKLOAD_SEQ_W, 200, 7, &bench) == DW_OK);
  CHECK(bench.writes_per_logical_write == doctest::Approx(3.0));
  uint64_t cur = 0, mx = 0;
  CHECK(dw_hive_stash(w, &cur, &mx) == DW_OK);
  CHECK(mx >= cur);
  dw_close(w);

  REQUIRE(dw_sim_create(DW_SCHEME_TOY, DW_MODE_SEGMENTED, 64, 16, 0, 0, 0,
                        &w) == DW_OK);
  CHECK(dw_fuzz(w, 500, 3, &failures, nullptr, 0) == DW_OK);
  dw_close(w);
}

TEST_CASE("write schedule is address independent: seqw and randw ratios") {
  dw_bench_result seq{}, rnd{};
  for (auto wl : {DW_WORKLOAD_SEQ_W, DW_WORKLOAD_RAND_W}) {
    dw_woram* w = nullptr;
    REQUIRE(dw_sim_create(DW_SCHEME_DET, DW_MODE_SEGMENTED, 512, 64, 128, 4, 1,
                          &w) == DW_OK);
    dw_bench_result* out = wl == DW_WORKLOAD_SEQ_W ? &seq : &rnd;
    REQUIRE(dw_bench(w, wl, 1000, 9, out) == DW_OK);
    dw_close(w);
  }
  CHECK(seq.counters.physical_writes == rnd.counters.physical_writes);
  CHECK(seq.writes_per_logical_write ==
        doctest::Approx(rnd.writes_per_logical_write));
}

TEST_CASE("tracing and verification through the C interface") {
  TempFile t1("a.trace"), t2("b.trace");
  for (int run = 0; run < 2; ++run) {
    dw_woram* w = nullptr;
    REQUIRE(dw_sim_create(DW_SCHEME_DET, DW_MODE_SEGMENTED, 512, 32, 64, 4,
                          run, &w) == DW_OK);
    REQUIRE(dw_trace_enable(w, 1) == DW_OK);
    std::vector<uint8_t> buf(512, uint8_t(run));
    for (int k = 0; k < 50; ++k)
      REQUIRE(dw_write(w, (k * 7 + run * 3) % 32, buf.data(), buf.size()) ==
              DW_OK);
    REQUIRE(dw_trace_save(w, (run ? t2 : t1).path.c_str()) == DW_OK);
    dw_close(w);
  }
  const char* paths[2] = {t1.path.c_str(), t2.path.c_str()};
  int pass = 0;
  char report[512] = {0};
  REQUIRE(dw_verify_determinism(paths, 2, &pass, report, sizeof(report)) ==
          DW_OK);
  CHECK(pass == 1);
  CHECK(std::strlen(report) > 0);

  double measured = 0;
  REQUIRE(dw_verify_write_budget(t1.path.c_str(), 50, 5, 2, &measured, &pass,
                                 report, sizeof(report)) == DW_OK);
  CHECK(pass == 1);
  CHECK(measured > 1.0);
}

TEST_CASE("feasibility and the attack demonstrator") {
  int ok = 0;
  REQUIRE(dw_feasible("100000000000000000000000000000000000", 2, 32768, &ok) ==
          DW_OK);
  CHECK(ok == 1);
  REQUIRE(dw_feasible("1024", 2, 64, &ok) == DW_OK);
  CHECK(ok == 0);
  char buf[64];
  REQUIRE(dw_feasible_boundary(2, 32768, buf, sizeof(buf)) == DW_OK);
  CHECK(std::string(buf) == "664613997892457936451903530140172288");

  dw_attack_result ar{};
  char report[1024];
  REQUIRE(dw_attack_datalair(64, 3, 5000, 99, &ar, report, sizeof(report)) ==
          DW_OK);
  CHECK(ar.bound == doctest::Approx(58.0 / 16384.0));
  CHECK(ar.trials_per_sequence == 5000);
  CHECK(std::strstr(report, "advantage") != nullptr);
}

TEST_CASE("device images through the C interface") {
  dw_woram* w = nullptr;
  REQUIRE(dw_sim_create(DW_SCHEME_DET, DW_MODE_SEGMENTED, 512, 16, 32, 4, 0,
                        &w) == DW_OK);
  dw_geometry g{};
  REQUIRE(dw_get_geometry(w, &g) == DW_OK);
  std::vector<uint8_t> img(g.total_blocks * g.block_bytes);
  CHECK(dw_device_image(w, img.data(), img.size()) == DW_OK);
  CHECK(dw_device_image(w, img.data(), img.size() - 1) ==
        DW_ERR_SIZE_MISMATCH);
  dw_close(w);
}
