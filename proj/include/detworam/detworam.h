/* detworam.h - public C interface of the detworam storage library.
 *
 * The library implements deterministic write-only oblivious block storage
 * (DetWoORAM) in segmented and interleaved layouts, a toy variant, a
 * HiVE-WoORAM baseline, a DataLair write-policy attack demonstrator, and a
 * trace-based obliviousness verifier.
 *
 * All functions return dw_status; DW_OK is 0.  Handles are opaque and must
 * be released with dw_close().  A handle may be used from several threads
 * for reads, but at most one thread may write at a time and writes must not
 * overlap reads (single-writer contract).
 */
#ifndef DETWORAM_H
#define DETWORAM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined _WIN32
#define DW_API __declspec(dllexport)
#else
#define DW_API __attribute__((visibility("default")))
#endif

typedef enum dw_status {
  DW_OK = 0,
  DW_ERR_INVALID_ARG = 1,     /* bad parameter / unsupported combination */
  DW_ERR_INDEX_RANGE = 2,     /* physical block index out of range */
  DW_ERR_ADDRESS_RANGE = 3,   /* logical address out of range */
  DW_ERR_SIZE_MISMATCH = 4,   /* buffer length != block size */
  DW_ERR_IO = 5,              /* backing file I/O failure */
  DW_ERR_BAD_MAGIC = 6,       /* not a container / version mismatch */
  DW_ERR_WRONG_KEY = 7,       /* state blob does not decrypt */
  DW_ERR_INFEASIBLE = 8,      /* packing/interleaving constraint violated */
  DW_ERR_OVERFLOW = 9,        /* packed payload exceeds capacity */
  DW_ERR_PAYLOAD_TOO_LARGE = 10,
  DW_ERR_MALFORMED = 11,      /* corrupt ciphertext, padding or pointer */
  DW_ERR_INVALID_GEOMETRY = 12, /* trie write count not constant, etc. */
  DW_ERR_STATE = 13,          /* operation not valid for handle state */
  DW_ERR_NOMEM = 14,
  DW_ERR_INTERNAL = 15
} dw_status;

/* Physical placement of the WoORAM regions inside the container. */
typedef enum dw_mode {
  DW_MODE_SEGMENTED = 0,  /* four regions, packed trie blocks */
  DW_MODE_INTERLEAVED = 1 /* M=2N, 2 consecutive physical writes per write */
} dw_mode;

typedef enum dw_scheme {
  DW_SCHEME_DET = 0, /* DetWoORAM (mode chooses layout) */
  DW_SCHEME_TOY = 1, /* toy deterministic WoORAM, M=N, in-memory map */
  DW_SCHEME_HIVE = 2 /* HiVE-WoORAM baseline, k=3 */
} dw_scheme;

typedef enum dw_workload {
  DW_WORKLOAD_SEQ_W = 0,
  DW_WORKLOAD_SEQ_R = 1,
  DW_WORKLOAD_RAND_W = 2,
  DW_WORKLOAD_RAND_R = 3
} dw_workload;

typedef struct dw_woram dw_woram; /* opaque handle */

typedef struct dw_geometry {
  uint32_t block_bytes;        /* logical block size */
  uint32_t device_block_bytes; /* physical block size (HiVE slots differ) */
  uint64_t num_main;     /* N */
  uint64_t num_holding;  /* M */
  uint32_t branch;       /* trie branching factor b */
  uint32_t mode;         /* dw_mode (DetWoORAM) */
  uint32_t scheme;       /* dw_scheme */
  uint64_t trie_nodes;   /* N_p */
  uint64_t trie_holding; /* M_p */
  uint32_t path_writes;  /* trie nodes written per logical write (h) */
  uint64_t total_blocks; /* container size in blocks, superblock included */
  uint64_t write_counter;    /* i */
  uint64_t posmap_counter;   /* i_p */
} dw_geometry;

typedef struct dw_counters {
  uint64_t logical_reads;
  uint64_t logical_writes;
  uint64_t physical_reads;       /* payload regions */
  uint64_t physical_writes;      /* payload regions */
  uint64_t superblock_writes;    /* state persistence, outside the budget */
} dw_counters;

typedef struct dw_bench_result {
  dw_counters counters;
  double wall_seconds;
  double writes_per_logical_write; /* payload only */
  double reads_per_logical_read;
} dw_bench_result;

typedef struct dw_attack_result {
  uint64_t trials_per_sequence;
  uint64_t aborted_trials;
  double p0, p1;           /* empirical Pr[E] under seq0 / seq1 */
  double advantage;        /* p0 - p1 */
  double bound;            /* (N-2k)/(4N^2) */
  double p0_lo, p0_hi;     /* Wilson 99% interval */
  double p1_lo, p1_hi;
  int distinguishes;       /* 1 if advantage established above the bound */
} dw_attack_result;

/* ---- keys ---------------------------------------------------------- */

/* Writes a fresh random 32-byte key file. */
DW_API dw_status dw_keyfile_generate(const char *path);

/* ---- container / simulation lifecycle ------------------------------ */

typedef struct dw_create_params {
  const char *path;     /* container file; NULL for an in-memory store */
  const char *keyfile;  /* raw 32-byte key file; required */
  uint32_t block_bytes; /* default 4096 when 0 */
  uint64_t num_main;    /* N, required */
  uint32_t ratio;       /* M = ratio*N; default 3; interleaved requires 2 */
  uint32_t branch;      /* trie branching factor; default 64 */
  uint32_t mode;        /* dw_mode */
} dw_create_params;

DW_API dw_status dw_container_create(const dw_create_params *params,
                                     dw_woram **out);
DW_API dw_status dw_container_open(const char *path, const char *keyfile,
                                   dw_woram **out);

/* In-memory instance of any scheme, for benchmarks and verification runs.
 * For DW_SCHEME_TOY, num_holding is ignored (M=N).  For DW_SCHEME_HIVE,
 * branch is ignored and seed drives the write randomness. */
DW_API dw_status dw_sim_create(dw_scheme scheme, dw_mode mode,
                               uint32_t block_bytes, uint64_t num_main,
                               uint64_t num_holding, uint32_t branch,
                               uint64_t seed, dw_woram **out);

DW_API void dw_close(dw_woram *w);

/* ---- block access --------------------------------------------------- */

DW_API dw_status dw_read(dw_woram *w, uint64_t addr, uint8_t *buf, size_t len);
DW_API dw_status dw_write(dw_woram *w, uint64_t addr, const uint8_t *buf,
                          size_t len);

/* Rewrites the encrypted client state at its fixed superblock location. */
DW_API dw_status dw_persist(dw_woram *w);

/* When enabled, state is persisted only on dw_close instead of after every
 * logical write. */
DW_API dw_status dw_lazy_state(dw_woram *w, int enable);

DW_API dw_status dw_get_geometry(dw_woram *w, dw_geometry *out);
DW_API dw_status dw_get_counters(dw_woram *w, dw_counters *out);

/* HiVE only: current and maximum observed stash occupancy. */
DW_API dw_status dw_hive_stash(dw_woram *w, uint64_t *current, uint64_t *max);

/* ---- tracing -------------------------------------------------------- */

DW_API dw_status dw_trace_enable(dw_woram *w, int on);
DW_API dw_status dw_trace_clear(dw_woram *w);
/* One `#` metadata line, then one `seq,R|W,index` line per event. */
DW_API dw_status dw_trace_save(dw_woram *w, const char *path);

/* Full device image (all physical blocks); len must equal
 * total_blocks*block_bytes. */
DW_API dw_status dw_device_image(dw_woram *w, uint8_t *buf, size_t len);

/* ---- workloads ------------------------------------------------------ */

/* Runs a seeded random read/write workload against a reference map; fails
 * on the first mismatching read.  errbuf (optional) receives a description
 * of the first failure. */
DW_API dw_status dw_fuzz(dw_woram *w, uint64_t ops, uint64_t seed,
                         uint64_t *failures, char *errbuf, size_t errlen);

DW_API dw_status dw_bench(dw_woram *w, dw_workload workload, uint64_t ops,
                          uint64_t seed, dw_bench_result *out);

/* ---- trie packing feasibility --------------------------------------- */

/* Evaluates the half-block packing inequality for M=2N.  n_decimal is the
 * number of logical blocks as a decimal string (values beyond 64 bits are
 * supported). */
DW_API dw_status dw_feasible(const char *n_decimal, uint32_t branch,
                             uint64_t block_bits, int *out);

/* Binary-searches the largest feasible N; writes it to buf as decimal. */
DW_API dw_status dw_feasible_boundary(uint32_t branch, uint64_t block_bits,
                                      char *buf, size_t buflen);

/* ---- verifier ------------------------------------------------------- */

/* All verifier entry points write a line-oriented report into `report`
 * (truncated if needed) and set *pass. */

DW_API dw_status dw_verify_determinism(const char *const *trace_paths,
                                       size_t count, int *pass, char *report,
                                       size_t reportlen);

DW_API dw_status dw_verify_write_budget(const char *trace_path,
                                        uint64_t logical_writes,
                                        uint32_t bound_num, uint32_t bound_den,
                                        double *measured, int *pass,
                                        char *report, size_t reportlen);

DW_API dw_status dw_verify_read_budget(const char *trace_path,
                                       uint64_t logical_reads, double bound,
                                       double *measured, int *pass,
                                       char *report, size_t reportlen);

/* Compares changed-block index sets between consecutive device snapshots
 * across two runs.  images_a/images_b each hold `count` snapshots of
 * image_len bytes; block_bytes is the device block size (image_len /
 * total_blocks). */
DW_API dw_status dw_verify_snapshots(const uint8_t *const *images_a,
                                     const uint8_t *const *images_b,
                                     size_t count, size_t image_len,
                                     uint32_t block_bytes, int *pass,
                                     char *report, size_t reportlen);

/* ---- attack demonstrator -------------------------------------------- */

DW_API dw_status dw_attack_datalair(uint64_t n, uint32_t k, uint64_t trials,
                                    uint64_t seed, dw_attack_result *out,
                                    char *report, size_t reportlen);

/* ---- misc ------------------------------------------------------------ */

DW_API const char *dw_status_str(dw_status s);
DW_API const char *dw_version(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DETWORAM_H */
