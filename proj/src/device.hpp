#pragma once

// Fixed-block storage devices with an attached physical-access trace
// recorder.  Every read/write moves exactly one block; out-of-range access
// is an error, never a silent wrap.
//
// Thread contract: concurrent readers are safe, at most one writer at a
// time, and a writer excludes readers of the same block.  The trace
// recorder serializes appends internally.

#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "common.hpp"

namespace detworam {

enum class OpKind : uint8_t { Read, Write };

struct TraceEvent {
  uint64_t seq;
  OpKind kind;
  uint64_t index;
};

struct TraceMeta {
  std::string scheme;
  uint32_t block_bytes = 0;
  uint64_t num_blocks = 0;
  std::string params;  // free-form "k=v k=v" extras

  std::string header_line() const;
  static TraceMeta parse_header(const std::string& line);
};

// In-memory event recorder with an optional line-oriented streaming sink.
class Trace {
 public:
  Trace() = default;
  explicit Trace(TraceMeta meta) : meta_(std::move(meta)) {}
  Trace(Trace&& other) noexcept { *this = std::move(other); }
  Trace& operator=(Trace&& other) noexcept {
    meta_ = std::move(other.meta_);
    events_ = std::move(other.events_);
    next_seq_ = other.next_seq_;
    reads_ = other.reads_;
    writes_ = other.writes_;
    sink_ = other.sink_;
    sink_header_done_ = other.sink_header_done_;
    return *this;
  }

  void append(OpKind kind, uint64_t index);
  void clear();

  const TraceMeta& meta() const { return meta_; }
  TraceMeta& meta() { return meta_; }
  const std::vector<TraceEvent>& events() const { return events_; }
  uint64_t read_count() const { return reads_; }
  uint64_t write_count() const { return writes_; }

  // When set, events are written to the sink as they happen (header first)
  // instead of being kept in memory.
  void set_sink(std::ostream* sink);

  void save(std::ostream& os) const;
  void save(const std::string& path) const;
  static Trace load(std::istream& is);
  static Trace load(const std::string& path);

  // The WOnly filter: the WRITE subsequence, order preserved.
  static Trace filter_writes(const Trace& t);

 private:
  TraceMeta meta_;
  std::vector<TraceEvent> events_;
  uint64_t next_seq_ = 0;
  uint64_t reads_ = 0;
  uint64_t writes_ = 0;
  std::ostream* sink_ = nullptr;
  bool sink_header_done_ = false;
  std::mutex mu_;
};

class BlockStore {
 public:
  BlockStore(uint32_t block_bytes, uint64_t num_blocks);
  virtual ~BlockStore() = default;

  uint32_t block_bytes() const { return block_bytes_; }
  uint64_t num_blocks() const { return num_blocks_; }

  Bytes read_block(uint64_t index);
  void read_block(uint64_t index, std::span<uint8_t> out);
  void write_block(uint64_t index, ByteView data);

  // Tracing is opt-in; off by default so benchmarks are undistorted.
  void attach_trace(Trace* t) { trace_ = t; }
  Trace* trace() const { return trace_; }
  void set_tracing(bool on) { tracing_ = on; }
  bool tracing() const { return tracing_; }

  // Full device image, for the snapshot adversary checks.
  virtual Bytes image();

  virtual void flush() {}

 protected:
  virtual void do_read(uint64_t index, std::span<uint8_t> out) = 0;
  virtual void do_write(uint64_t index, ByteView data) = 0;

 private:
  void check_index(uint64_t index) const;
  uint32_t block_bytes_;
  uint64_t num_blocks_;
  Trace* trace_ = nullptr;
  bool tracing_ = false;
};

// Dense zero-initialized in-memory store.
class MemStore : public BlockStore {
 public:
  MemStore(uint32_t block_bytes, uint64_t num_blocks);
  Bytes image() override;

 protected:
  void do_read(uint64_t index, std::span<uint8_t> out) override;
  void do_write(uint64_t index, ByteView data) override;

 private:
  Bytes buf_;
};

// Sparse in-memory store; untouched blocks read as zeros, or as the output
// of a deterministic fill function when one is registered (used to make
// large freshly-initialized regions free).
class SparseMemStore : public BlockStore {
 public:
  using FillFn = std::function<void(uint64_t index, std::span<uint8_t> out)>;

  SparseMemStore(uint32_t block_bytes, uint64_t num_blocks);
  void set_fill(uint64_t first, uint64_t count, FillFn fn);
  Bytes image() override;
  uint64_t touched_blocks() const { return blocks_.size(); }

 protected:
  void do_read(uint64_t index, std::span<uint8_t> out) override;
  void do_write(uint64_t index, ByteView data) override;

 private:
  struct Fill {
    uint64_t first, count;
    FillFn fn;
  };
  std::unordered_map<uint64_t, Bytes> blocks_;
  std::optional<Fill> fill_;
};

// Positioned I/O into one container file.  The file is created (or must
// already exist) with exactly num_blocks blocks from base_offset on.
class FileStore : public BlockStore {
 public:
  static std::unique_ptr<FileStore> create(const std::string& path,
                                           uint32_t block_bytes,
                                           uint64_t num_blocks);
  static std::unique_ptr<FileStore> open(const std::string& path,
                                         uint32_t block_bytes,
                                         uint64_t num_blocks);
  // Opens just the first block so the superblock can be read before the
  // geometry is known.
  static Bytes read_prefix(const std::string& path, uint32_t nbytes);

  ~FileStore() override;
  void flush() override;
  Bytes image() override;

 protected:
  void do_read(uint64_t index, std::span<uint8_t> out) override;
  void do_write(uint64_t index, ByteView data) override;

 private:
  FileStore(int fd, uint32_t block_bytes, uint64_t num_blocks);
  int fd_;
};

}  // namespace detworam
