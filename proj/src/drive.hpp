#pragma once

// Uniform runtime face of every scheme: logical block reads/writes over a
// traced device.  The CLI, benches and the verifier drive everything
// through this.

#include "device.hpp"

namespace detworam {

class OramDrive {
 public:
  virtual ~OramDrive() = default;

  virtual uint32_t block_bytes() const = 0;
  virtual uint64_t logical_blocks() const = 0;
  virtual std::string scheme_name() const = 0;
  virtual BlockStore& device() = 0;

  virtual Bytes read(uint64_t a) = 0;
  virtual void write(uint64_t a, ByteView d) = 0;
  virtual void persist() {}
  virtual void close() {}

  // First payload block; physical indices below this hold client state and
  // stay outside the write-budget accounting.
  virtual uint64_t payload_base() const { return 0; }

  TraceMeta trace_meta() const;
};

}  // namespace detworam
