#pragma once

// The pointer-based deterministic WoORAM write/read engine.  One instance
// drives the data WoORAM; a second instance over trie-node units drives the
// position WoORAM.  Placement, encryption and epoch derivation live behind
// WoramBackend; the position map is passed per call so the trie can rebind
// the subroutines during its own path rewrites.
//
// Single logical writer.  Reads may run concurrently with other reads but
// not with a write.

#include <functional>

#include "posmap.hpp"
#include "schedule.hpp"

namespace detworam {

class WoramBackend {
 public:
  virtual ~WoramBackend() = default;
  // Plaintext views of the two areas.  read_main must reflect the engine's
  // effective main-area contents (an in-flight half-refresh included).
  virtual Bytes read_main(uint64_t a) = 0;
  virtual void write_main(uint64_t a, ByteView d) = 0;
  virtual Bytes read_holding(uint64_t j) = 0;
  virtual void write_holding(uint64_t j, ByteView d) = 0;
};

class DetEngine;

// Refresh step policy: the segmented layout refreshes whole main blocks on
// the floor(i*N/M) schedule; the interleaved layout refreshes half a block
// on every write.
class RefreshPolicy {
 public:
  virtual ~RefreshPolicy() = default;
  virtual void refresh(DetEngine& eng, uint64_t i, PositionMap& pm) = 0;
};

class RangeRefreshPolicy : public RefreshPolicy {
 public:
  void refresh(DetEngine& eng, uint64_t i, PositionMap& pm) override;
};

class DetEngine {
 public:
  // counter aliases the externally persisted write counter.
  DetEngine(const Geometry& geo, WoramBackend& backend, uint64_t& counter,
            RefreshPolicy& policy)
      : geo_(geo), backend_(backend), counter_(counter), policy_(policy) {}

  const Geometry& geometry() const { return geo_; }
  uint64_t counter() const { return counter_; }
  WoramBackend& backend() { return backend_; }

  Bytes read(uint64_t a, PositionMap& pm);
  void write(uint64_t a, ByteView d, PositionMap& pm);
  // Padding write: appends one unit of encrypted zeros to the holding area
  // and runs the refresh schedule, with no position map update.
  void write_dummy(PositionMap& pm);

  // Refreshes one main address in place from its freshest copy.
  void refresh_main(uint64_t a, PositionMap& pm) {
    backend_.write_main(a, read(a, pm));
  }

  // Test hook: drops all refresh work so correctness tests can prove the
  // schedule is load-bearing.
  void debug_skip_refreshes(bool skip) { debug_skip_refreshes_ = skip; }

 private:
  void finish_write(PositionMap& pm);
  Geometry geo_;
  WoramBackend& backend_;
  uint64_t& counter_;
  RefreshPolicy& policy_;
  bool debug_skip_refreshes_ = false;
};

}  // namespace detworam
