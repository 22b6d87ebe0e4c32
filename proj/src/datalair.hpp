#pragma once

// DataLair write policy and the distinguishing adversary.  The scheme
// tracks free blocks: every write draws a free set S0 (k uniform among the
// N free slots) and a random set S1 (k uniform among all 2N, resampled
// until disjoint from S0 and itself), then for each of k picks flips a coin
// between them, placing a stash item only on S0 picks.  The bias towards
// free blocks is the leak the adversary measures.

#include <random>

#include "common.hpp"

namespace detworam {

class DataLairOram {
 public:
  DataLairOram(uint64_t n, uint32_t k, std::mt19937_64& rng);

  // Footnote initialization: w_0..w_{N-1}, then `extra` repeats of w_0.
  // True iff the stash drained and exactly N slots are occupied.
  bool init(uint32_t extra);

  // One ORAMWrite of logical address `addr`; returns the ordered set U of
  // touched slots (|U| = k, all distinct).
  std::vector<uint64_t> write(uint64_t addr);

  uint64_t free_count() const { return free_list_.size(); }
  uint64_t occupied_count() const { return 2 * n_ - free_list_.size(); }
  uint64_t stash_size() const { return stash_.size(); }
  bool slot_free(uint64_t u) const { return free_pos_[u] != kNone; }

 private:
  static constexpr uint64_t kNone = ~uint64_t(0);

  void mark_occupied(uint64_t slot);
  void mark_free(uint64_t slot);

  uint64_t n_;
  uint32_t k_;
  std::mt19937_64& rng_;
  std::vector<uint64_t> pos_;       // address -> slot
  std::vector<uint64_t> slot_addr_; // slot -> address
  std::vector<uint64_t> free_list_;
  std::vector<uint64_t> free_pos_;  // slot -> index in free_list_
  std::vector<uint64_t> stash_;     // pending addresses
};

// Adversary of the three-write experiment: outputs 0 when
// E = (u_{1,1} not in U2) and (u_{1,1} in U3), otherwise a fair coin.
int datalair_adversary(const std::vector<uint64_t>& u1,
                       const std::vector<uint64_t>& u2,
                       const std::vector<uint64_t>& u3, std::mt19937_64& rng);

struct AttackResult {
  uint64_t trials = 0;          // per sequence
  uint64_t aborted = 0;         // init did not reach N occupied slots
  uint64_t hits0 = 0, hits1 = 0;
  double p0 = 0, p1 = 0;        // empirical Pr[E]
  double advantage = 0;
  double bound = 0;             // (N-2k)/(4N^2)
  double p0_lo = 0, p0_hi = 0;  // Wilson 99% intervals
  double p1_lo = 0, p1_hi = 0;
  bool distinguishes = false;

  std::string report(uint64_t n, uint32_t k, uint64_t seed) const;
};

// Monte-Carlo estimate of the adversary's event probabilities over both
// sequences; seeded and reproducible.
AttackResult run_datalair_attack(uint64_t n, uint32_t k, uint64_t trials,
                                 uint64_t seed, uint32_t init_extra = 64);

// Wilson score interval for `hits` successes in `trials` at z.
std::pair<double, double> wilson_interval(uint64_t hits, uint64_t trials,
                                          double z);

}  // namespace detworam
