#include "datalair.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace detworam {

DataLairOram::DataLairOram(uint64_t n, uint32_t k, std::mt19937_64& rng)
    : n_(n),
      k_(k),
      rng_(rng),
      pos_(n, kNone),
      slot_addr_(2 * n, kNone),
      free_pos_(2 * n) {
  if (k < 3 || n <= 2 * k) fail(DW_ERR_INVALID_ARG, "need N > 2k and k >= 3");
  // All 2N physical slots start free.
  free_list_.resize(2 * n);
  for (uint64_t u = 0; u < 2 * n; ++u) {
    free_list_[u] = u;
    free_pos_[u] = u;
  }
}

void DataLairOram::mark_occupied(uint64_t slot) {
  uint64_t at = free_pos_[slot];
  if (at == kNone) fail(DW_ERR_INTERNAL, "slot already occupied");
  uint64_t last = free_list_.back();
  free_list_[at] = last;
  free_pos_[last] = at;
  free_list_.pop_back();
  free_pos_[slot] = kNone;
}

void DataLairOram::mark_free(uint64_t slot) {
  if (free_pos_[slot] != kNone) fail(DW_ERR_INTERNAL, "slot already free");
  free_pos_[slot] = free_list_.size();
  free_list_.push_back(slot);
}

std::vector<uint64_t> DataLairOram::write(uint64_t addr) {
  if (addr >= n_) fail(DW_ERR_ADDRESS_RANGE, "address out of range");
  stash_.push_back(addr);

  // S0: k distinct uniform free slots.
  std::vector<uint64_t> s0;
  s0.reserve(k_);
  while (s0.size() < k_) {
    uint64_t u = free_list_[std::uniform_int_distribution<uint64_t>(
        0, free_list_.size() - 1)(rng_)];
    if (std::find(s0.begin(), s0.end(), u) == s0.end()) s0.push_back(u);
  }
  // S1: k distinct uniform slots, resampled until disjoint from S0.
  std::vector<uint64_t> s1;
  s1.reserve(k_);
  while (s1.size() < k_) {
    uint64_t u = std::uniform_int_distribution<uint64_t>(0, 2 * n_ - 1)(rng_);
    if (std::find(s0.begin(), s0.end(), u) != s0.end()) continue;
    if (std::find(s1.begin(), s1.end(), u) != s1.end()) continue;
    s1.push_back(u);
  }

  std::vector<uint64_t> touched;
  touched.reserve(k_);
  size_t at0 = 0, at1 = 0;
  for (uint32_t step = 0; step < k_; ++step) {
    int b = int(rng_() & 1);
    // Both sets were sampled in uniform order, so consuming the next
    // element fetches-and-removes a uniform one; k draws can never run a
    // k-element set dry.
    uint64_t u = b == 0 ? s0[at0++] : s1[at1++];
    if (b == 0 && !stash_.empty()) {
      uint64_t alpha = stash_.front();
      stash_.erase(stash_.begin());
      uint64_t old = pos_[alpha];
      mark_occupied(u);
      if (old != kNone) {
        mark_free(old);
        slot_addr_[old] = kNone;
      }
      pos_[alpha] = u;
      slot_addr_[u] = alpha;
    }
    // Otherwise the slot is only re-encrypted; no state change.
    touched.push_back(u);
  }
  return touched;
}

bool DataLairOram::init(uint32_t extra) {
  for (uint64_t a = 0; a < n_; ++a) write(a);
  for (uint32_t r = 0; r < extra; ++r) write(0);
  // Any leftover stash entries are rewrites of address 0; occupancy is the
  // property the experiment depends on.
  return occupied_count() == n_;
}

int datalair_adversary(const std::vector<uint64_t>& u1,
                       const std::vector<uint64_t>& u2,
                       const std::vector<uint64_t>& u3, std::mt19937_64& rng) {
  uint64_t probe = u1.at(0);
  bool x = std::find(u2.begin(), u2.end(), probe) == u2.end();
  bool y = std::find(u3.begin(), u3.end(), probe) != u3.end();
  if (x && y) return 0;
  return int(rng() & 1);
}

std::pair<double, double> wilson_interval(uint64_t hits, uint64_t trials,
                                          double z) {
  if (trials == 0) return {0.0, 1.0};
  double n = double(trials), p = double(hits) / n, z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2 * n)) / denom;
  double margin = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  return {center - margin, center + margin};
}

AttackResult run_datalair_attack(uint64_t n, uint32_t k, uint64_t trials,
                                 uint64_t seed, uint32_t init_extra) {
  AttackResult r;
  r.trials = trials;
  r.bound = double(n - 2 * k) / (4.0 * double(n) * double(n));

  uint64_t done[2] = {0, 0};
  for (int seq = 0; seq < 2; ++seq) {
    uint64_t hits = 0;
    for (uint64_t t = 0; t < trials; ++t) {
      std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + t * 2 + seq);
      DataLairOram oram(n, k, rng);
      if (!oram.init(init_extra)) {
        ++r.aborted;
        continue;
      }
      ++done[seq];
      auto u1 = oram.write(0);
      auto u2 = oram.write(seq == 0 ? 0 : 1);
      auto u3 = oram.write(2);
      uint64_t probe = u1[0];
      bool x = std::find(u2.begin(), u2.end(), probe) == u2.end();
      bool y = std::find(u3.begin(), u3.end(), probe) != u3.end();
      if (x && y) ++hits;
    }
    if (seq == 0)
      r.hits0 = hits;
    else
      r.hits1 = hits;
  }

  constexpr double kZ99 = 2.5758293035489004;
  r.p0 = done[0] ? double(r.hits0) / double(done[0]) : 0;
  r.p1 = done[1] ? double(r.hits1) / double(done[1]) : 0;
  r.advantage = r.p0 - r.p1;
  std::tie(r.p0_lo, r.p0_hi) = wilson_interval(r.hits0, done[0], kZ99);
  std::tie(r.p1_lo, r.p1_hi) = wilson_interval(r.hits1, done[1], kZ99);
  // Established when the intervals separate and the point estimate clears
  // the analytic bound net of the interval widths.
  double ci_width = (r.p0_hi - r.p0_lo) / 2 + (r.p1_hi - r.p1_lo) / 2;
  r.distinguishes =
      r.p0_lo > r.p1_hi && r.advantage >= r.bound - ci_width && r.advantage > 0;
  return r;
}

std::string AttackResult::report(uint64_t n, uint32_t k, uint64_t seed) const {
  std::ostringstream os;
  os << "datalair attack: n=" << n << " k=" << k << " trials=" << trials
     << " seed=" << seed << " aborted=" << aborted << '\n';
  os << "  p0 = " << p0 << "  wilson99 [" << p0_lo << ", " << p0_hi << "]\n";
  os << "  p1 = " << p1 << "  wilson99 [" << p1_lo << ", " << p1_hi << "]\n";
  os << "  advantage p0-p1 = " << advantage << '\n';
  os << "  analytic bound (N-2k)/(4N^2) = " << bound << '\n';
  os << "  distinguishes: " << (distinguishes ? "yes" : "no") << '\n';
  return os.str();
}

}  // namespace detworam
