#pragma once

#include <cstdint>

namespace tlp {

// Counter-based random stream. The k-th raw output is a pure function of
// (master_seed, stream_id, k), so streams can be created and consumed in any
// order — across threads or processes — and still reproduce bit for bit.
// Distinct (master_seed, stream_id) pairs give statistically independent
// streams (the key is derived by two rounds of 64-bit avalanche mixing).
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t next_u64();

  // Uniform strictly inside (0,1), 52 random bits.
  double next_uniform();

  // Exp(1), strictly positive.
  double next_exponential();

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double next_normal();

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tlp
