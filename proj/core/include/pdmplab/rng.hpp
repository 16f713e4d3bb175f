#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pdmplab {

// SplitMix64 finalizer: bijective 64-bit mix.
std::uint64_t mix64(std::uint64_t z);

// Counter-based random stream. Output k of stream (base_seed, stream_id) is
// mix64 applied to an affine counter whose start is derived from both seeds,
// so identical (base_seed, stream_id) reproduce the exact same draws and
// distinct stream ids give well separated substreams. Replicas of a Monte
// Carlo experiment each own one stream and can run in parallel.
class RngStream {
 public:
  RngStream(std::uint64_t base_seed, std::uint64_t stream_id);

  std::uint64_t next_u64();
  double uniform01();                       // [0, 1), 53-bit resolution
  double uniform(double lo, double hi);
  double exponential(double rate);
  double normal();                          // standard normal (polar method)
  std::uint64_t uniform_below(std::uint64_t n);   // unbiased on [0, n)
  std::uint64_t binomial_half(std::uint64_t n);   // Binomial(n, 1/2)
  // Index drawn proportionally to the (unnormalized, nonnegative) weights.
  std::size_t pick_weighted(const std::vector<double>& weights);

  std::uint64_t base_seed() const { return base_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t base_seed_;
  std::uint64_t stream_id_;
  std::uint64_t counter_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pdmplab
