#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace chemcomm::num {

// Deterministic stream RNG: xoshiro256++ with state derived from
// (master_seed, stream_id) through SplitMix64.  The raw 64-bit output is a
// pure integer function of the two seeds, so streams are bit-identical
// across platforms and runs.  Distinct stream ids give independent streams.
//
// A Prng instance is not safe for concurrent use; hand each worker its own
// stream instead.
class Prng {
 public:
  static constexpr std::string_view kAlgorithm = "xoshiro256++ (SplitMix64 seeded)";

  Prng(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t next_u64();

  // Uniform draw in [0, 1) with 53 random mantissa bits.
  double next_uniform();

  // N(mean, std^2) via Box-Muller; std == 0 returns mean exactly.
  // Throws std::invalid_argument for negative std.
  double next_gaussian(double mean, double std);

  // Unbiased integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t next_below(std::uint64_t bound);

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t s_[4];
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  double spare_gaussian_ = 0.0;
  bool has_spare_ = false;
};

// Reserved stream ids.  Dataset records use ids 0..n-1, so bookkeeping
// streams live far above any realistic record count.
inline constexpr std::uint64_t kStreamSplit = 1'000'000'000ull;
inline constexpr std::uint64_t kStreamWeightInit = 1'000'000'001ull;
inline constexpr std::uint64_t kStreamShuffleBase = 1'000'100'000ull;  // + epoch index

}  // namespace chemcomm::num
