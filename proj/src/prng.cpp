#include "chemcomm/prng.hpp"

#include <cmath>
#include <numbers>

namespace chemcomm::num {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

struct SplitMix64 {
  std::uint64_t x;
  std::uint64_t next() {
    std::uint64_t z = (x += kGolden);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
};

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Prng::Prng(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id) {
  // Fold the stream id into the SplitMix64 start point, then expand into the
  // xoshiro state.  Two scramble rounds keep nearby (seed, stream) pairs from
  // producing correlated states.
  SplitMix64 mix{master_seed};
  std::uint64_t a = mix.next();
  SplitMix64 expand{a ^ (kGolden * (stream_id + 1)) ^ rotl(stream_id, 32)};
  for (auto& word : s_) word = expand.next();
}

std::uint64_t Prng::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Prng::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Prng::next_gaussian(double mean, double std) {
  if (std < 0.0) throw std::invalid_argument("next_gaussian: negative std");
  if (has_spare_) {
    has_spare_ = false;
    return mean + std * spare_gaussian_;
  }
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - next_uniform();
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_gaussian_ = r * std::sin(theta);
  has_spare_ = true;
  return mean + std * (r * std::cos(theta));
}

std::uint64_t Prng::next_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("next_below: bound must be > 0");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t draw;
  do {
    draw = next_u64();
  } while (draw >= limit);
  return draw % bound;
}

}  // namespace chemcomm::num
