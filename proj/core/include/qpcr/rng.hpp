#pragma once

// Counter-keyed random streams. Every random quantity in the toolkit is drawn
// from a stream addressed by (seed, domain, replicate, lane, cycle); streams
// with different addresses are statistically independent and no stream
// depends on how many draws another one consumed.

#include <cstdint>
#include <limits>

namespace qpcr {

// Disjoint address spaces so that, e.g., a convergence reference sample can
// never share draws with the trajectories it is compared against.
enum class StreamDomain : std::uint64_t {
  kNonlinear = 1,
  kLinear = 2,
  kCoupled = 3,
  kWSample = 4,
  kWReference = 5,
  kMle = 6,
};

struct StreamKey {
  std::uint64_t seed = 0;
  StreamDomain domain = StreamDomain::kNonlinear;
  std::uint64_t replicate = 0;
  std::uint64_t lane = 0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

// Scrambles a user seed with a tag; used to split one scenario seed into
// independent sub-seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

// SplitMix64 stream; satisfies UniformRandomBitGenerator.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  explicit StreamRng(std::uint64_t state) noexcept : state_(state) {}
  StreamRng(const StreamKey& key, std::uint64_t cycle) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

// Exact Binomial(n, p) variate. Degenerate p in {0, 1} and n = 0 are handled
// without touching the generator.
std::int64_t binomial_draw(std::int64_t n, double p, StreamRng& rng);

}  // namespace qpcr
