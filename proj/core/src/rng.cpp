#include "qpcr/rng.hpp"

#include <random>

#include "qpcr/errors.hpp"

namespace qpcr {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  return mix64(mix64(seed ^ 0x6a09e667f3bcc909ULL) + mix64(tag));
}

StreamRng::StreamRng(const StreamKey& key, std::uint64_t cycle) noexcept {
  std::uint64_t h = mix64(key.seed ^ 0x243f6a8885a308d3ULL);
  h = mix64(h ^ static_cast<std::uint64_t>(key.domain));
  h = mix64(h + key.replicate * 0x9e3779b97f4a7c15ULL);
  h = mix64(h ^ (key.lane * 0xc2b2ae3d27d4eb4fULL));
  h = mix64(h + cycle * 0x165667b19e3779f9ULL);
  state_ = h;
}

std::int64_t binomial_draw(std::int64_t n, double p, StreamRng& rng) {
  if (n < 0) throw DomainError("binomial_draw: negative trial count");
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("binomial_draw: probability outside [0, 1]");
  }
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  std::binomial_distribution<std::int64_t> dist(n, p);
  return dist(rng);
}

}  // namespace qpcr
