#pragma once

#include <array>
#include <cstdint>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace loopsoup {

namespace detail {

// SplitMix64 finalizer; also used to fold key material into a stream state.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Independent per-try seeds for rejection samplers.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                           std::uint64_t salt,
                                           std::uint64_t index) {
  return mix64(mix64(seed ^ mix64(salt)) ^ index);
}

}  // namespace detail

// Purpose tags keep unrelated samplers from sharing a stream even when the
// rest of the key tuple collides.
enum class StreamTag : std::uint64_t {
  soup_cell = 0x01,
  bridge = 0x02,
  excursion = 0x03,
  permutation = 0x04,
  rejection = 0x05,
  generic = 0x06,
};

// Counter-based RNG stream: the state is a pure function of the key tuple
// (seed, tag, k1, k2, ...), so any cell of any sampler can be regenerated
// independently of scheduling and worker count.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, StreamTag tag,
            std::uint64_t k1 = 0, std::uint64_t k2 = 0, std::uint64_t k3 = 0) {
    std::uint64_t s = detail::mix64(seed ^ 0x6A09E667F3BCC908ull);
    s = detail::mix64(s ^ static_cast<std::uint64_t>(tag));
    s = detail::mix64(s ^ k1);
    s = detail::mix64(s ^ k2);
    s = detail::mix64(s ^ k3);
    state_ = s;
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound). Lemire's multiply-shift; the tiny modulo
  // bias (< 2^-32 for our bounds) is irrelevant at desk scale.
  std::uint32_t next_below(std::uint32_t bound) {
    assert(bound > 0);
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(next_u64() >> 32) * bound) >> 32);
  }

  // Exact Poisson by CDF inversion. All intensities in this project are
  // small (per-cell loop means, per-site excursion rates).
  int next_poisson(double lambda) {
    assert(lambda >= 0.0 && lambda < 500.0);
    if (lambda == 0.0) return 0;
    const double u = next_unit();
    double p = std::exp(-lambda);
    double cdf = p;
    int k = 0;
    while (u >= cdf && k < 100000) {
      ++k;
      p *= lambda / k;
      cdf += p;
    }
    return k;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = next_below(static_cast<std::uint32_t>(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace loopsoup
