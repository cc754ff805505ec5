#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "loopsoup/geometry.hpp"
#include "loopsoup/loop.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

using BigRational = boost::multiprecision::cpp_rational;

// Exact probability that a free planar simple random walk is back at its
// start after 2n steps: p_{2n} = binom(2n, n)^2 / 4^{2n}.
inline BigRational return_probability(int two_n) {
  if (two_n <= 0 || two_n % 2 != 0)
    throw std::invalid_argument("return_probability: length must be even, >= 2");
  const int n = two_n / 2;
  boost::multiprecision::cpp_int binom = 1;
  for (int i = 1; i <= n; ++i) {
    binom *= (n + i);
    binom /= i;
  }
  boost::multiprecision::cpp_int denom = 1;
  denom <<= 4 * n;  // 4^{2n} = 2^{4n}
  return BigRational(binom * binom, denom);
}

// Double ladder p_2, p_4, ..., p_{2m} via the stable recurrence
// p_{2(n+1)} = p_{2n} ((2n+1)/(2n+2))^2.
inline std::vector<double> return_probability_ladder(int max_two_n) {
  std::vector<double> p;  // p[i] = p_{2(i+1)}
  p.reserve(static_cast<std::size_t>(max_two_n / 2));
  double cur = 0.25;
  p.push_back(cur);
  for (int n = 1; 2 * (n + 1) <= max_two_n; ++n) {
    const double r = (2.0 * n + 1.0) / (2.0 * n + 2.0);
    cur *= r * r;
    p.push_back(cur);
  }
  return p;
}

namespace detail {

// CDF of the east-count distribution P(k) = binom(n,k)^2 / binom(2n,n) of a
// uniform closed 2n-walk, built in log space. Small-n tables are cached per
// thread; large n (rarely drawn) are recomputed.
inline std::vector<double> build_east_count_cdf(int n) {
  std::vector<double> cdf(static_cast<std::size_t>(n) + 1);
  const double log_norm = std::lgamma(2.0 * n + 1.0) - 2.0 * std::lgamma(n + 1.0);
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double log_binom =
        std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    acc += std::exp(2.0 * log_binom - log_norm);
    cdf[static_cast<std::size_t>(k)] = acc;
  }
  cdf.back() = 1.0;
  return cdf;
}

inline int sample_east_count(int n, StreamRng& rng) {
  const double u = rng.next_unit();
  constexpr int kCacheLimit = 1024;
  if (n <= kCacheLimit) {
    thread_local std::vector<std::vector<double>> cache;
    if (cache.size() <= static_cast<std::size_t>(n))
      cache.resize(static_cast<std::size_t>(n) + 1);
    auto& cdf = cache[static_cast<std::size_t>(n)];
    if (cdf.empty()) cdf = build_east_count_cdf(n);
    return static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), u) -
                            cdf.begin());
  }
  const std::vector<double> cdf = build_east_count_cdf(n);
  return static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), u) -
                          cdf.begin());
}

// One draw from the free bridge law: a uniformly distributed closed 2n-step
// walk started at root. Exact: sample the E/W vs N/S split from the closed
// walk kernel, then emit a uniform permutation of the step multiset
// incrementally. With a domain, generation aborts at the first site outside
// it (the draw counts as rejected).
inline std::optional<RwLoop> draw_free_bridge_bounded(
    Site root, int two_n, StreamRng& rng, const LatticeDomain* domain) {
  const int n = two_n / 2;
  const int k = sample_east_count(n, rng);
  int remaining[4] = {k, n - k, k, n - k};  // E,N,W,S, matching kSteps
  RwLoop loop;
  loop.sites.reserve(static_cast<std::size_t>(two_n));
  Site cur = root;
  loop.sites.push_back(cur);
  for (int i = 0; i < two_n - 1; ++i) {
    std::uint32_t r = rng.next_below(static_cast<std::uint32_t>(
        remaining[0] + remaining[1] + remaining[2] + remaining[3]));
    int dir = 0;
    while (r >= static_cast<std::uint32_t>(remaining[dir])) {
      r -= static_cast<std::uint32_t>(remaining[dir]);
      ++dir;
    }
    --remaining[dir];
    cur = Site{cur.x + kSteps[static_cast<std::size_t>(dir)].x,
               cur.y + kSteps[static_cast<std::size_t>(dir)].y};
    if (domain != nullptr && !domain->contains(cur)) return std::nullopt;
    loop.sites.push_back(cur);
  }
  return loop;
}

inline RwLoop draw_free_bridge(Site root, int two_n, StreamRng& rng) {
  return *draw_free_bridge_bounded(root, two_n, rng, nullptr);
}

inline bool stays_inside(const RwLoop& loop, const LatticeDomain& domain) {
  for (Site s : loop.sites)
    if (!domain.contains(s)) return false;
  return true;
}

}  // namespace detail

// Free-bridge rejection sampler: uniform closed 2n-walk from root,
// resampled until it stays in the domain. nullopt after max_tries
// rejections (the domain is too small for this length at this root).
inline std::optional<RwLoop> sample_bridge(Site root, int two_n,
                                           const LatticeDomain& domain,
                                           StreamRng& rng,
                                           int max_tries = 1000) {
  if (two_n < 2 || two_n % 2 != 0)
    throw std::invalid_argument("sample_bridge: length must be even, >= 2");
  if (!domain.contains(root))
    throw std::invalid_argument("sample_bridge: root outside domain");
  for (int t = 0; t < max_tries; ++t) {
    auto loop = detail::draw_free_bridge_bounded(root, two_n, rng, &domain);
    if (loop) return loop;
  }
  return std::nullopt;
}

}  // namespace loopsoup
