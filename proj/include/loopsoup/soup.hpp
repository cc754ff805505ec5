#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "loopsoup/geometry.hpp"
#include "loopsoup/loop.hpp"
#include "loopsoup/loop_measure.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

struct SoupConfig {
  LatticeDomain domain;
  double c = 1.0;       // loop-soup intensity, >= 0 (0 gives the empty soup)
  int cutoff = 4;       // minimum loop length kept, even, >= 2
  int n_max = 0;        // maximum loop length, even; 0 picks the default
  std::uint64_t seed = 0;

  static int default_n_max(const LatticeDomain& d) {
    const int scale =
        d.kind() == DomainKind::disk ? d.radius() : std::max(d.width(), d.height());
    return 2 * scale * scale;
  }

  void validate() const {
    if (c < 0.0) throw std::invalid_argument("soup: intensity c must be >= 0");
    if (cutoff < 2 || cutoff % 2 != 0)
      throw std::invalid_argument("soup: cutoff must be even and >= 2");
    const int nm = n_max == 0 ? default_n_max(domain) : n_max;
    if (nm < cutoff || nm % 2 != 0)
      throw std::invalid_argument("soup: n_max must be even and >= cutoff");
  }

  int effective_n_max() const { return n_max == 0 ? default_n_max(domain) : n_max; }
};

// Per-length bookkeeping: Poisson draws, loops kept after domain thinning,
// and cells whose every draw was thinned away.
struct LengthStats {
  int length = 0;
  long long drawn = 0;
  long long kept = 0;
};

struct LoopSoupSample {
  SoupConfig config;
  std::vector<RwLoop> loops;
  std::vector<LengthStats> per_length;
  double truncation_tail_mass = 0.0;
};

namespace detail {

// c * sum_{2n > n_max} p_{2n} / (2n), the Poisson mass lost to the length
// cap. Terms decay like 1/(2 pi n^2); the remainder past the summation
// horizon is added in closed form. Memoized per n_max.
inline double truncation_tail_mass(double c, int n_max) {
  thread_local std::unordered_map<int, double> memo;
  const auto it = memo.find(n_max);
  if (it != memo.end()) return c * it->second;
  double tail = 0.0;
  const int n_start = n_max / 2 + 1;
  double p = 0.25;
  for (int n = 1; n < n_start; ++n) {
    const double r = (2.0 * n + 1.0) / (2.0 * n + 2.0);
    p *= r * r;
  }
  int n = n_start;
  const int horizon = std::max(1 << 21, 16 * n_start);
  for (; n <= horizon; ++n) {
    tail += p / (2.0 * n);
    const double r = (2.0 * n + 1.0) / (2.0 * n + 2.0);
    p *= r * r;
  }
  tail += 1.0 / (2.0 * M_PI * n);
  memo.emplace(n_max, tail);
  return c * tail;
}

}  // namespace detail

// Poisson loop-soup with small-loop cutoff. For every site x and even
// length 2n in [cutoff, n_max], the rooted count is Poisson with the free
// mean c * p_{2n} / (2n); each point materializes one free bridge which is
// kept only if it stays in the domain. The thinned law has per-cell mean
// c * p_{2n}/(2n) * q(x, 2n) with q the bridge's staying probability.
// Every cell draws from its own (seed, site, length) keyed stream, so the
// sample is a pure function of the config.
inline LoopSoupSample sample_loop_soup(const SoupConfig& config) {
  config.validate();
  LoopSoupSample sample;
  sample.config = config;

  const int n_max = config.effective_n_max();
  const int cutoff = config.cutoff;
  sample.truncation_tail_mass = detail::truncation_tail_mass(config.c, n_max);

  const int n_lengths = (n_max - cutoff) / 2 + 1;
  sample.per_length.resize(static_cast<std::size_t>(n_lengths));
  for (int i = 0; i < n_lengths; ++i)
    sample.per_length[static_cast<std::size_t>(i)].length = cutoff + 2 * i;
  if (config.c == 0.0) return sample;

  // Per-length cell means and their zero-count thresholds.
  const std::vector<double> ladder = return_probability_ladder(n_max);
  std::vector<double> mean(static_cast<std::size_t>(n_lengths));
  std::vector<double> p_zero(static_cast<std::size_t>(n_lengths));
  for (int i = 0; i < n_lengths; ++i) {
    const int two_n = cutoff + 2 * i;
    mean[static_cast<std::size_t>(i)] =
        config.c * ladder[static_cast<std::size_t>(two_n / 2 - 1)] / two_n;
    p_zero[static_cast<std::size_t>(i)] = std::exp(-mean[static_cast<std::size_t>(i)]);
  }

  const std::vector<Site> sites = config.domain.sites();
  for (Site site : sites) {
    const std::uint64_t packed = pack_site(site);
    for (int i = 0; i < n_lengths; ++i) {
      const int two_n = cutoff + 2 * i;
      StreamRng cell(config.seed, StreamTag::soup_cell, packed,
                     static_cast<std::uint64_t>(two_n));
      const double u = cell.next_unit();
      const double pz = p_zero[static_cast<std::size_t>(i)];
      if (u < pz) continue;
      // Finish the Poisson inversion with the tail of the same draw.
      int count = 0;
      {
        const double lambda = mean[static_cast<std::size_t>(i)];
        double p = pz;
        double cdf = pz;
        while (u >= cdf && count < 100000) {
          ++count;
          p *= lambda / count;
          cdf += p;
        }
      }
      LengthStats& stats = sample.per_length[static_cast<std::size_t>(i)];
      stats.drawn += count;
      for (int j = 0; j < count; ++j) {
        StreamRng bridge_rng(config.seed, StreamTag::bridge, packed,
                             static_cast<std::uint64_t>(two_n),
                             static_cast<std::uint64_t>(j));
        auto loop = detail::draw_free_bridge_bounded(site, two_n, bridge_rng,
                                                     &config.domain);
        if (loop) {
          stats.kept += 1;
          sample.loops.push_back(std::move(*loop));
        }
      }
    }
  }
  return sample;
}

}  // namespace loopsoup
