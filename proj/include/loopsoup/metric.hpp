#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "loopsoup/geometry.hpp"
#include "loopsoup/loop.hpp"
#include "loopsoup/site_set.hpp"
#include "loopsoup/topology.hpp"

namespace loopsoup {

namespace detail {

inline double hausdorff_distance(const SiteSet& a, const SiteSet& b) {
  auto one_sided = [](const SiteSet& from, const SiteSet& to) {
    double worst = 0.0;
    for (Site s : from) {
      double best = std::numeric_limits<double>::infinity();
      for (Site t : to) {
        const double dx = s.x - t.x;
        const double dy = s.y - t.y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < best) best = d2;
        if (best == 0.0) break;
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::sqrt(std::max(one_sided(a, b), one_sided(b, a)));
}

// Smallest threshold t such that the bipartite graph {(i,j): cost <= t}
// has a perfect matching (bottleneck assignment), via Kuhn's algorithm.
inline double bottleneck_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  if (n == 0) return 0.0;
  std::vector<double> values;
  for (const auto& row : cost)
    for (double v : row) values.push_back(v);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  auto feasible = [&](double t) {
    std::vector<int> match(n, -1);
    std::vector<bool> used;
    std::function<bool(std::size_t)> try_kuhn = [&](std::size_t i) -> bool {
      for (std::size_t j = 0; j < n; ++j) {
        if (cost[i][j] > t || used[j]) continue;
        used[j] = true;
        if (match[j] < 0 || try_kuhn(static_cast<std::size_t>(match[j]))) {
          match[j] = static_cast<int>(i);
          return true;
        }
      }
      return false;
    };
    for (std::size_t i = 0; i < n; ++i) {
      used.assign(n, false);
      if (!try_kuhn(i)) return false;
    }
    return true;
  };

  std::size_t lo = 0, hi = values.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (feasible(values[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return values[lo];
}

// Greedy upper bound used above the exact-assignment size limit.
inline double greedy_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  struct Entry {
    double c;
    std::size_t i, j;
  };
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) entries.push_back({cost[i][j], i, j});
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.c < b.c; });
  std::vector<bool> row(n, false), col(n, false);
  double worst = 0.0;
  std::size_t matched = 0;
  for (const Entry& e : entries) {
    if (row[e.i] || col[e.j]) continue;
    row[e.i] = col[e.j] = true;
    worst = std::max(worst, e.c);
    if (++matched == n) break;
  }
  return worst;
}

}  // namespace detail

// Diameter band of a loop: band 0 for diameter > d_ref/2, band n >= 1 for
// diameter in (d_ref 2^{-n-1}, d_ref 2^{-n}].
inline int diameter_band(double diameter, double d_ref) {
  if (diameter > d_ref / 2.0) return 0;
  int n = 1;
  while (diameter <= d_ref / std::pow(2.0, n + 1) && n < 64) ++n;
  return n;
}

struct SoupDistance {
  double value = 0.0;
  bool exact = true;  // false when any band fell back to the greedy matching
};

// The d* metric on loop collections: loops are bucketed into diameter bands,
// each band compared with the bottleneck matching of trace Hausdorff
// distances capped at M (M for bands of unequal cardinality), and bands are
// summed with weights 2^-n.
inline SoupDistance soup_distance(std::span<const RwLoop> a,
                                  std::span<const RwLoop> b, double m,
                                  double d_ref,
                                  std::size_t exact_limit = 10) {
  if (m <= 0.0) throw std::invalid_argument("soup_distance: M must be > 0");
  if (d_ref <= 0.0) throw std::invalid_argument("soup_distance: D_ref must be > 0");

  auto bucket = [&](std::span<const RwLoop> loops) {
    std::vector<std::vector<SiteSet>> bands;
    for (const RwLoop& loop : loops) {
      const SiteSet trace = loop.trace();
      const int band = diameter_band(euclidean_diameter(trace), d_ref);
      if (static_cast<std::size_t>(band) >= bands.size())
        bands.resize(static_cast<std::size_t>(band) + 1);
      bands[static_cast<std::size_t>(band)].push_back(trace);
    }
    return bands;
  };
  std::vector<std::vector<SiteSet>> bands_a = bucket(a);
  std::vector<std::vector<SiteSet>> bands_b = bucket(b);
  const std::size_t n_bands = std::max(bands_a.size(), bands_b.size());
  bands_a.resize(n_bands);
  bands_b.resize(n_bands);

  SoupDistance out;
  for (std::size_t band = 0; band < n_bands; ++band) {
    const auto& ca = bands_a[band];
    const auto& cb = bands_b[band];
    double dm;
    if (ca.size() != cb.size()) {
      dm = m;  // no bijection exists: min over the empty set
    } else if (ca.empty()) {
      dm = 0.0;
    } else {
      std::vector<std::vector<double>> cost(ca.size(),
                                            std::vector<double>(cb.size()));
      for (std::size_t i = 0; i < ca.size(); ++i)
        for (std::size_t j = 0; j < cb.size(); ++j)
          cost[i][j] = detail::hausdorff_distance(ca[i], cb[j]);
      if (ca.size() <= exact_limit) {
        dm = std::min(detail::bottleneck_assignment(cost), m);
      } else {
        dm = std::min(detail::greedy_assignment(cost), m);
        out.exact = false;
      }
    }
    out.value += std::pow(2.0, -static_cast<double>(band)) * dm;
  }
  return out;
}

// Convenience overload anchoring the band ladder at the domain diameter.
inline SoupDistance soup_distance(std::span<const RwLoop> a,
                                  std::span<const RwLoop> b, double m,
                                  const LatticeDomain& domain) {
  const double d_ref = domain.kind() == DomainKind::disk
                           ? 2.0 * domain.radius()
                           : std::hypot(2.0 * domain.width(), domain.height());
  return soup_distance(a, b, m, d_ref);
}

}  // namespace loopsoup
