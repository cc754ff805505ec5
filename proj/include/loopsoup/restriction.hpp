#pragma once

#include <cmath>
#include <complex>
#include <cstring>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopsoup/geometry.hpp"
#include "loopsoup/loop_measure.hpp"
#include "loopsoup/parallel.hpp"
#include "loopsoup/rng.hpp"
#include "loopsoup/site_set.hpp"
#include "loopsoup/stats.hpp"
#include "loopsoup/topology.hpp"

namespace loopsoup {

// ---------------------------------------------------------------------------
// Exponent algebra: c = (3k-8)(6-k)/(2k), alpha = (6-k)/(2k), k in (8/3, 4].
// The endpoint k = 8/3 (c = 0, alpha = 5/8) is admitted as the single-loop
// limit.

inline double c_of_kappa(double kappa) {
  if (kappa < 8.0 / 3.0 - 1e-12 || kappa > 4.0 + 1e-12)
    throw std::invalid_argument("c_of_kappa: kappa must lie in [8/3, 4]");
  return (3.0 * kappa - 8.0) * (6.0 - kappa) / (2.0 * kappa);
}

inline double alpha_of_kappa(double kappa) {
  if (kappa < 8.0 / 3.0 - 1e-12 || kappa > 4.0 + 1e-12)
    throw std::invalid_argument("alpha_of_kappa: kappa must lie in [8/3, 4]");
  return (6.0 - kappa) / (2.0 * kappa);
}

// Inverse of c_of_kappa on (8/3, 4]: the root of
// 3k^2 + (2c - 26)k + 48 = 0 lying in that interval.
inline double kappa_of_c(double c) {
  if (c < -1e-12 || c > 1.0 + 1e-12)
    throw std::invalid_argument("kappa_of_c: c must lie in [0, 1]");
  const double b = 2.0 * c - 26.0;
  const double disc = b * b - 4.0 * 3.0 * 48.0;
  const double root = disc > 0.0 ? std::sqrt(disc) : 0.0;
  return (-b - root) / 6.0;
}

struct ExponentTriple {
  double kappa = 0.0;
  double c = 0.0;
  double alpha = 0.0;
};

inline ExponentTriple exponents_from_kappa(double kappa) {
  return ExponentTriple{kappa, c_of_kappa(kappa), alpha_of_kappa(kappa)};
}

inline ExponentTriple exponents_from_c(double c) {
  const double kappa = kappa_of_c(c);
  return ExponentTriple{kappa, c, alpha_of_kappa(kappa)};
}

// ---------------------------------------------------------------------------
// Explicit hull maps: removal of the half-disk |z - a| < eps (a < 0 real)
// from the upper half-plane, z -> z + eps^2/(z - a). The second marked point
// sits at infinity where the map has unit derivative, so Eq-style
// predictions reduce to phi'(0)^alpha.

struct HullMap {
  double a = 0.0;    // center on the negative real axis
  double eps = 0.0;  // radius, 0 < eps < |a|

  std::complex<double> map(std::complex<double> z) const {
    return z + eps * eps / (z - a);
  }
  std::complex<double> derivative(std::complex<double> z) const {
    const std::complex<double> w = z - a;
    return 1.0 - eps * eps / (w * w);
  }
  double derivative_at_origin() const { return 1.0 - eps * eps / (a * a); }
};

inline HullMap hull_map(double a, double eps) {
  if (!(a < 0.0) || !(eps > 0.0) || eps >= -a)
    throw std::invalid_argument(
        "hull_map: need a < 0 and 0 < eps < |a| (hull off the arc)");
  return HullMap{a, eps};
}

// Lattice realization of a hull: the half-disk of sites around (a, 0).
inline std::vector<Site> hull_region_sites(const HullMap& hull, double scale) {
  const double ax = hull.a * scale;
  const double r = hull.eps * scale;
  std::vector<Site> out;
  const int x0 = static_cast<int>(std::floor(ax - r));
  const int x1 = static_cast<int>(std::ceil(ax + r));
  const int y1 = static_cast<int>(std::ceil(r));
  for (int y = 0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - ax;
      if (dx * dx + static_cast<double>(y) * y <= r * r)
        out.push_back(Site{x, y});
    }
  return out;
}

// ---------------------------------------------------------------------------
// Excursion ensembles

struct ExcursionConfig {
  LatticeDomain domain;
  std::vector<Site> arc;  // attachment sites on the boundary
  double lambda = 0.0;    // Poisson starts per arc site
  std::uint64_t seed = 0;
};

struct ExcursionEnsemble {
  ExcursionConfig config;
  std::uint64_t replica = 0;
  std::vector<std::vector<Site>> paths;
};

namespace detail {

// A half-plane excursion: a simple random walk from the arc site's interior
// neighbor, killed on first return to the boundary row y = 0 (the real
// line). The box sides and ceiling are truncation artifacts, so the walk
// reflects there (blocked steps are censored) instead of dying; only the
// floor absorbs. Walks return to the row almost surely.
inline std::vector<Site> walk_excursion(const LatticeDomain& domain, Site start,
                                        StreamRng& rng) {
  std::vector<Site> path{start};
  Site cur{start.x, start.y + 1};
  if (!domain.contains(cur)) return path;
  path.push_back(cur);
  for (;;) {
    const Site d = kSteps[rng.next_below(4)];
    const Site t{cur.x + d.x, cur.y + d.y};
    if (!domain.contains(t)) continue;  // reflected at a wall or the ceiling
    path.push_back(t);
    if (t.y == 0) return path;  // back on the real line
    cur = t;
  }
}

}  // namespace detail

// Poisson ensemble of boundary excursions: per arc site, Poisson(lambda)
// walks, each keyed by (seed, site, replica, index).
inline ExcursionEnsemble sample_excursions(const LatticeDomain& domain,
                                           const std::vector<Site>& arc,
                                           double lambda, std::uint64_t seed,
                                           std::uint64_t replica = 0) {
  if (lambda < 0.0)
    throw std::invalid_argument("sample_excursions: lambda must be >= 0");
  ExcursionEnsemble ensemble;
  ensemble.config = ExcursionConfig{domain, arc, lambda, seed};
  ensemble.replica = replica;
  if (lambda == 0.0) return ensemble;
  for (Site s : arc) {
    StreamRng counts(seed, StreamTag::excursion, pack_site(s), replica, 0);
    const int k = counts.next_poisson(lambda);
    for (int j = 0; j < k; ++j) {
      StreamRng walk(seed, StreamTag::excursion, pack_site(s), replica,
                     static_cast<std::uint64_t>(j) + 1);
      ensemble.paths.push_back(detail::walk_excursion(domain, s, walk));
    }
  }
  return ensemble;
}

namespace detail {

// Law-identical fast path for avoidance estimation. Chordal restriction
// statistics are carried by the excursions with BOTH endpoints on the
// attachment half-line, so a region hit only counts when the walk dies back
// on the row at x >= arc_min_x. Streams match sample_excursions exactly.
inline bool excursions_hit_region(const LatticeDomain& domain,
                                  const std::vector<Site>& arc, double lambda,
                                  std::uint64_t seed, std::uint64_t replica,
                                  const SiteSet& region, int arc_min_x) {
  for (Site s : arc) {
    StreamRng counts(seed, StreamTag::excursion, pack_site(s), replica, 0);
    const int k = counts.next_poisson(lambda);
    for (int j = 0; j < k; ++j) {
      StreamRng walk(seed, StreamTag::excursion, pack_site(s), replica,
                     static_cast<std::uint64_t>(j) + 1);
      bool hit = region.contains(s);
      Site cur{s.x, s.y + 1};
      if (!domain.contains(cur)) continue;
      hit = hit || region.contains(cur);
      for (;;) {
        const Site d = kSteps[walk.next_below(4)];
        const Site t{cur.x + d.x, cur.y + d.y};
        if (!domain.contains(t)) continue;  // reflected truncation wall
        hit = hit || region.contains(t);
        if (t.y == 0) {
          if (t.x < arc_min_x) hit = false;  // endpoint off the half-line
          break;
        }
        cur = t;
      }
      if (hit) return true;
    }
  }
  return false;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Avoidance probabilities and the calibration-free ratio test

struct RestrictionEstimate {
  HullMap hull;
  double scale = 1.0;
  EstimatorReport avoidance;   // Wilson interval over replicas
  double predicted = -1.0;     // phi'(0)^alpha when alpha supplied, else -1
  double z = 0.0;              // (estimate - predicted) / se, when predicted
  bool degenerate = false;     // empirical probability hit 0 or 1
};

// Monte Carlo avoidance probability of a lattice hull under the excursion
// ensemble law. Replicas are keyed streams, so the estimate is identical for
// any worker count.
inline RestrictionEstimate avoidance_probability(
    const LatticeDomain& domain, const std::vector<Site>& arc, double lambda,
    const HullMap& hull, double scale, int replicas, std::uint64_t seed,
    std::optional<double> alpha = std::nullopt, int workers = 1) {
  if (replicas < 1)
    throw std::invalid_argument("avoidance_probability: replicas must be >= 1");
  const SiteSet region{hull_region_sites(hull, scale)};
  int arc_min_x = arc.empty() ? 0 : arc.front().x;
  for (Site s : arc) arc_min_x = std::min(arc_min_x, s.x);
  std::vector<std::uint8_t> hit(static_cast<std::size_t>(replicas), 0);
  parallel_for(static_cast<std::size_t>(replicas), workers, [&](std::size_t r) {
    hit[r] = detail::excursions_hit_region(domain, arc, lambda, seed,
                                           static_cast<std::uint64_t>(r), region,
                                           arc_min_x)
                 ? 1
                 : 0;
  });
  long long avoided = 0;
  for (std::uint8_t h : hit)
    if (!h) ++avoided;
  RestrictionEstimate est;
  est.hull = hull;
  est.scale = scale;
  est.avoidance = wilson_interval(avoided, replicas, 0.95, seed);
  est.degenerate = (avoided == 0 || avoided == replicas);
  if (alpha) {
    est.predicted = std::pow(hull.derivative_at_origin(), *alpha);
    const double p = est.avoidance.estimate;
    const double se = std::sqrt(p * (1.0 - p) / replicas);
    est.z = se > 0.0 ? (p - est.predicted) / se : 0.0;
  }
  return est;
}

struct RatioTestReport {
  RestrictionEstimate first;
  RestrictionEstimate second;
  double ratio = 0.0;            // log P1 / log P2
  double predicted_ratio = 0.0;  // log phi1'(0) / log phi2'(0)
  double stderr_ratio = 0.0;     // delta method
  double z = 0.0;
  bool degenerate = false;
};

// For a Poisson ensemble P(avoid A) = exp(-lambda M(A)), so the ratio of log
// avoidance probabilities equals the ratio of log phi'(0) values regardless
// of the lattice normalization of the excursion measure.
inline RatioTestReport restriction_ratio_test(
    const LatticeDomain& domain, const std::vector<Site>& arc, double lambda,
    const HullMap& hull1, const HullMap& hull2, double scale, int replicas,
    std::uint64_t seed, int workers = 1) {
  // Replica streams are keyed by the hull geometry, so identical hulls see
  // identical replicas and the ratio degenerates to exactly 1.
  auto hull_seed = [&](const HullMap& hull) {
    std::uint64_t h = detail::mix64(seed ^ 0x726174696F74ull);
    std::uint64_t bits;
    static_assert(sizeof(double) == sizeof(bits));
    std::memcpy(&bits, &hull.a, sizeof(bits));
    h = detail::mix64(h ^ bits);
    std::memcpy(&bits, &hull.eps, sizeof(bits));
    return detail::mix64(h ^ bits);
  };
  RatioTestReport report;
  report.first = avoidance_probability(domain, arc, lambda, hull1, scale,
                                       replicas, hull_seed(hull1), std::nullopt,
                                       workers);
  report.second = avoidance_probability(domain, arc, lambda, hull2, scale,
                                        replicas, hull_seed(hull2), std::nullopt,
                                        workers);
  report.predicted_ratio = std::log(hull1.derivative_at_origin()) /
                           std::log(hull2.derivative_at_origin());
  const double p1 = report.first.avoidance.estimate;
  const double p2 = report.second.avoidance.estimate;
  if (report.first.degenerate || report.second.degenerate) {
    report.degenerate = true;
    return report;
  }
  report.ratio = std::log(p1) / std::log(p2);
  // Var(log P) = (1-P)/(n P); the two estimates are independent.
  const double v1 = (1.0 - p1) / (replicas * p1);
  const double v2 = (1.0 - p2) / (replicas * p2);
  const double l1 = std::log(p1);
  const double l2 = std::log(p2);
  report.stderr_ratio =
      std::fabs(report.ratio) * std::sqrt(v1 / (l1 * l1) + v2 / (l2 * l2));
  report.z = (report.ratio - report.predicted_ratio) / report.stderr_ratio;
  return report;
}

// Fits the lattice lambda* matching restriction exponent alpha at a
// reference hull: exp(-lambda M1(A)) = phi'(0)^alpha with M1 estimated at a
// pilot intensity.
inline double calibrate_lambda(const LatticeDomain& domain,
                               const std::vector<Site>& arc,
                               const HullMap& reference, double scale,
                               double alpha, double pilot_lambda,
                               int replicas, std::uint64_t seed) {
  const RestrictionEstimate pilot = avoidance_probability(
      domain, arc, pilot_lambda, reference, scale, replicas, seed);
  if (pilot.degenerate)
    throw std::runtime_error("calibrate_lambda: pilot estimate degenerate");
  const double mass_per_lambda = -std::log(pilot.avoidance.estimate) / pilot_lambda;
  return -alpha * std::log(reference.derivative_at_origin()) / mass_per_lambda;
}

// ---------------------------------------------------------------------------
// Loop-vs-excursion cut-point contrast

// Discrete "local cut point with respect to z": a site of the conditioned
// set adjacent to both z's complement pocket and the escape component
// (see analyze_pocket). Such sites are contour-incident by construction.
// Both ensembles are scored by the same statistic; the arc-restricted count
// for the excursion ensemble is reported as a side column.
struct CutpointPoint {
  int scale = 0;  // domain scale R
  EstimatorReport loop_freq;           // single-loop samples with a cut site
  EstimatorReport excursion_freq;      // ensemble samples with a cut site
  EstimatorReport excursion_arc_freq;  // cut site lying on the arc itself
  int loop_conditioning_failures = 0;
  int excursion_conditioning_failures = 0;
};

struct CutpointContrastReport {
  std::vector<CutpointPoint> points;
  double z_largest = 0.0;  // loop vs excursion z at the largest scale
  bool conditioning_failure = false;
};

// A single loop from the rooted measure with lengths restricted to
// [len_min, len_max], conditioned to stay in the domain and to
// pocket-encircle z (z off the trace, in a bounded complement pocket).
// Rejection from the exact cell measure: length proportional to
// p_{2n}/(2n), root uniform over the domain; roots farther than len/2 from
// z have zero acceptance, so they are rejected before bridging.
struct PocketLoop {
  RwLoop loop;
  PocketAnalysis pocket;
  int tries = 0;
};

inline std::optional<PocketLoop> sample_pocket_loop(const LatticeDomain& domain,
                                                    Site z, int len_min,
                                                    int len_max,
                                                    std::uint64_t seed,
                                                    int max_tries) {
  if (len_min < 4 || len_min % 2 != 0 || len_max < len_min)
    throw std::invalid_argument("sample_pocket_loop: bad length range");
  const std::vector<double> ladder = return_probability_ladder(len_max);
  std::vector<double> cdf;
  std::vector<int> lengths;
  double total = 0.0;
  for (int two_n = len_min; two_n <= len_max; two_n += 2) {
    total += ladder[static_cast<std::size_t>(two_n / 2 - 1)] / two_n;
    lengths.push_back(two_n);
    cdf.push_back(total);
  }
  const std::vector<Site> sites = domain.sites();
  for (int t = 0; t < max_tries; ++t) {
    StreamRng rng(seed, StreamTag::rejection, static_cast<std::uint64_t>(t));
    const double u = rng.next_unit() * total;
    const std::size_t pick = static_cast<std::size_t>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    const int two_n = lengths[std::min(pick, lengths.size() - 1)];
    const Site root = sites[rng.next_below(static_cast<std::uint32_t>(sites.size()))];
    // A 2n-walk cannot reach farther than n in L-infinity.
    if (std::max(std::abs(root.x - z.x), std::abs(root.y - z.y)) > two_n / 2)
      continue;
    auto loop = detail::draw_free_bridge_bounded(root, two_n, rng, &domain);
    if (!loop) continue;
    PocketAnalysis pocket = analyze_pocket(loop->trace(), z, domain);
    if (!pocket.encircled) continue;
    return PocketLoop{std::move(*loop), std::move(pocket), t + 1};
  }
  return std::nullopt;
}

// Contrast experiment across domain scales in the half-plane box W = H = R
// with marked point z = (0, max(4, R/4)): single loops of length >= 100 vs
// excursion ensembles attached to the full bottom arc, both conditioned to
// pocket-encircle z.
inline CutpointContrastReport cutpoint_contrast(const std::vector<int>& r_grid,
                                                double lambda, int replicas,
                                                std::uint64_t seed,
                                                int loop_max_tries = 200000,
                                                int workers = 1) {
  if (r_grid.size() < 1 || replicas < 1)
    throw std::invalid_argument("cutpoint_contrast: bad grid or replicas");
  CutpointContrastReport report;
  for (std::size_t gi = 0; gi < r_grid.size(); ++gi) {
    const int r = r_grid[gi];
    const LatticeDomain domain = LatticeDomain::half_plane_box(r, r);
    const Site z{0, std::max(4, r / 4)};
    const int len_min = 100;
    const int len_max = 4 * r * r;

    CutpointPoint point;
    point.scale = r;

    // Loop side: -1 failed, 0 no cut, 1 cut.
    std::vector<int> loop_slot(static_cast<std::size_t>(replicas), -1);
    parallel_for(static_cast<std::size_t>(replicas), workers, [&](std::size_t i) {
      const auto drawn = sample_pocket_loop(
          domain, z, len_min, len_max,
          detail::derive_seed(seed, 0x6C6F6F70ull + gi,
                              static_cast<std::uint64_t>(i)),
          loop_max_tries);
      if (drawn) loop_slot[i] = drawn->pocket.cut_sites.empty() ? 0 : 1;
    });
    long long loop_cuts = 0;
    long long loop_done = 0;
    for (int s : loop_slot) {
      if (s < 0)
        ++point.loop_conditioning_failures;
      else {
        ++loop_done;
        loop_cuts += s;
      }
    }

    // Excursion side: K = arc plus all path traces. Slot bits: bit0 = cut
    // anywhere, bit1 = cut on the arc.
    std::vector<Site> arc;
    for (int x = -r; x <= r; ++x) arc.push_back(Site{x, 0});
    std::vector<int> exc_slot(static_cast<std::size_t>(replicas), -1);
    parallel_for(static_cast<std::size_t>(replicas), workers, [&](std::size_t i) {
      for (int t = 0; t < 64; ++t) {
        const std::uint64_t s = detail::derive_seed(
            seed, 0x65786375ull + gi, i * 1000003ull + static_cast<std::uint64_t>(t));
        const ExcursionEnsemble ensemble =
            sample_excursions(domain, arc, lambda, s, 0);
        std::vector<Site> k_sites = arc;
        for (const auto& path : ensemble.paths)
          for (Site site : path) k_sites.push_back(site);
        const SiteSet k(std::move(k_sites));
        const PocketAnalysis pocket = analyze_pocket(k, z, domain);
        if (!pocket.encircled) continue;
        int bits = pocket.cut_sites.empty() ? 0 : 1;
        for (Site cs : pocket.cut_sites)
          if (cs.y == 0) {
            bits |= 2;
            break;
          }
        exc_slot[i] = bits;
        return;
      }
    });
    long long exc_cuts = 0, exc_arc_cuts = 0, exc_done = 0;
    for (int s : exc_slot) {
      if (s < 0) {
        ++point.excursion_conditioning_failures;
        continue;
      }
      ++exc_done;
      exc_cuts += s & 1;
      exc_arc_cuts += (s >> 1) & 1;
    }

    if (loop_done == 0 || exc_done == 0) {
      report.conditioning_failure = true;
      report.points.push_back(point);
      continue;
    }
    point.loop_freq = wilson_interval(loop_cuts, loop_done, 0.95, seed);
    point.excursion_freq = wilson_interval(exc_cuts, exc_done, 0.95, seed);
    point.excursion_arc_freq = wilson_interval(exc_arc_cuts, exc_done, 0.95, seed);
    report.points.push_back(point);
  }
  if (!report.points.empty() && !report.conditioning_failure) {
    const CutpointPoint& last = report.points.back();
    report.z_largest =
        two_proportion_z(static_cast<long long>(std::llround(
                             last.loop_freq.estimate * last.loop_freq.n)),
                         last.loop_freq.n,
                         static_cast<long long>(std::llround(
                             last.excursion_freq.estimate * last.excursion_freq.n)),
                         last.excursion_freq.n);
  }
  return report;
}

}  // namespace loopsoup
