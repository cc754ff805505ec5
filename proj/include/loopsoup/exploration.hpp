#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "loopsoup/cluster.hpp"
#include "loopsoup/geometry.hpp"
#include "loopsoup/rng.hpp"
#include "loopsoup/soup.hpp"
#include "loopsoup/stats.hpp"
#include "loopsoup/topology.hpp"

namespace loopsoup {

namespace detail {

// Component of (domain \ blocked) containing `from`; empty if `from` is
// blocked or outside.
inline SiteSet domain_component(const LatticeDomain& domain,
                                const SiteSet& blocked, Site from) {
  if (!domain.contains(from) || blocked.contains(from)) return SiteSet{};
  Bitmap seen(domain.bounds());
  std::deque<Site> queue{from};
  seen.set(from);
  std::vector<Site> out{from};
  while (!queue.empty()) {
    const Site cur = queue.front();
    queue.pop_front();
    for (Site d : kSteps) {
      const Site t{cur.x + d.x, cur.y + d.y};
      if (!domain.contains(t) || blocked.contains(t) || seen.get(t)) continue;
      seen.set(t);
      out.push_back(t);
      queue.push_back(t);
    }
  }
  return SiteSet(std::move(out));
}

}  // namespace detail

// Default chord for a point target: the horizontal lattice segment at the
// target's height, from the right domain boundary toward the target,
// ordered right to left.
inline std::vector<Site> default_chord(const LatticeDomain& domain, Site target) {
  std::vector<Site> chord;
  for (int x = domain.bounds().xmax; x >= target.x; --x) {
    const Site s{x, target.y};
    if (domain.contains(s)) chord.push_back(s);
  }
  return chord;
}

struct ExplorationResult {
  bool found = false;       // false: no cluster filling contains the target
  Site hit_site{};          // T: rightmost chord site in the target cluster's trace
  int hit_cluster = -1;     // outermost cluster id containing the target
  SiteSet discovered;       // A~: filling of the passed chord piece and the
                            // complete clusters it meets
  SiteSet remaining_component;  // component of domain \ A~ containing target
};

// Markovian chord exploration: walk the chord from the boundary end until the
// complete cluster surrounding the target is hit.
inline ExplorationResult explore_chord(const ClusterAnalysis& analysis,
                                       const LatticeDomain& domain, Site target,
                                       std::span<const Site> chord) {
  if (!domain.contains(target))
    throw std::invalid_argument("explore_chord: target outside domain");

  ExplorationResult result;
  const auto hit = analysis.cluster_containing(target);
  if (!hit) return result;
  result.found = true;
  result.hit_cluster = *hit;

  const CompleteCluster target_cluster = analysis.complete_cluster(*hit);
  std::size_t t_index = chord.size();
  for (std::size_t i = 0; i < chord.size(); ++i) {
    if (target_cluster.trace.contains(chord[i])) {
      t_index = i;
      result.hit_site = chord[i];
      break;
    }
  }
  if (t_index == chord.size())
    throw std::invalid_argument(
        "explore_chord: chord does not meet the target's complete cluster");

  // Chord sites strictly right of T plus every complete cluster they touch.
  std::vector<Site> discovered_sites(chord.begin(),
                                     chord.begin() + static_cast<long>(t_index));
  std::vector<bool> absorbed(analysis.set().clusters.size(), false);
  for (std::size_t i = 0; i < t_index; ++i) {
    for (int id : analysis.outermost()) {
      if (absorbed[static_cast<std::size_t>(id)]) continue;
      if (analysis.set().traces[static_cast<std::size_t>(id)].contains(chord[i]))
        absorbed[static_cast<std::size_t>(id)] = true;
    }
  }
  for (int id : analysis.outermost()) {
    if (!absorbed[static_cast<std::size_t>(id)]) continue;
    const CompleteCluster cc = analysis.complete_cluster(id);
    for (Site s : cc.trace) discovered_sites.push_back(s);
  }
  if (!discovered_sites.empty()) {
    const SiteSet raw(std::move(discovered_sites));
    result.discovered = filling(raw, raw.bbox().expanded(1));
  }
  result.remaining_component =
      detail::domain_component(domain, result.discovered, target);
  return result;
}

inline ExplorationResult explore_chord(const ClusterAnalysis& analysis,
                                       const LatticeDomain& domain,
                                       Site target) {
  const std::vector<Site> chord = default_chord(domain, target);
  return explore_chord(analysis, domain, target, chord);
}

// Exploration stopped at a fixed chord prefix (no reference to the target's
// cluster): discovers the prefix and every complete cluster meeting it. The
// Markov-consistency experiments condition on the target not being absorbed.
struct PartialExploration {
  SiteSet discovered;
  bool target_absorbed = false;
  SiteSet remaining_component;
};

inline PartialExploration explore_prefix(const ClusterAnalysis& analysis,
                                         const LatticeDomain& domain,
                                         Site target,
                                         std::span<const Site> prefix) {
  PartialExploration result;
  std::vector<Site> discovered_sites(prefix.begin(), prefix.end());
  std::vector<bool> absorbed(analysis.set().clusters.size(), false);
  for (const Site s : prefix) {
    for (int id : analysis.outermost()) {
      if (absorbed[static_cast<std::size_t>(id)]) continue;
      if (analysis.set().traces[static_cast<std::size_t>(id)].contains(s))
        absorbed[static_cast<std::size_t>(id)] = true;
    }
  }
  for (int id : analysis.outermost()) {
    if (!absorbed[static_cast<std::size_t>(id)]) continue;
    const CompleteCluster cc = analysis.complete_cluster(id);
    for (Site s : cc.trace) discovered_sites.push_back(s);
  }
  if (!discovered_sites.empty()) {
    const SiteSet raw(std::move(discovered_sites));
    result.discovered = filling(raw, raw.bbox().expanded(1));
  }
  result.target_absorbed = result.discovered.contains(target);
  if (!result.target_absorbed)
    result.remaining_component =
        detail::domain_component(domain, result.discovered, target);
  return result;
}

// ---------------------------------------------------------------------------
// Pinned-cluster conditioning

struct PinnedSample {
  bool accepted = false;
  int tries = 0;                 // soups drawn, including the accepted one
  std::uint64_t sample_seed = 0; // seed of the accepted soup
  double eps = 0.0;
  Site anchor{}, pin{};
  LoopSoupSample sample;
  CompleteCluster cluster;       // complete cluster surrounding the anchor
};

// Rejection sampler for the conditional law of the anchor's complete cluster
// given that its trace meets the half-disk D(pin, eps).
inline PinnedSample sample_pinned_cluster(const SoupConfig& base, Site anchor,
                                          Site pin, double eps, int max_tries) {
  if (eps < 1.0)
    throw std::invalid_argument("sample_pinned_cluster: eps must be >= 1");
  PinnedSample out;
  out.eps = eps;
  out.anchor = anchor;
  out.pin = pin;
  const std::vector<Site> pin_region = half_disk_sites(base.domain, pin, eps);
  for (int t = 0; t < max_tries; ++t) {
    out.tries = t + 1;
    SoupConfig config = base;
    config.seed = detail::derive_seed(base.seed, 0x70696E6E65646370ull,
                                      static_cast<std::uint64_t>(t));
    LoopSoupSample sample = sample_loop_soup(config);
    ClusterAnalysis analysis(sample.loops, build_clusters(sample.loops));
    const auto id = analysis.cluster_containing(anchor);
    if (!id) continue;
    CompleteCluster cc = analysis.complete_cluster(*id);
    bool pinned = false;
    for (Site s : pin_region)
      if (cc.trace.contains(s)) {
        pinned = true;
        break;
      }
    if (!pinned) continue;
    out.accepted = true;
    out.sample_seed = config.seed;
    out.sample = std::move(sample);
    out.cluster = std::move(cc);
    return out;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pinning-probability scaling u(eps) ~ eps^beta

struct PinningScalingReport {
  std::vector<double> eps_grid;
  std::vector<EstimatorReport> u;  // one Wilson report per grid point
  bool degenerate = false;         // some u estimate was zero; no fit
  double beta = 0.0;
  double beta_stderr = 0.0;
  double beta_ci_low = 0.0, beta_ci_high = 0.0;
  int monotone_violations = 0;  // u must not decrease as eps grows
};

// Monte Carlo estimate of u(eps) = P(anchor surrounded and the surrounding
// complete cluster touches D(pin, eps)) on a grid, with a weighted
// least-squares fit of log u against log eps.
inline PinningScalingReport estimate_pinning_scaling(
    const SoupConfig& base, Site anchor, Site pin,
    const std::vector<double>& eps_grid, int samples_per_eps) {
  if (eps_grid.size() < 3)
    throw std::invalid_argument(
        "estimate_pinning_scaling: need at least 3 grid points");
  PinningScalingReport report;
  report.eps_grid = eps_grid;

  for (std::size_t g = 0; g < eps_grid.size(); ++g) {
    const std::vector<Site> pin_region =
        half_disk_sites(base.domain, pin, eps_grid[g]);
    long long hits = 0;
    for (int t = 0; t < samples_per_eps; ++t) {
      SoupConfig config = base;
      config.seed = detail::derive_seed(base.seed, 0x75657073ull + g,
                                        static_cast<std::uint64_t>(t));
      LoopSoupSample sample = sample_loop_soup(config);
      ClusterAnalysis analysis(sample.loops, build_clusters(sample.loops));
      const auto id = analysis.cluster_containing(anchor);
      if (!id) continue;
      const CompleteCluster cc = analysis.complete_cluster(*id);
      for (Site s : pin_region)
        if (cc.trace.contains(s)) {
          ++hits;
          break;
        }
    }
    report.u.push_back(wilson_interval(hits, samples_per_eps));
    if (hits == 0) report.degenerate = true;
  }

  for (std::size_t g = 0; g + 1 < eps_grid.size(); ++g)
    if (report.u[g].estimate > report.u[g + 1].estimate)
      ++report.monotone_violations;

  if (report.degenerate) return report;

  // WLS of log u on log eps; delta-method weights 1/var(log u).
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t g = 0; g < eps_grid.size(); ++g) {
    const double u = report.u[g].estimate;
    const double n = static_cast<double>(report.u[g].n);
    const double var_log = (1.0 - u) / (n * u);
    const double w = 1.0 / var_log;
    const double x = std::log(eps_grid[g]);
    const double y = std::log(u);
    sw += w;
    swx += w * x;
    swy += w * y;
    swxx += w * x * x;
    swxy += w * x * y;
  }
  const double det = sw * swxx - swx * swx;
  report.beta = (sw * swxy - swx * swy) / det;
  report.beta_stderr = std::sqrt(sw / det);
  report.beta_ci_low = report.beta - 1.959963984540054 * report.beta_stderr;
  report.beta_ci_high = report.beta + 1.959963984540054 * report.beta_stderr;
  return report;
}

// ---------------------------------------------------------------------------
// The E_delta gluing event

// Checks the discrete E_delta event on a complete cluster pinned near the
// origin of a half-plane box: traversing the outer contour counterclockwise
// from the corner nearest the pin, the segment {x = w0, 0 <= y <= 2 delta}
// must be reached before the walk leaves the rectangle
// [-delta, w0] x [0, 2 delta].
inline bool glue_event_holds(const Contour& contour, Site pin, int delta,
                             int w0) {
  if (contour.corners.empty()) return false;
  std::size_t start = 0;
  long long best = -1;
  for (std::size_t i = 0; i < contour.corners.size(); ++i) {
    const Site c = contour.corners[i];
    const long long d2 = static_cast<long long>(c.x - pin.x) * (c.x - pin.x) +
                         static_cast<long long>(c.y - pin.y) * (c.y - pin.y);
    if (best < 0 || d2 < best ||
        (d2 == best && c < contour.corners[start])) {
      best = d2;
      start = i;
    }
  }
  const std::size_t n = contour.corners.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Site c = contour.corners[(start + k) % n];
    if (c.x >= w0 && c.y >= 0 && c.y <= 2 * delta) return true;   // reached
    if (c.x < -delta || c.y < 0 || c.y > 2 * delta) return false; // left R_delta
  }
  return false;  // never reached the segment
}

struct GluedSample {
  bool accepted = false;
  int tries = 0;
  std::uint64_t sample_seed = 0;
  int delta = 0;
  int w0 = 0;
  LoopSoupSample sample;
  CompleteCluster cluster;
};

// Rejection sampler for the discrete E_delta: the pinned cluster at the
// origin whose contour prefix glues along [0, w0]. pin_eps controls the
// pinning half-disk at the origin.
inline GluedSample sample_glued_near(const SoupConfig& base, int delta, int w0,
                                     int max_tries, double pin_eps = 2.0) {
  if (base.domain.kind() != DomainKind::half_plane_box)
    throw std::invalid_argument("sample_glued_near: needs a half-plane box");
  if (delta < 1)
    throw std::invalid_argument("sample_glued_near: delta must be >= 1");
  GluedSample out;
  out.delta = delta;
  out.w0 = w0;
  const Site pin{0, 0};
  const std::vector<Site> pin_region =
      half_disk_sites(base.domain, pin, pin_eps);

  for (int t = 0; t < max_tries; ++t) {
    out.tries = t + 1;
    SoupConfig config = base;
    config.seed = detail::derive_seed(base.seed, 0x676C75655F65364ull,
                                      static_cast<std::uint64_t>(t));
    LoopSoupSample sample = sample_loop_soup(config);
    ClusterAnalysis analysis(sample.loops, build_clusters(sample.loops));

    // Pinned cluster at 0: the largest-diameter complete cluster whose trace
    // meets the pinning half-disk.
    int best_id = -1;
    double best_diam = -1.0;
    for (int id : analysis.outermost()) {
      const SiteSet& trace = analysis.set().traces[static_cast<std::size_t>(id)];
      bool pinned = false;
      for (Site s : pin_region)
        if (trace.contains(s)) {
          pinned = true;
          break;
        }
      if (!pinned) continue;
      const double diam = euclidean_diameter(trace);
      if (diam > best_diam) {
        best_diam = diam;
        best_id = id;
      }
    }
    if (best_id < 0) continue;
    CompleteCluster cc = analysis.complete_cluster(best_id);
    const Contour contour = outer_contour(cc.filling);
    if (!glue_event_holds(contour, pin, delta, w0)) continue;
    out.accepted = true;
    out.sample_seed = config.seed;
    out.sample = std::move(sample);
    out.cluster = std::move(cc);
    return out;
  }
  return out;
}

}  // namespace loopsoup
