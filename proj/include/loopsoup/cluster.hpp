#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "loopsoup/loop.hpp"
#include "loopsoup/site_set.hpp"
#include "loopsoup/topology.hpp"

namespace loopsoup {

// Partition of loops into clusters under the shared-site relation.
// Canonical form: clusters ordered by their minimum loop index, members
// sorted ascending.
struct ClusterSet {
  std::vector<std::vector<int>> clusters;
  std::vector<int> cluster_of;  // loop index -> cluster id
  std::vector<SiteSet> traces;  // per-cluster union of loop traces
};

inline ClusterSet build_clusters(std::span<const RwLoop> loops) {
  const int n = static_cast<int>(loops.size());
  std::vector<int> uf(static_cast<std::size_t>(n));
  std::iota(uf.begin(), uf.end(), 0);
  auto find = [&](int a) {
    while (uf[static_cast<std::size_t>(a)] != a) {
      uf[static_cast<std::size_t>(a)] =
          uf[static_cast<std::size_t>(uf[static_cast<std::size_t>(a)])];
      a = uf[static_cast<std::size_t>(a)];
    }
    return a;
  };
  auto unite = [&](int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) uf[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  };

  // Loops visiting a common site get unioned through the site's first owner.
  std::unordered_map<std::uint64_t, int> owner;
  for (int i = 0; i < n; ++i) {
    for (Site s : loops[static_cast<std::size_t>(i)].sites) {
      auto [it, fresh] = owner.try_emplace(pack_site(s), i);
      if (!fresh) unite(it->second, i);
    }
  }

  ClusterSet out;
  out.cluster_of.assign(static_cast<std::size_t>(n), -1);
  std::unordered_map<int, int> root_to_id;
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    auto [it, fresh] = root_to_id.try_emplace(r, static_cast<int>(out.clusters.size()));
    if (fresh) out.clusters.emplace_back();
    out.clusters[static_cast<std::size_t>(it->second)].push_back(i);
    out.cluster_of[static_cast<std::size_t>(i)] = it->second;
  }
  // Scanning loops in index order already yields clusters ordered by their
  // minimum member, and members in ascending order.
  out.traces.reserve(out.clusters.size());
  for (const auto& members : out.clusters) {
    std::vector<Site> sites;
    for (int i : members)
      for (Site s : loops[static_cast<std::size_t>(i)].sites) sites.push_back(s);
    out.traces.emplace_back(std::move(sites));
  }
  return out;
}

// An outermost cluster together with every loop inside its filling.
struct CompleteCluster {
  int core = -1;                  // outermost cluster id
  std::vector<int> member_loops;  // core loops plus nested loops, ascending
  SiteSet trace;                  // union of member traces
  SiteSet filling;                // filling of the core trace
};

// Fillings, outermost-cluster identification and complete-cluster assembly
// over one sample's ClusterSet.
class ClusterAnalysis {
 public:
  ClusterAnalysis(std::span<const RwLoop> loops, ClusterSet set)
      : loops_(loops), set_(std::move(set)) {
    fillings_.reserve(set_.clusters.size());
    for (const SiteSet& trace : set_.traces)
      fillings_.push_back(filling(trace, trace.bbox().expanded(1)));

    // A cluster is outermost iff its trace lies in no other cluster's
    // filling; one representative site decides (distinct clusters are
    // either disjoint from a filling or swallowed whole by it).
    const int k = static_cast<int>(set_.clusters.size());
    for (int i = 0; i < k; ++i) {
      const Site rep = set_.traces[static_cast<std::size_t>(i)].sites().front();
      bool contained = false;
      for (int j = 0; j < k && !contained; ++j) {
        if (j == i) continue;
        if (fillings_[static_cast<std::size_t>(j)].contains(rep)) contained = true;
      }
      if (!contained) outermost_.push_back(i);
    }
  }

  const ClusterSet& set() const { return set_; }
  const std::vector<SiteSet>& fillings() const { return fillings_; }
  const std::vector<int>& outermost() const { return outermost_; }
  std::span<const RwLoop> loops() const { return loops_; }

  // Attaches every loop whose trace lies inside the core's filling.
  CompleteCluster complete_cluster(int outermost_id) const {
    if (std::find(outermost_.begin(), outermost_.end(), outermost_id) ==
        outermost_.end())
      throw std::invalid_argument("complete_cluster: cluster is not outermost");
    const SiteSet& fill = fillings_[static_cast<std::size_t>(outermost_id)];

    CompleteCluster out;
    out.core = outermost_id;
    out.filling = fill;
    std::vector<Site> sites;
    for (int i = 0; i < static_cast<int>(loops_.size()); ++i) {
      const RwLoop& loop = loops_[static_cast<std::size_t>(i)];
      bool inside = fill.contains(loop.sites.front());
      if (inside)
        for (Site s : loop.sites)
          if (!fill.contains(s)) {
            inside = false;
            break;
          }
      if (inside) {
        out.member_loops.push_back(i);
        for (Site s : loop.sites) sites.push_back(s);
      }
    }
    out.trace = SiteSet(std::move(sites));
    return out;
  }

  // The unique outermost cluster whose filling contains the point, if any.
  std::optional<int> cluster_containing(Site point) const {
    for (int id : outermost_)
      if (fillings_[static_cast<std::size_t>(id)].contains(point)) return id;
    return std::nullopt;
  }

  // Loops of a complete cluster with a trace site on the outer vertex
  // boundary of its filling (the discrete boundary-touching set).
  std::vector<int> boundary_touching_loops(const CompleteCluster& cc) const {
    const SiteSet hull = hull_sites(cc.filling);
    std::vector<int> out;
    for (int i : cc.member_loops) {
      for (Site s : loops_[static_cast<std::size_t>(i)].sites) {
        if (hull.contains(s)) {
          out.push_back(i);
          break;
        }
      }
    }
    return out;
  }

 private:
  std::span<const RwLoop> loops_;
  ClusterSet set_;
  std::vector<SiteSet> fillings_;
  std::vector<int> outermost_;
};

}  // namespace loopsoup
