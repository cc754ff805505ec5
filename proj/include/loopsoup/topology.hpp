#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "loopsoup/geometry.hpp"
#include "loopsoup/loop.hpp"
#include "loopsoup/site_set.hpp"

namespace loopsoup {

// ---------------------------------------------------------------------------
// Fillings

namespace detail {

// Marks the 4-connected exterior of `occupied` reachable from the ambient
// border. Returns a bitmap over the same box: 1 = exterior.
inline Bitmap exterior_fill(const Bitmap& occupied) {
  const Box box = occupied.box();
  Bitmap ext(box);
  std::deque<Site> queue;
  auto push = [&](Site s) {
    if (!box.contains(s) || occupied.get(s) || ext.get(s)) return;
    ext.set(s);
    queue.push_back(s);
  };
  for (int x = box.xmin; x <= box.xmax; ++x) {
    push(Site{x, box.ymin});
    push(Site{x, box.ymax});
  }
  for (int y = box.ymin; y <= box.ymax; ++y) {
    push(Site{box.xmin, y});
    push(Site{box.xmax, y});
  }
  while (!queue.empty()) {
    const Site s = queue.front();
    queue.pop_front();
    for (Site d : kSteps) push(Site{s.x + d.x, s.y + d.y});
  }
  return ext;
}

}  // namespace detail

// F(K): ambient box minus the unbounded (border-reachable) component of the
// complement. The ambient box must strictly contain K's bounding box with a
// margin of at least one site.
inline SiteSet filling(const SiteSet& k, Box ambient) {
  if (k.empty()) return k;
  if (!ambient.strictly_contains(k.bbox(), 1))
    throw std::invalid_argument(
        "filling: ambient box must strictly contain the site set (margin >= 1)");
  const Bitmap occupied = to_bitmap(k, ambient);
  const Bitmap ext = detail::exterior_fill(occupied);
  std::vector<Site> filled;
  for (int y = ambient.ymin; y <= ambient.ymax; ++y)
    for (int x = ambient.xmin; x <= ambient.xmax; ++x)
      if (!ext.get(Site{x, y})) filled.push_back(Site{x, y});
  return SiteSet(std::move(filled));
}

// Filling with the default ambient (bounding box padded by one).
inline SiteSet filling(const SiteSet& k) {
  if (k.empty()) return k;
  return filling(k, k.bbox().expanded(1));
}

inline bool encircles(const SiteSet& k, Site z) {
  if (k.empty()) return false;
  if (!k.bbox().contains(z)) return false;
  if (k.contains(z)) return true;
  const Box ambient = k.bbox().expanded(1);
  const Bitmap occupied = to_bitmap(k, ambient);
  const Bitmap ext = detail::exterior_fill(occupied);
  return !ext.get(z);
}

// Filled sites adjacent to the exterior; for a set equal to its filling these
// are exactly the sites incident to the outer contour.
inline SiteSet hull_sites(const SiteSet& filled) {
  std::vector<Site> hull;
  for (Site s : filled) {
    for (Site d : kSteps) {
      if (!filled.contains(Site{s.x + d.x, s.y + d.y})) {
        hull.push_back(s);
        break;
      }
    }
  }
  return SiteSet(std::move(hull));
}

// ---------------------------------------------------------------------------
// Outer contour

// Closed cycle of dual-lattice corners, counterclockwise, separating the
// filled set from the unbounded exterior. corners[i] -> corners[i+1] (cyclic)
// are the dual edges; each edge appears at most once.
struct Contour {
  std::vector<Site> corners;

  std::size_t edge_count() const { return corners.size(); }

  // Signed shoelace area of the traced polygon; equals |filling| when the
  // trace is counterclockwise.
  long long signed_area() const {
    long long a = 0;
    const std::size_t n = corners.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Site p = corners[i];
      const Site q = corners[(i + 1) % n];
      a += static_cast<long long>(p.x) * q.y - static_cast<long long>(q.x) * p.y;
    }
    return a / 2;
  }
};

namespace detail {

inline bool sites_connected(const SiteSet& s) {
  if (s.empty()) return true;
  const Bitmap b = to_bitmap(s, s.bbox().expanded(1));
  Bitmap seen(b.box());
  std::deque<Site> queue{s.sites().front()};
  seen.set(queue.front());
  std::size_t n = 1;
  while (!queue.empty()) {
    const Site cur = queue.front();
    queue.pop_front();
    for (Site d : kSteps) {
      const Site t{cur.x + d.x, cur.y + d.y};
      if (b.get(t) && !seen.get(t)) {
        seen.set(t);
        ++n;
        queue.push_back(t);
      }
    }
  }
  return n == s.size();
}

}  // namespace detail

// Traces the outer boundary of a filled, 4-connected site set. Walks dual
// edges keeping the region on the left (counterclockwise); at a diagonal
// pinch the trace turns left, so diagonally-touching cells stay separated,
// matching the 4-connectivity convention.
inline Contour outer_contour(const SiteSet& filled) {
  if (filled.empty())
    throw std::invalid_argument("outer_contour: empty site set");
  if (!detail::sites_connected(filled))
    throw std::invalid_argument("outer_contour: site set is not 4-connected");
  if (!(filling(filled) == filled))
    throw std::invalid_argument("outer_contour: site set must equal its filling");

  const Site c0 = filled.sites().front();  // row-major minimum
  const Site start{c0.x, c0.y};            // its bottom-left corner
  int dir = 0;                             // 0=E,1=N,2=W,3=S

  Contour contour;
  Site p = start;
  do {
    contour.corners.push_back(p);
    const Site dv = kSteps[static_cast<std::size_t>(dir)];
    const Site lv = kSteps[static_cast<std::size_t>((dir + 1) % 4)];
    p = Site{p.x + dv.x, p.y + dv.y};
    // Cells ahead of the new corner, relative to the travel direction.
    const Site fl_cell{p.x + (dv.x + lv.x - 1) / 2, p.y + (dv.y + lv.y - 1) / 2};
    const Site fr_cell{fl_cell.x - lv.x, fl_cell.y - lv.y};
    if (!filled.contains(fl_cell)) {
      dir = (dir + 1) % 4;  // left turn (also taken at diagonal pinches)
    } else if (filled.contains(fr_cell)) {
      dir = (dir + 3) % 4;  // right turn into an inner corner
    }
  } while (!(p == start && dir == 0));
  return contour;
}

// ---------------------------------------------------------------------------
// Graph queries on site sets

// Sites whose removal disconnects the 4-adjacency graph of the set
// (iterative Tarjan lowpoint computation, per component).
inline SiteSet articulation_sites(const SiteSet& s) {
  const std::size_t n = s.size();
  std::unordered_map<std::uint64_t, int> id;
  id.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i)
    id[pack_site(s.sites()[i])] = static_cast<int>(i);

  std::vector<int> disc(n, -1), low(n, 0), parent(n, -1), child_count(n, 0);
  std::vector<bool> is_cut(n, false);
  int timer = 0;

  struct Frame {
    int v;
    int next_dir;
  };

  for (std::size_t root = 0; root < n; ++root) {
    if (disc[root] != -1) continue;
    std::vector<Frame> stack{{static_cast<int>(root), 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next_dir < 4) {
        const Site v = s.sites()[static_cast<std::size_t>(f.v)];
        const Site d = kSteps[static_cast<std::size_t>(f.next_dir++)];
        const auto it = id.find(pack_site(Site{v.x + d.x, v.y + d.y}));
        if (it == id.end()) continue;
        const int w = it->second;
        if (disc[w] == -1) {
          parent[w] = f.v;
          ++child_count[f.v];
          disc[w] = low[w] = timer++;
          stack.push_back({w, 0});
        } else if (w != parent[f.v]) {
          low[f.v] = std::min(low[f.v], disc[w]);
        }
      } else {
        const int v = f.v;
        stack.pop_back();
        if (!stack.empty()) {
          const int p = stack.back().v;
          low[p] = std::min(low[p], low[v]);
          if (parent[v] == p && low[v] >= disc[p] &&
              parent[p] != -1)
            is_cut[p] = true;
        }
      }
    }
    if (child_count[root] >= 2) is_cut[root] = true;
  }

  std::vector<Site> cuts;
  for (std::size_t i = 0; i < n; ++i)
    if (is_cut[i]) cuts.push_back(s.sites()[i]);
  return SiteSet(std::move(cuts));
}

// Articulation sites restricted to contour-incident sites of the set's
// filling.
inline SiteSet articulation_sites(const SiteSet& s, const SiteSet& filled) {
  const SiteSet hull = hull_sites(filled);
  std::vector<Site> cuts;
  for (Site a : articulation_sites(s))
    if (hull.contains(a)) cuts.push_back(a);
  return SiteSet(std::move(cuts));
}

// True if the given loops form a single cluster under the shared-site
// relation.
inline bool subset_connected(std::span<const RwLoop> loops,
                             std::span<const int> subset) {
  if (subset.empty())
    throw std::invalid_argument("subset_connected: empty subset");
  if (subset.size() == 1) return true;

  std::vector<int> uf(subset.size());
  for (std::size_t i = 0; i < uf.size(); ++i) uf[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int a) {
    while (uf[static_cast<std::size_t>(a)] != a) {
      uf[static_cast<std::size_t>(a)] =
          uf[static_cast<std::size_t>(uf[static_cast<std::size_t>(a)])];
      a = uf[static_cast<std::size_t>(a)];
    }
    return a;
  };

  std::unordered_map<std::uint64_t, int> first_owner;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    const RwLoop& loop = loops[static_cast<std::size_t>(subset[i])];
    for (Site site : loop.sites) {
      auto [it, fresh] = first_owner.try_emplace(pack_site(site), static_cast<int>(i));
      if (!fresh) {
        const int a = find(it->second);
        const int b = find(static_cast<int>(i));
        if (a != b) uf[static_cast<std::size_t>(b)] = a;
      }
    }
  }
  const int rep = find(0);
  for (std::size_t i = 1; i < subset.size(); ++i)
    if (find(static_cast<int>(i)) != rep) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Pocket separation (the discrete "local cut point with respect to z")

// Complement connectivity is taken inside the domain. For the half-plane box
// the bottom edge (the real boundary) is solid; escaping means reaching the
// artificial truncation edges (|x| = W or y = H). For the disk every
// boundary site is an escape site.
struct PocketAnalysis {
  bool encircled = false;  // z sits in a bounded complement pocket
  std::vector<Site> cut_sites;  // K-sites adjacent to both pocket and escape
};

inline PocketAnalysis analyze_pocket(const SiteSet& k, Site z,
                                     const LatticeDomain& domain) {
  PocketAnalysis result;
  if (!domain.contains(z) || k.contains(z)) return result;

  auto is_escape = [&](Site s) {
    if (domain.kind() == DomainKind::half_plane_box)
      return s.y == domain.height() || s.x == -domain.width() ||
             s.x == domain.width();
    return domain.on_boundary(s);
  };

  const Box box = domain.bounds();
  Bitmap pocket(box), escape(box);

  // Pocket: complement component of z.
  {
    std::deque<Site> queue{z};
    pocket.set(z);
    bool escaped = false;
    while (!queue.empty()) {
      const Site cur = queue.front();
      queue.pop_front();
      if (is_escape(cur)) escaped = true;
      for (Site d : kSteps) {
        const Site t{cur.x + d.x, cur.y + d.y};
        if (!domain.contains(t) || k.contains(t) || pocket.get(t)) continue;
        pocket.set(t);
        queue.push_back(t);
      }
    }
    if (escaped) return result;
  }
  result.encircled = true;

  // Escape component of the complement.
  {
    std::deque<Site> queue;
    auto push = [&](Site s) {
      if (!domain.contains(s) || k.contains(s) || escape.get(s)) return;
      escape.set(s);
      queue.push_back(s);
    };
    for (Site s : domain.sites())
      if (is_escape(s)) push(s);
    while (!queue.empty()) {
      const Site cur = queue.front();
      queue.pop_front();
      for (Site d : kSteps) push(Site{cur.x + d.x, cur.y + d.y});
    }
  }

  // A removal merges pocket and escape exactly when the removed site touches
  // both.
  for (Site s : k) {
    bool touch_pocket = false, touch_escape = false;
    for (Site d : kSteps) {
      const Site t{s.x + d.x, s.y + d.y};
      if (pocket.get(t)) touch_pocket = true;
      if (escape.get(t)) touch_escape = true;
    }
    if (touch_pocket && touch_escape) result.cut_sites.push_back(s);
  }
  return result;
}

// Sites of the region whose entire L1 ball of the given radius stays inside
// the region (graph distance to the complement exceeds `margin`).
inline SiteSet erode(const SiteSet& region, int margin) {
  std::vector<Site> out;
  for (Site s : region) {
    bool deep = true;
    for (int dx = -margin; dx <= margin && deep; ++dx)
      for (int dy = -(margin - std::abs(dx)); dy <= margin - std::abs(dx); ++dy)
        if (!region.contains(Site{s.x + dx, s.y + dy})) {
          deep = false;
          break;
        }
    if (deep) out.push_back(s);
  }
  return SiteSet(std::move(out));
}

// ---------------------------------------------------------------------------
// Diameters

inline double euclidean_diameter(const SiteSet& s) {
  if (s.size() < 2) return 0.0;
  // Convex hull (monotone chain) then pairwise over hull vertices.
  std::vector<Site> pts = s.sites();
  std::sort(pts.begin(), pts.end(), [](Site a, Site b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  auto cross = [](Site o, Site a, Site b) {
    return static_cast<long long>(a.x - o.x) * (b.y - o.y) -
           static_cast<long long>(a.y - o.y) * (b.x - o.x);
  };
  std::vector<Site> hull(2 * pts.size());
  std::size_t h = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (h >= 2 && cross(hull[h - 2], hull[h - 1], pts[i]) <= 0) --h;
    hull[h++] = pts[i];
  }
  const std::size_t lower = h + 1;
  for (std::size_t i = pts.size() - 1; i-- > 0;) {
    while (h >= lower && cross(hull[h - 2], hull[h - 1], pts[i]) <= 0) --h;
    hull[h++] = pts[i];
  }
  hull.resize(h > 0 ? h - 1 : 0);
  double best = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j) {
      const double dx = hull[i].x - hull[j].x;
      const double dy = hull[i].y - hull[j].y;
      best = std::max(best, dx * dx + dy * dy);
    }
  return std::sqrt(best);
}

inline int linf_diameter(const SiteSet& s) {
  if (s.empty()) return 0;
  return std::max(s.bbox().width(), s.bbox().height()) - 1;
}

}  // namespace loopsoup
