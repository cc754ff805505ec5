#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace loopsoup {

struct Site {
  int x = 0;
  int y = 0;

  friend bool operator==(Site a, Site b) { return a.x == b.x && a.y == b.y; }
  friend bool operator!=(Site a, Site b) { return !(a == b); }
  // Row-major order (y, then x); used wherever a canonical site order matters.
  friend bool operator<(Site a, Site b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  }
};

inline std::uint64_t pack_site(Site s) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.x)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.y));
}

inline Site unpack_site(std::uint64_t p) {
  return Site{static_cast<int>(static_cast<std::uint32_t>(p >> 32)),
              static_cast<int>(static_cast<std::uint32_t>(p))};
}

struct SiteHash {
  std::size_t operator()(Site s) const {
    std::uint64_t z = pack_site(s) + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return static_cast<std::size_t>(z ^ (z >> 31));
  }
};

// Inclusive integer bounding box.
struct Box {
  int xmin = 0, ymin = 0, xmax = -1, ymax = -1;

  bool valid() const { return xmin <= xmax && ymin <= ymax; }
  int width() const { return xmax - xmin + 1; }
  int height() const { return ymax - ymin + 1; }
  long long area() const {
    return static_cast<long long>(width()) * height();
  }
  bool contains(Site s) const {
    return s.x >= xmin && s.x <= xmax && s.y >= ymin && s.y <= ymax;
  }
  Box expanded(int margin) const {
    return Box{xmin - margin, ymin - margin, xmax + margin, ymax + margin};
  }
  // True if |this| strictly contains b with at least `margin` free cells on
  // every side.
  bool strictly_contains(const Box& b, int margin = 1) const {
    return xmin <= b.xmin - margin && ymin <= b.ymin - margin &&
           xmax >= b.xmax + margin && ymax >= b.ymax + margin;
  }
  friend bool operator==(const Box& a, const Box& b) {
    return a.xmin == b.xmin && a.ymin == b.ymin && a.xmax == b.xmax &&
           a.ymax == b.ymax;
  }
};

// Step order is fixed to E,N,W,S everywhere.
inline constexpr std::array<Site, 4> kSteps = {
    Site{1, 0}, Site{0, 1}, Site{-1, 0}, Site{0, -1}};

struct NeighborList {
  std::array<Site, 4> sites;
  int count = 0;

  const Site* begin() const { return sites.data(); }
  const Site* end() const { return sites.data() + count; }
};

enum class DomainKind { disk, half_plane_box };

// Lattice domains: the closed disk x^2+y^2 <= R^2 and the half-plane box
// |x| <= W, 0 <= y <= H. Immutable after construction.
class LatticeDomain {
 public:
  static LatticeDomain disk(int radius) {
    if (radius < 8)
      throw std::invalid_argument("disk domain requires radius >= 8");
    LatticeDomain d;
    d.kind_ = DomainKind::disk;
    d.radius_ = radius;
    d.bounds_ = Box{-radius, -radius, radius, radius};
    return d;
  }

  static LatticeDomain half_plane_box(int width, int height) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("half_plane_box requires positive W, H");
    LatticeDomain d;
    d.kind_ = DomainKind::half_plane_box;
    d.width_ = width;
    d.height_ = height;
    d.bounds_ = Box{-width, 0, width, height};
    return d;
  }

  DomainKind kind() const { return kind_; }
  int radius() const { return radius_; }
  int width() const { return width_; }
  int height() const { return height_; }
  const Box& bounds() const { return bounds_; }

  bool contains(Site s) const {
    if (kind_ == DomainKind::disk) {
      return static_cast<long long>(s.x) * s.x +
                 static_cast<long long>(s.y) * s.y <=
             static_cast<long long>(radius_) * radius_;
    }
    return s.y >= 0 && s.y <= height_ && s.x >= -width_ && s.x <= width_;
  }

  // All domain sites in row-major order.
  std::vector<Site> sites() const {
    std::vector<Site> out;
    out.reserve(static_cast<std::size_t>(bounds_.area()));
    for (int y = bounds_.ymin; y <= bounds_.ymax; ++y)
      for (int x = bounds_.xmin; x <= bounds_.xmax; ++x)
        if (contains(Site{x, y})) out.push_back(Site{x, y});
    return out;
  }

  std::size_t site_count() const {
    std::size_t n = 0;
    for (int y = bounds_.ymin; y <= bounds_.ymax; ++y)
      for (int x = bounds_.xmin; x <= bounds_.xmax; ++x)
        if (contains(Site{x, y})) ++n;
    return n;
  }

  // In-domain nearest neighbors in E,N,W,S order.
  NeighborList neighbors(Site s) const {
    if (!contains(s))
      throw std::invalid_argument("neighbors: site outside domain");
    NeighborList out;
    for (Site d : kSteps) {
      Site t{s.x + d.x, s.y + d.y};
      if (contains(t)) out.sites[out.count++] = t;
    }
    return out;
  }

  // Boundary = sites with fewer than 4 in-domain neighbors.
  bool on_boundary(Site s) const { return neighbors(s).count < 4; }

  std::string describe() const {
    if (kind_ == DomainKind::disk) return "disk:" + std::to_string(radius_);
    return "box:" + std::to_string(width_) + "," + std::to_string(height_);
  }

  // Default-constructed domains are the minimal disk; real configurations
  // always come from the named factories.
  LatticeDomain() : bounds_{-8, -8, 8, 8} {}

 private:
  DomainKind kind_ = DomainKind::disk;
  int radius_ = 8;
  int width_ = 0;
  int height_ = 0;
  Box bounds_;
};

// The discrete half-disk D(a, eps): all domain sites at Euclidean distance
// strictly below eps from the boundary point a. Strict inequality makes
// nesting in eps exact.
inline std::vector<Site> half_disk_sites(const LatticeDomain& domain,
                                         Site center, double eps) {
  if (eps < 1.0)
    throw std::invalid_argument("half_disk_sites: eps must be >= 1");
  std::vector<Site> out;
  const int r = static_cast<int>(std::ceil(eps));
  for (int y = center.y - r; y <= center.y + r; ++y) {
    for (int x = center.x - r; x <= center.x + r; ++x) {
      Site s{x, y};
      if (!domain.contains(s)) continue;
      const double dx = x - center.x;
      const double dy = y - center.y;
      if (dx * dx + dy * dy < eps * eps) out.push_back(s);
    }
  }
  return out;
}

}  // namespace loopsoup
