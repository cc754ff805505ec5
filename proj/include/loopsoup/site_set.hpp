#pragma once

#include <algorithm>
#include <unordered_set>
#include <vector>

#include "loopsoup/geometry.hpp"

namespace loopsoup {

// A finite set of lattice sites with O(1) membership, canonical (row-major)
// iteration order and a cached bounding box.
class SiteSet {
 public:
  SiteSet() = default;

  explicit SiteSet(std::vector<Site> sites) {
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    sites_ = std::move(sites);
    index_.reserve(sites_.size() * 2);
    for (Site s : sites_) {
      index_.insert(pack_site(s));
      grow_box(s);
    }
  }

  bool contains(Site s) const { return index_.count(pack_site(s)) > 0; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  const std::vector<Site>& sites() const { return sites_; }
  auto begin() const { return sites_.begin(); }
  auto end() const { return sites_.end(); }
  const Box& bbox() const { return bbox_; }

  friend bool operator==(const SiteSet& a, const SiteSet& b) {
    return a.sites_ == b.sites_;
  }

 private:
  void grow_box(Site s) {
    if (!bbox_.valid()) {
      bbox_ = Box{s.x, s.y, s.x, s.y};
    } else {
      bbox_.xmin = std::min(bbox_.xmin, s.x);
      bbox_.ymin = std::min(bbox_.ymin, s.y);
      bbox_.xmax = std::max(bbox_.xmax, s.x);
      bbox_.ymax = std::max(bbox_.ymax, s.y);
    }
  }

  std::vector<Site> sites_;
  std::unordered_set<std::uint64_t> index_;
  Box bbox_;
};

// Dense 0/1 grid over a box; the workhorse behind flood fills and contour
// tracing. Out-of-box queries read as 0.
class Bitmap {
 public:
  explicit Bitmap(Box box) : box_(box) {
    cells_.assign(static_cast<std::size_t>(box.area()), 0);
  }

  const Box& box() const { return box_; }

  bool get(Site s) const {
    if (!box_.contains(s)) return false;
    return cells_[idx(s)] != 0;
  }
  void set(Site s, bool v = true) { cells_[idx(s)] = v ? 1 : 0; }

  std::size_t idx(Site s) const {
    return static_cast<std::size_t>(s.y - box_.ymin) * box_.width() +
           (s.x - box_.xmin);
  }

  std::vector<Site> to_sites() const {
    std::vector<Site> out;
    for (int y = box_.ymin; y <= box_.ymax; ++y)
      for (int x = box_.xmin; x <= box_.xmax; ++x)
        if (cells_[idx(Site{x, y})]) out.push_back(Site{x, y});
    return out;
  }

 private:
  Box box_;
  std::vector<std::uint8_t> cells_;
};

inline Bitmap to_bitmap(const SiteSet& s, Box box) {
  Bitmap b(box);
  for (Site p : s)
    if (box.contains(p)) b.set(p);
  return b;
}

}  // namespace loopsoup
