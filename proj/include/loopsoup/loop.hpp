#pragma once

#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "loopsoup/geometry.hpp"
#include "loopsoup/site_set.hpp"

namespace loopsoup {

// A closed nearest-neighbor walk of even length 2n. sites[0] is the sampled
// root; it is kept for count tests but has no meaning for cluster semantics.
// sites.size() == 2n, consecutive sites (cyclically) are lattice neighbors.
struct RwLoop {
  std::vector<Site> sites;

  int length() const { return static_cast<int>(sites.size()); }
  Site root() const { return sites.front(); }

  // Distinct sites visited.
  SiteSet trace() const { return SiteSet(sites); }

  bool closed() const {
    if (sites.size() < 2 || sites.size() % 2 != 0) return false;
    for (std::size_t i = 0; i < sites.size(); ++i) {
      const Site a = sites[i];
      const Site b = sites[(i + 1) % sites.size()];
      if (std::abs(a.x - b.x) + std::abs(a.y - b.y) != 1) return false;
    }
    return true;
  }
};

}  // namespace loopsoup
