#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <deque>
#include <set>

#include "loopsoup/restriction.hpp"
#include "loopsoup/rng.hpp"
#include "loopsoup/topology.hpp"

using namespace loopsoup;

namespace {

// 3x3 ring of 8 sites around (1,1).
SiteSet ring3() {
  return SiteSet({{0, 0}, {1, 0}, {2, 0}, {0, 1}, {2, 1}, {0, 2}, {1, 2}, {2, 2}});
}

// Random 4-connected blob: trace of a lazy random walk.
SiteSet random_blob(std::uint64_t seed, int steps) {
  StreamRng rng(seed, StreamTag::generic);
  std::vector<Site> sites{{0, 0}};
  Site cur{0, 0};
  for (int i = 0; i < steps; ++i) {
    const Site d = kSteps[rng.next_below(4)];
    cur = Site{cur.x + d.x, cur.y + d.y};
    sites.push_back(cur);
  }
  return SiteSet(std::move(sites));
}

bool brute_connected(const std::vector<Site>& sites) {
  if (sites.empty()) return true;
  const SiteSet set(sites);
  std::set<std::uint64_t> seen{pack_site(set.sites().front())};
  std::deque<Site> queue{set.sites().front()};
  while (!queue.empty()) {
    const Site cur = queue.front();
    queue.pop_front();
    for (Site d : kSteps) {
      const Site t{cur.x + d.x, cur.y + d.y};
      if (set.contains(t) && !seen.count(pack_site(t))) {
        seen.insert(pack_site(t));
        queue.push_back(t);
      }
    }
  }
  return seen.size() == set.size();
}

}  // namespace

TEST_CASE("filling of a hollow ring captures the hole", "[topology]") {
  const SiteSet ring = ring3();
  const SiteSet filled = filling(ring);
  CHECK(filled.size() == 9);
  CHECK(filled.contains(Site{1, 1}));

  const SiteSet single({{5, 5}});
  CHECK(filling(single) == single);

  const SiteSet two({{0, 0}, {7, 3}});
  CHECK(filling(two) == two);
}

TEST_CASE("filling is idempotent and needs a margin", "[topology]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SiteSet blob = random_blob(seed, 60);
    const SiteSet once = filling(blob);
    CHECK(filling(once) == once);
    CHECK(once.size() >= blob.size());
  }
  const SiteSet s({{0, 0}});
  CHECK_THROWS_AS(filling(s, Box{0, 0, 0, 0}), std::invalid_argument);
}

TEST_CASE("encircles is filling membership", "[topology]") {
  const SiteSet ring = ring3();
  CHECK(encircles(ring, Site{1, 1}));   // the hole
  CHECK(encircles(ring, Site{0, 0}));   // on the trace itself
  CHECK_FALSE(encircles(ring, Site{5, 5}));
  CHECK_FALSE(encircles(ring, Site{3, 1}));
}

TEST_CASE("outer contour edge counts on hand shapes", "[topology]") {
  CHECK(outer_contour(SiteSet({{2, 3}})).edge_count() == 4);
  CHECK(outer_contour(SiteSet({{0, 0}, {1, 0}})).edge_count() == 6);
  const SiteSet square(
      {{0, 0}, {1, 0}, {2, 0}, {0, 1}, {1, 1}, {2, 1}, {0, 2}, {1, 2}, {2, 2}});
  CHECK(outer_contour(square).edge_count() == 12);
}

TEST_CASE("outer contour rejects non-fillings", "[topology]") {
  CHECK_THROWS_AS(outer_contour(ring3()), std::invalid_argument);  // has a hole
  CHECK_THROWS_AS(outer_contour(SiteSet({{0, 0}, {3, 3}})), std::invalid_argument);
  CHECK_THROWS_AS(outer_contour(SiteSet{}), std::invalid_argument);
}

TEST_CASE("contour area equals filling size on random blobs", "[topology]") {
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    const SiteSet filled = filling(random_blob(seed, 80));
    const Contour contour = outer_contour(filled);
    CHECK(contour.signed_area() == static_cast<long long>(filled.size()));
    // Each dual edge at most once.
    std::set<std::pair<std::uint64_t, std::uint64_t>> edges;
    for (std::size_t i = 0; i < contour.corners.size(); ++i) {
      const Site a = contour.corners[i];
      const Site b = contour.corners[(i + 1) % contour.corners.size()];
      CHECK(edges.insert({pack_site(a), pack_site(b)}).second);
    }
  }
}

TEST_CASE("fillings never carry a diagonal pinch", "[topology]") {
  // With a 4-connected complement, a diagonal touch would seal one of its
  // off-diagonal pockets into the filling, so sets equal to their filling
  // have no such corner. The contour tracer relies on this.
  for (std::uint64_t seed = 300; seed < 340; ++seed) {
    const SiteSet filled = filling(random_blob(seed, 90));
    for (Site s : filled) {
      const bool ne = filled.contains(Site{s.x + 1, s.y + 1});
      const bool n = filled.contains(Site{s.x, s.y + 1});
      const bool e = filled.contains(Site{s.x + 1, s.y});
      CHECK_FALSE((ne && !n && !e));
    }
    // And every contour corner is visited exactly once.
    const Contour contour = outer_contour(filled);
    std::set<std::uint64_t> seen;
    for (Site c : contour.corners) CHECK(seen.insert(pack_site(c)).second);
  }
}

TEST_CASE("hull sites of a filled blob touch the exterior", "[topology]") {
  const SiteSet filled = filling(random_blob(7, 100));
  const SiteSet hull = hull_sites(filled);
  CHECK_FALSE(hull.empty());
  for (Site s : hull) {
    bool exposed = false;
    for (Site d : kSteps)
      if (!filled.contains(Site{s.x + d.x, s.y + d.y})) exposed = true;
    CHECK(exposed);
  }
}

TEST_CASE("articulation sites on hand shapes", "[topology]") {
  const SiteSet path({{0, 0}, {1, 0}, {2, 0}});
  const SiteSet cuts = articulation_sites(path);
  REQUIRE(cuts.size() == 1);
  CHECK(cuts.contains(Site{1, 0}));

  const SiteSet block({{0, 0}, {1, 0}, {0, 1}, {1, 1}});
  CHECK(articulation_sites(block).empty());

  // Two 2x2 blocks joined through one site.
  const SiteSet joined({{0, 0}, {1, 0}, {0, 1}, {1, 1},
                        {2, 1},
                        {3, 1}, {4, 1}, {3, 2}, {4, 2}});
  const SiteSet joint = articulation_sites(joined);
  CHECK(joint.contains(Site{2, 1}));
}

TEST_CASE("articulation matches the remove-and-BFS oracle", "[topology]") {
  for (std::uint64_t seed = 200; seed < 260; ++seed) {
    SiteSet blob = random_blob(seed, 40);
    if (blob.size() > 60 || blob.size() < 3) continue;
    const SiteSet cuts = articulation_sites(blob);
    for (Site s : blob) {
      std::vector<Site> rest;
      for (Site t : blob)
        if (!(t == s)) rest.push_back(t);
      const bool disconnects = !brute_connected(rest);
      CHECK(cuts.contains(s) == disconnects);
    }
  }
}

TEST_CASE("subset connectivity over loops", "[topology]") {
  auto loop_at = [](std::vector<Site> pts) {
    RwLoop loop;
    loop.sites = std::move(pts);
    return loop;
  };
  std::vector<RwLoop> loops;
  loops.push_back(loop_at({{0, 0}, {1, 0}}));
  loops.push_back(loop_at({{1, 0}, {2, 0}}));   // shares (1,0) with 0
  loops.push_back(loop_at({{2, 0}, {3, 0}}));   // shares (2,0) with 1
  loops.push_back(loop_at({{10, 10}, {11, 10}}));

  const std::vector<int> singleton{0};
  CHECK(subset_connected(loops, singleton));
  const std::vector<int> chain{0, 1, 2};
  CHECK(subset_connected(loops, chain));
  const std::vector<int> split{0, 3};
  CHECK_FALSE(subset_connected(loops, split));
  const std::vector<int> ends{0, 2};  // linked only via the middle loop
  CHECK_FALSE(subset_connected(loops, ends));
  const std::vector<int> empty{};
  CHECK_THROWS_AS(subset_connected(loops, empty), std::invalid_argument);
}

TEST_CASE("pocket analysis finds separating sites", "[topology]") {
  const auto domain = LatticeDomain::half_plane_box(10, 10);
  // Single-thickness ring around (3,3): every ring site pinches.
  std::vector<Site> ring;
  for (int x = 2; x <= 4; ++x)
    for (int y = 2; y <= 4; ++y)
      if (x != 3 || y != 3) ring.push_back(Site{x, y});
  const auto thin = analyze_pocket(SiteSet(ring), Site{3, 3}, domain);
  CHECK(thin.encircled);
  // The four edge sites open the pocket; the diagonal corners do not.
  REQUIRE(thin.cut_sites.size() == 4);
  const SiteSet cuts(thin.cut_sites);
  for (Site s : {Site{3, 2}, Site{2, 3}, Site{4, 3}, Site{3, 4}})
    CHECK(cuts.contains(s));

  // Double-walled ring: no single site opens the pocket.
  std::vector<Site> thick;
  for (int x = 1; x <= 5; ++x)
    for (int y = 1; y <= 5; ++y)
      if (!(x == 3 && y == 3)) thick.push_back(Site{x, y});
  const auto solid = analyze_pocket(SiteSet(thick), Site{3, 3}, domain);
  CHECK(solid.encircled);
  CHECK(solid.cut_sites.empty());

  // Not enclosed at all.
  const auto open = analyze_pocket(SiteSet(ring), Site{8, 8}, domain);
  CHECK_FALSE(open.encircled);

  // The solid bottom wall counts: a bridge over z resting on the floor
  // encloses it without any sites below.
  std::vector<Site> bridge;
  for (int y = 0; y <= 2; ++y) bridge.push_back(Site{-1, y});
  for (int y = 0; y <= 2; ++y) bridge.push_back(Site{1, y});
  bridge.push_back(Site{0, 2});
  const auto arch = analyze_pocket(SiteSet(bridge), Site{0, 0}, domain);
  CHECK(arch.encircled);
  CHECK_FALSE(arch.cut_sites.empty());
}

TEST_CASE("single-loop contour articulation floor (recorded)", "[topology]") {
  // Length >= 100 loops conditioned to encircle the origin at R = 64: the
  // fraction with an articulation site on the contour is a qualitative
  // floor, recorded here alongside the assertion.
  const auto domain = LatticeDomain::disk(64);
  int with_cut = 0;
  const int wanted = 80;
  for (int i = 0; i < wanted; ++i) {
    const auto drawn = sample_pocket_loop(
        domain, Site{0, 0}, 100, 4096,
        detail::derive_seed(555, 0x666C6F6Full, static_cast<std::uint64_t>(i)),
        100000);
    REQUIRE(drawn.has_value());
    const SiteSet trace = drawn->loop.trace();
    const SiteSet filled = filling(trace);
    if (!articulation_sites(trace, filled).empty()) ++with_cut;
  }
  const double fraction = static_cast<double>(with_cut) / wanted;
  std::printf("single-loop contour-articulation fraction at R=64: %.3f (n=%d)\n",
              fraction, wanted);
  CHECK(fraction >= 0.05);
}
