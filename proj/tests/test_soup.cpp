#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "loopsoup/soup.hpp"
#include "loopsoup/stats.hpp"

using namespace loopsoup;

namespace {

SoupConfig disk_config(int radius, double c, std::uint64_t seed, int n_max = 0) {
  SoupConfig config{LatticeDomain::disk(radius)};
  config.c = c;
  config.seed = seed;
  config.n_max = n_max;
  return config;
}

// Per-cell kept counts for one length over deep-interior sites.
std::vector<int> interior_counts(const LoopSoupSample& sample, int length,
                                 int margin) {
  const auto& domain = sample.config.domain;
  std::map<std::uint64_t, int> by_root;
  for (const RwLoop& loop : sample.loops)
    if (loop.length() == length) by_root[pack_site(loop.root())] += 1;
  std::vector<int> counts;
  const int r = domain.radius() - margin;
  for (Site s : domain.sites()) {
    if (static_cast<long long>(s.x) * s.x + static_cast<long long>(s.y) * s.y >
        static_cast<long long>(r) * r)
      continue;
    const auto it = by_root.find(pack_site(s));
    counts.push_back(it == by_root.end() ? 0 : it->second);
  }
  return counts;
}

}  // namespace

TEST_CASE("soup config validation", "[soup]") {
  auto config = disk_config(8, 1.0, 1);
  config.cutoff = 3;
  CHECK_THROWS_AS(sample_loop_soup(config), std::invalid_argument);
  config.cutoff = 4;
  config.n_max = 5;
  CHECK_THROWS_AS(sample_loop_soup(config), std::invalid_argument);
  config.n_max = 2;  // below cutoff
  CHECK_THROWS_AS(sample_loop_soup(config), std::invalid_argument);
  config.n_max = 0;
  config.c = -0.5;
  CHECK_THROWS_AS(sample_loop_soup(config), std::invalid_argument);
}

TEST_CASE("zero intensity gives the empty soup", "[soup]") {
  const auto sample = sample_loop_soup(disk_config(8, 0.0, 42));
  CHECK(sample.loops.empty());
}

TEST_CASE("sampled loops are closed, in range and inside the domain", "[soup]") {
  const auto sample = sample_loop_soup(disk_config(12, 1.2, 9, 64));
  CHECK_FALSE(sample.loops.empty());
  for (const RwLoop& loop : sample.loops) {
    CHECK(loop.closed());
    CHECK(loop.length() >= 4);
    CHECK(loop.length() <= 64);
    for (Site s : loop.sites) CHECK(sample.config.domain.contains(s));
  }
  // Thinning bookkeeping: kept never exceeds drawn, and near the boundary
  // some draws must have been rejected at this size.
  long long drawn = 0, kept = 0;
  for (const LengthStats& s : sample.per_length) {
    CHECK(s.kept <= s.drawn);
    drawn += s.drawn;
    kept += s.kept;
  }
  CHECK(kept == static_cast<long long>(sample.loops.size()));
  CHECK(drawn > kept);
}

TEST_CASE("identical configs give identical samples", "[soup]") {
  const auto a = sample_loop_soup(disk_config(10, 1.0, 777, 128));
  const auto b = sample_loop_soup(disk_config(10, 1.0, 777, 128));
  REQUIRE(a.loops.size() == b.loops.size());
  for (std::size_t i = 0; i < a.loops.size(); ++i)
    CHECK(a.loops[i].sites == b.loops[i].sites);
  const auto c = sample_loop_soup(disk_config(10, 1.0, 778, 128));
  CHECK(a.loops.size() != c.loops.size());  // different seed, different soup
}

TEST_CASE("per-cell means match c p_2n / 2n deep inside", "[soup]") {
  // c=1, cutoff 2: mean length-2 count per interior cell is 1/8 and
  // length-4 is 9/256.
  std::vector<int> len2, len4;
  for (std::uint64_t seed = 0; seed < 24; ++seed) {
    auto config = disk_config(16, 1.0, 1000 + seed, 64);
    config.cutoff = 2;
    const auto sample = sample_loop_soup(config);
    for (int c : interior_counts(sample, 2, 3)) len2.push_back(c);
    for (int c : interior_counts(sample, 4, 3)) len4.push_back(c);
  }
  REQUIRE(len2.size() > 10000);
  auto z_for = [](const std::vector<int>& counts, double mean) {
    double total = 0;
    for (int c : counts) total += c;
    const double n = static_cast<double>(counts.size());
    return (total - n * mean) / std::sqrt(n * mean);
  };
  CHECK(std::fabs(z_for(len2, 1.0 / 8.0)) < 3.0);
  CHECK(std::fabs(z_for(len4, 9.0 / 256.0)) < 3.0);
}

TEST_CASE("per-cell counts are Poisson: dispersion and gof", "[soup]") {
  std::vector<int> len2;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto config = disk_config(16, 1.0, 2000 + seed, 64);
    config.cutoff = 2;
    const auto sample = sample_loop_soup(config);
    for (int c : interior_counts(sample, 2, 3)) len2.push_back(c);
  }
  const double n = static_cast<double>(len2.size());
  double mean = 0;
  for (int c : len2) mean += c;
  mean /= n;
  double var = 0;
  for (int c : len2) var += (c - mean) * (c - mean);
  var /= (n - 1);
  const double dispersion = var / mean;
  CHECK(dispersion > 0.9);
  CHECK(dispersion < 1.1);

  const auto gof = poisson_gof(len2, 1.0 / 8.0);
  CHECK_FALSE(gof.flagged);
  CHECK(gof.p_value > 0.01);
}

TEST_CASE("thinning consistency: soups superpose in intensity", "[soup]") {
  // Per-cell counts of an (0.4 + 0.6) superposition against a c=1 soup.
  std::vector<int> merged, direct;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    auto ca = disk_config(16, 0.4, 3000 + seed, 64);
    auto cb = disk_config(16, 0.6, 4000 + seed, 64);
    auto cc = disk_config(16, 1.0, 5000 + seed, 64);
    ca.cutoff = cb.cutoff = cc.cutoff = 2;
    const auto sa = sample_loop_soup(ca);
    const auto sb = sample_loop_soup(cb);
    const auto sc = sample_loop_soup(cc);
    const auto counts_a = interior_counts(sa, 2, 3);
    const auto counts_b = interior_counts(sb, 2, 3);
    for (std::size_t i = 0; i < counts_a.size(); ++i)
      merged.push_back(counts_a[i] + counts_b[i]);
    for (int c : interior_counts(sc, 2, 3)) direct.push_back(c);
  }
  // Two-sample homogeneity chi-square over count bins {0, 1, >=2}.
  auto bins = [](const std::vector<int>& v) {
    std::array<double, 3> b{0, 0, 0};
    for (int c : v) b[static_cast<std::size_t>(std::min(c, 2))] += 1;
    return b;
  };
  const auto b1 = bins(merged);
  const auto b2 = bins(direct);
  const double n1 = static_cast<double>(merged.size());
  const double n2 = static_cast<double>(direct.size());
  double stat = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double pooled = (b1[k] + b2[k]) / (n1 + n2);
    REQUIRE(pooled * n1 >= 5.0);
    stat += (b1[k] - n1 * pooled) * (b1[k] - n1 * pooled) / (n1 * pooled);
    stat += (b2[k] - n2 * pooled) * (b2[k] - n2 * pooled) / (n2 * pooled);
  }
  CHECK(chi2_sf(stat, 2) > 0.01);
}

TEST_CASE("monotone domain restriction on nested boxes", "[soup]") {
  // Loops of the big-box soup lying inside the small box have the same
  // cell laws as the small-box soup.
  const auto small_domain = LatticeDomain::half_plane_box(6, 6);
  long long inner_from_big = 0, direct_small = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SoupConfig big{LatticeDomain::half_plane_box(12, 12)};
    big.c = 1.0;
    big.seed = 6000 + seed;
    big.n_max = 64;
    SoupConfig small{small_domain};
    small.c = 1.0;
    small.seed = 7000 + seed;
    small.n_max = 64;
    const auto sb = sample_loop_soup(big);
    const auto ss = sample_loop_soup(small);
    for (const RwLoop& loop : sb.loops) {
      bool inside = true;
      for (Site s : loop.sites)
        if (!small_domain.contains(s)) {
          inside = false;
          break;
        }
      if (inside) ++inner_from_big;
    }
    direct_small += static_cast<long long>(ss.loops.size());
  }
  const double z = (static_cast<double>(inner_from_big) - direct_small) /
                   std::sqrt(static_cast<double>(inner_from_big + direct_small));
  CHECK(std::fabs(z) < 3.0);
}

TEST_CASE("counts in disjoint cells are independent", "[soup]") {
  // Covariance of two distant length-4 cells over seeds, within 3 SE of 0.
  std::vector<double> xs, ys;
  for (std::uint64_t seed = 0; seed < 1200; ++seed) {
    SoupConfig config{LatticeDomain::half_plane_box(6, 6)};
    config.c = 2.0;
    config.seed = 9000 + seed;
    config.n_max = 16;
    const auto sample = sample_loop_soup(config);
    int a = 0, b = 0;
    for (const RwLoop& loop : sample.loops) {
      if (loop.length() != 4) continue;
      if (loop.root() == Site{-3, 3}) ++a;
      if (loop.root() == Site{3, 3}) ++b;
    }
    xs.push_back(a);
    ys.push_back(b);
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double cov = 0, var_of_cov = 0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    cov += (xs[i] - mx) * (ys[i] - my);
  cov /= (n - 1);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = (xs[i] - mx) * (ys[i] - my) - cov;
    var_of_cov += d * d;
  }
  var_of_cov /= (n - 1) * n;
  CHECK(std::fabs(cov) < 3.0 * std::sqrt(var_of_cov));
}

TEST_CASE("truncation tail mass is reported and shrinks with n_max", "[soup]") {
  const auto a = sample_loop_soup(disk_config(8, 1.0, 1, 32));
  const auto b = sample_loop_soup(disk_config(8, 1.0, 1, 128));
  CHECK(a.truncation_tail_mass > 0.0);
  CHECK(b.truncation_tail_mass > 0.0);
  CHECK(b.truncation_tail_mass < a.truncation_tail_mass);
  // Rough size: c * sum_{2n>n_max} p_{2n}/(2n) ~ c/(pi n_max).
  CHECK(a.truncation_tail_mass ==
        Catch::Approx(1.0 / (M_PI * 32)).epsilon(0.25));
}
