#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopsoup/rng.hpp"

namespace loopsoup {

// ---------------------------------------------------------------------------
// Distribution helpers

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Inverse standard normal CDF (Acklam's rational approximation polished with
// one Halley step; |error| < 1e-15 over (0,1)).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement against the exact CDF.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x -= u / (1.0 + x * u / 2.0);
  return x;
}

namespace detail {

// Regularized lower incomplete gamma P(a, x): series for x < a+1,
// continued fraction otherwise.
inline double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  // Lentz continued fraction for Q(a, x).
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-15) break;
  }
  const double q = std::exp(-x + a * std::log(x) - gln) * h;
  return 1.0 - q;
}

}  // namespace detail

// Upper tail of the chi-square distribution.
inline double chi2_sf(double x, int dof) {
  if (dof <= 0) throw std::invalid_argument("chi2_sf: dof must be positive");
  if (x <= 0.0) return 1.0;
  return 1.0 - detail::gamma_p(dof / 2.0, x / 2.0);
}

// ---------------------------------------------------------------------------
// Reports

struct EstimatorReport {
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  long long n = 0;
  std::string method;  // wilson | normal | delta
  std::uint64_t seed_hash = 0;
};

struct GofReport {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::string binning;
  bool flagged = false;
  std::string flag_reason;
};

// Wilson score interval for a binomial proportion.
inline EstimatorReport wilson_interval(long long successes, long long n,
                                       double level = 0.95,
                                       std::uint64_t seed_hash = 0) {
  if (n < 1 || successes < 0 || successes > n)
    throw std::invalid_argument("wilson_interval: need 0 <= successes <= n, n >= 1");
  const double z = normal_quantile(0.5 + level / 2.0);
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  EstimatorReport r;
  r.estimate = p;
  r.ci_low = std::max(0.0, std::min(center - half, p));
  r.ci_high = std::min(1.0, std::max(center + half, p));
  r.n = n;
  r.method = "wilson";
  r.seed_hash = seed_hash;
  return r;
}

// Chi-square goodness of fit of integer counts against Poisson(mean).
// Contiguous value bins are merged left to right until each expected count
// is at least 5; the remaining tail joins the last bin.
inline GofReport poisson_gof(const std::vector<int>& counts, double mean) {
  if (mean <= 0.0) throw std::invalid_argument("poisson_gof: mean must be > 0");
  for (int c : counts)
    if (c < 0) throw std::invalid_argument("poisson_gof: negative count");
  GofReport report;
  const double n = static_cast<double>(counts.size());
  const int k_max = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());

  // pmf and observed tally per value.
  std::vector<double> pmf;
  double p = std::exp(-mean);
  double cum = 0.0;
  for (int k = 0;; ++k) {
    pmf.push_back(p);
    cum += p;
    if (k >= k_max && n * (1.0 - cum) < 5.0) break;
    if (k > 100000) break;
    p *= mean / (k + 1);
  }
  std::vector<double> observed(pmf.size() + 1, 0.0);
  for (int c : counts)
    observed[static_cast<std::size_t>(std::min<std::size_t>(
        static_cast<std::size_t>(c), pmf.size()))] += 1.0;
  std::vector<double> expected(pmf.size() + 1, 0.0);
  for (std::size_t k = 0; k < pmf.size(); ++k) expected[k] = n * pmf[k];
  expected.back() = n * std::max(0.0, 1.0 - cum);

  // Merge adjacent bins until expected >= 5.
  std::vector<double> obs_bins, exp_bins;
  double eo = 0.0, ee = 0.0;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    eo += observed[k];
    ee += expected[k];
    if (ee >= 5.0) {
      obs_bins.push_back(eo);
      exp_bins.push_back(ee);
      eo = ee = 0.0;
    }
  }
  if (ee > 0.0 || eo > 0.0) {
    if (!exp_bins.empty()) {
      obs_bins.back() += eo;
      exp_bins.back() += ee;
    } else {
      obs_bins.push_back(eo);
      exp_bins.push_back(ee);
    }
  }
  report.binning = std::to_string(obs_bins.size()) + " bins, expected >= 5";
  if (obs_bins.size() < 2) {
    report.flagged = true;
    report.flag_reason = "insufficient-data";
    report.p_value = 1.0;
    return report;
  }
  double stat = 0.0;
  for (std::size_t k = 0; k < obs_bins.size(); ++k) {
    const double d = obs_bins[k] - exp_bins[k];
    stat += d * d / exp_bins[k];
  }
  report.statistic = stat;
  report.dof = static_cast<int>(obs_bins.size()) - 1;
  report.p_value = chi2_sf(stat, report.dof);
  return report;
}

namespace detail {

inline std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;  // degenerate: zero by convention
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace detail

// Spearman rank correlation with a permutation p-value for the one-sided
// alternative "ys decreasing in xs". Ties get average ranks.
inline GofReport spearman_monotone(const std::vector<double>& xs,
                                   const std::vector<double>& ys,
                                   int permutations,
                                   std::uint64_t seed = 0x73706561726D616Eull) {
  if (xs.size() != ys.size() || xs.size() < 4)
    throw std::invalid_argument("spearman_monotone: need >= 4 paired points");
  if (permutations < 1)
    throw std::invalid_argument("spearman_monotone: permutations must be >= 1");
  const std::vector<double> rx = detail::average_ranks(xs);
  std::vector<double> ry = detail::average_ranks(ys);
  const double rho = detail::pearson(rx, ry);

  long long at_most = 0;
  StreamRng rng(seed, StreamTag::permutation);
  std::vector<double> perm = ry;
  for (int i = 0; i < permutations; ++i) {
    rng.shuffle(perm);
    if (detail::pearson(rx, perm) <= rho) ++at_most;
  }
  GofReport report;
  report.statistic = rho;
  report.dof = static_cast<int>(xs.size()) - 2;
  report.p_value = static_cast<double>(at_most + 1) / (permutations + 1);
  report.binning = "permutation, one-sided decreasing";
  return report;
}

// Pearson correlation with the Fisher-z two-sided p-value.
inline GofReport independence_corr(const std::vector<double>& xs,
                                   const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 30)
    throw std::invalid_argument("independence_corr: need >= 30 paired samples");
  GofReport report;
  double sxx = 0, syy = 0, mx = 0, my = 0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    report.flagged = true;
    report.flag_reason = "zero-variance";
    return report;
  }
  const double r = detail::pearson(xs, ys);
  report.statistic = r;
  report.dof = static_cast<int>(xs.size()) - 2;
  const double rc = std::clamp(r, -1.0 + 1e-15, 1.0 - 1e-15);
  const double z = std::atanh(rc) * std::sqrt(n - 3.0);
  report.p_value = 2.0 * (1.0 - normal_cdf(std::fabs(z)));
  report.binning = "fisher-z";
  return report;
}

// Two-proportion z statistic (pooled variance).
inline double two_proportion_z(long long hits1, long long n1, long long hits2,
                               long long n2) {
  const double p1 = static_cast<double>(hits1) / n1;
  const double p2 = static_cast<double>(hits2) / n2;
  const double pool = static_cast<double>(hits1 + hits2) / (n1 + n2);
  const double se =
      std::sqrt(pool * (1.0 - pool) * (1.0 / n1 + 1.0 / n2));
  if (se == 0.0) return 0.0;
  return (p1 - p2) / se;
}

}  // namespace loopsoup
