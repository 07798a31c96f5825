#pragma once
// Goodness-of-fit helpers for the sampler tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace stats {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& v) {
  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  return {mean, n > 0 ? std::sqrt(var / static_cast<double>(n)) : 0.0};
}

inline bool within_z(const MeanSe& s, double target, double z) {
  if (s.se == 0.0) return std::abs(s.mean - target) <= 1e-12;
  return std::abs(s.mean - target) <= z * s.se;
}

struct ChiSquare {
  double statistic = 0.0;
  double critical = 0.0;
  std::size_t dof = 0;
  bool pass() const { return statistic <= critical; }
};

// Pearson chi-square of samples in [0,1] against a density on [0,1], using
// `bins` equal-width bins whose probabilities come from `bin_mass`.
inline ChiSquare chi_square_uniform_bins(const std::vector<double>& samples, std::size_t bins,
                                         const std::function<double(double, double)>& bin_mass,
                                         double alpha = 0.01) {
  std::vector<double> counts(bins, 0.0);
  for (double x : samples) {
    const auto b = std::min(bins - 1, static_cast<std::size_t>(x * static_cast<double>(bins)));
    counts[b] += 1.0;
  }
  const double n = static_cast<double>(samples.size());
  ChiSquare r;
  for (std::size_t b = 0; b < bins; ++b) {
    const double lo = static_cast<double>(b) / static_cast<double>(bins);
    const double hi = static_cast<double>(b + 1) / static_cast<double>(bins);
    const double expected = n * bin_mass(lo, hi);
    r.statistic += (counts[b] - expected) * (counts[b] - expected) / expected;
  }
  r.dof = bins - 1;
  boost::math::chi_squared dist(static_cast<double>(r.dof));
  r.critical = boost::math::quantile(boost::math::complement(dist, alpha));
  return r;
}

// One-sample Kolmogorov-Smirnov distance against a continuous CDF.
inline double ks_one_sample(std::vector<double> v, const std::function<double(double)>& cdf) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double F = cdf(v[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

// Asymptotic one-sample KS critical value.
inline double ks_critical(std::size_t n, double alpha = 0.01) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

}  // namespace stats
