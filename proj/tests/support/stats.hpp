// Small statistics helpers for the test and acceptance suites.
#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace teststats {

inline double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

inline double standard_error(std::span<const double> xs) {
  return sample_sd(xs) / std::sqrt(static_cast<double>(xs.size()));
}

/// t statistic for the one-sided hypothesis mean(diffs) > 0.
inline double paired_t(std::span<const double> diffs) {
  double se = standard_error(diffs);
  if (se == 0.0) return mean(diffs) > 0.0 ? 1e9 : (mean(diffs) < 0.0 ? -1e9 : 0.0);
  return mean(diffs) / se;
}

/// One-sided 95% critical value of Student's t for n-1 degrees of freedom
/// (coarse table, conservative between entries).
inline double t_critical_95(std::size_t n) {
  std::size_t dof = n > 1 ? n - 1 : 1;
  if (dof >= 120) return 1.645;
  if (dof >= 60) return 1.671;
  if (dof >= 40) return 1.684;
  if (dof >= 30) return 1.697;
  if (dof >= 25) return 1.708;
  if (dof >= 20) return 1.725;
  if (dof >= 15) return 1.753;
  if (dof >= 10) return 1.812;
  if (dof >= 5) return 2.015;
  return 2.920;
}

struct Ols {
  double slope = 0.0;
  double slope_stderr = 0.0;
};

inline Ols ols_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  Ols out;
  out.slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double fit = my + out.slope * (x[i] - mx);
    rss += (y[i] - fit) * (y[i] - fit);
  }
  double s2 = rss / static_cast<double>(n - 2);
  out.slope_stderr = std::sqrt(s2 / sxx);
  return out;
}

}  // namespace teststats
