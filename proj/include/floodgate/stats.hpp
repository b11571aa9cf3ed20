#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace floodgate {

/// Inverse standard-normal CDF.
///
/// Rational-minimax approximation PPND16 (Wichura, Algorithm AS 241),
/// absolute error below 1e-15 for p in (0, 1) -- comfortably inside the
/// 1e-9 budget the interval constructions assume. p must lie in (0, 1).
double normal_quantile(double p);

/// Upper normal quantile z such that P(|Z| <= z) = 1 - alpha.
double normal_two_sided_z(double alpha);

double mean(std::span<const double> xs);
/// Sample variance with divisor n-1; requires n >= 2.
double sample_variance(std::span<const double> xs);

/// Summation with a fixed pairwise reduction tree. The result depends only
/// on element order, never on accumulation scheduling, which keeps
/// multi-worker aggregation bit-reproducible.
double pairwise_sum(std::span<const double> xs);

/// Sample means and 3x3 sample covariance (divisor n-1) of column triples.
struct MeanCov3 {
  std::array<double, 3> mean;
  std::array<std::array<double, 3>, 3> cov;
};
MeanCov3 mean_cov3(std::span<const double> a, std::span<const double> b,
                   std::span<const double> c);

/// Ordinary least-squares slope of y on x; requires >= 2 points and
/// non-constant x.
double ols_slope(std::span<const double> x, std::span<const double> y);

/// Pearson correlation; requires non-degenerate inputs.
double correlation(std::span<const double> x, std::span<const double> y);

}  // namespace floodgate
