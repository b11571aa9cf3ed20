#include "floodgate/stats.hpp"

#include <cmath>

#include "floodgate/errors.hpp"

namespace floodgate {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw InvalidArgumentError("normal_quantile: p must be in (0, 1)");

  // Wichura (1988), Algorithm AS 241, routine PPND16.
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -value : value;
}

double normal_two_sided_z(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidArgumentError("normal_two_sided_z: alpha must be in (0, 1)");
  return normal_quantile(1.0 - alpha / 2.0);
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw InvalidArgumentError("mean: empty input");
  return pairwise_sum(xs) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) throw InvalidArgumentError("sample_variance: need n >= 2");
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return acc / static_cast<double>(n - 1);
}

double pairwise_sum(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n == 0) return 0.0;
  if (n <= 16) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

MeanCov3 mean_cov3(std::span<const double> a, std::span<const double> b,
                   std::span<const double> c) {
  const std::size_t n = a.size();
  if (b.size() != n || c.size() != n)
    throw InvalidArgumentError("mean_cov3: length mismatch");
  if (n < 2) throw InvalidArgumentError("mean_cov3: need n >= 2");

  MeanCov3 out{};
  out.mean = {mean(a), mean(b), mean(c)};
  double s00 = 0, s01 = 0, s02 = 0, s11 = 0, s12 = 0, s22 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - out.mean[0];
    const double db = b[i] - out.mean[1];
    const double dc = c[i] - out.mean[2];
    s00 += da * da;
    s01 += da * db;
    s02 += da * dc;
    s11 += db * db;
    s12 += db * dc;
    s22 += dc * dc;
  }
  const double denom = static_cast<double>(n - 1);
  out.cov = {{{s00 / denom, s01 / denom, s02 / denom},
              {s01 / denom, s11 / denom, s12 / denom},
              {s02 / denom, s12 / denom, s22 / denom}}};
  return out;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (y.size() != n || n < 2) throw InvalidArgumentError("ols_slope: need matched n >= 2");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DegenerateInputError("ols_slope: constant x");
  return sxy / sxx;
}

double correlation(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (y.size() != n || n < 2)
    throw InvalidArgumentError("correlation: need matched n >= 2");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInputError("correlation: constant input");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace floodgate
