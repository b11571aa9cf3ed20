#include <doctest.h>

#include <cmath>
#include <vector>

#include "floodgate/rng.hpp"
#include "floodgate/stats.hpp"

using namespace floodgate;

TEST_CASE("substreams are deterministic and label-sensitive") {
  Rng a = Rng::substream(42, "resample", {3});
  Rng b = Rng::substream(42, "resample", {3});
  Rng c = Rng::substream(42, "resample", {4});
  Rng d = Rng::substream(42, "lhs", {3});
  const auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  CHECK(x != d.next_u64());
}

TEST_CASE("uniform stays in [0,1) and matches moments") {
  Rng rng(7);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sum2 / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}

TEST_CASE("normal quantile hits reference values to 1e-9") {
  CHECK(std::abs(normal_quantile(0.5)) < 1e-12);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.9986501019683699) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-9));
  CHECK(normal_two_sided_z(0.05) == doctest::Approx(1.959963984540054));
  CHECK_THROWS(normal_quantile(0.0));
  CHECK_THROWS(normal_quantile(1.0));
}

TEST_CASE("gamma sampler matches mean and variance") {
  Rng rng(11);
  const double shape = 1.3, scale = 6.0;
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gamma(shape, scale);
    REQUIRE(g > 0.0);
    sum += g;
    sum2 += g * g;
  }
  const double m = sum / n;
  const double var = sum2 / n - m * m;
  CHECK(m == doctest::Approx(shape * scale).epsilon(0.02));
  CHECK(var == doctest::Approx(shape * scale * scale).epsilon(0.05));
}

TEST_CASE("permutation is a bijection") {
  Rng rng(3);
  const auto p = rng.permutation(257);
  std::vector<bool> seen(257, false);
  for (auto v : p) {
    REQUIRE(v < 257);
    REQUIRE(!seen[v]);
    seen[v] = true;
  }
}

TEST_CASE("pairwise sum is order-of-reduction stable and accurate") {
  std::vector<double> xs(10001);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = 1e-8 * static_cast<double>(i) + 1.0;
  const double s = pairwise_sum(xs);
  const double expected = 10001.0 + 1e-8 * (10000.0 * 10001.0 / 2.0);
  CHECK(s == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("mean_cov3 matches direct computation") {
  std::vector<double> a{1.0, 2.0, 4.0, 8.0};
  std::vector<double> b{0.5, 0.25, 0.125, 0.0625};
  std::vector<double> c{3.0, 3.0, 3.0, 5.0};
  const auto mc = mean_cov3(a, b, c);
  CHECK(mc.mean[0] == doctest::Approx(3.75));
  CHECK(mc.cov[0][0] == doctest::Approx(sample_variance(a)));
  CHECK(mc.cov[1][1] == doctest::Approx(sample_variance(b)));
  CHECK(mc.cov[0][1] == doctest::Approx(mc.cov[1][0]));
  // Hand value: cov(a, c) with divisor n-1.
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) acc += (a[i] - 3.75) * (c[i] - 3.5);
  CHECK(mc.cov[0][2] == doctest::Approx(acc / 3.0));
}

TEST_CASE("ols slope recovers a line") {
  std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y{2.0, 3.9, 6.1, 8.0, 9.9};
  CHECK(ols_slope(x, y) == doctest::Approx(2.0).epsilon(0.02));
}
