#include <doctest.h>

#include <cmath>

#include "knnmi/error.hpp"
#include "knnmi/synth.hpp"

using namespace knnmi;

namespace {

Distribution gauss09() { return Distribution::mvn({0.0, 0.0}, {1.0, 0.9, 0.9, 1.0}); }

}  // namespace

TEST_CASE("closed-form entropies") {
  CHECK(true_entropy(Distribution::uniform_cube(1)) == 0.0);
  CHECK(true_entropy(Distribution::uniform_cube(7)) == 0.0);
  CHECK(true_entropy(Distribution::mvn({0, 0}, {1, 0, 0, 1})) ==
        doctest::Approx(2.8378770664093454836).epsilon(1e-14));
  // Quadrature oracle values for -int f ln f.
  CHECK(beta_entropy(2, 2) == doctest::Approx(-0.12509280256138833415).epsilon(1e-13));
  CHECK(beta_entropy(2, 5) == doctest::Approx(-0.48453071499548870875).epsilon(1e-13));
  CHECK(beta_entropy(0.5, 0.5) == doctest::Approx(-0.24156447527049044469).epsilon(1e-12));
  CHECK(true_entropy(Distribution::beta_iid(2, 2, 6)) ==
        doctest::Approx(6.0 * -0.12509280256138833415).epsilon(1e-13));
}

TEST_CASE("closed-form mutual information") {
  const std::size_t pair[] = {1, 1};
  CHECK(true_mi(gauss09(), pair) == doctest::Approx(0.83036560341082545401).epsilon(1e-14));
  CHECK(true_mi(Distribution::uniform_cube(2), pair) == 0.0);
  CHECK(true_mi(Distribution::beta_iid(2, 5, 2), pair) == 0.0);
  const auto fig5 = Distribution::mvn({0, 0, 0}, {1, .5, .25, .5, 1, .5, .25, .5, 1});
  const std::size_t three[] = {1, 1, 1};
  CHECK(log_det_spd(fig5.covariance(), 3) == doctest::Approx(std::log(0.5625)).epsilon(1e-14));
  CHECK(true_mi(fig5, three) == doctest::Approx(0.28768207245178092744).epsilon(1e-14));
  const std::size_t bad[] = {1, 2};
  CHECK_THROWS_AS(true_mi(gauss09(), bad), Error);
}

TEST_CASE("true MI is consistent with the entropies") {
  const auto dist =
      Distribution::mvn({1, -2, 0.5}, {2.0, 0.3, -0.4, 0.3, 1.5, 0.2, -0.4, 0.2, 0.8});
  const std::size_t x[] = {0};
  const std::size_t y[] = {1, 2};
  const std::size_t dims[] = {1, 2};
  CHECK(std::abs(true_mi(dist, dims) - (dist.entropy(x) + dist.entropy(y) - dist.entropy())) <=
        1e-10);
  CHECK(dist.entropy() == true_entropy(dist));
}

TEST_CASE("uniform sampler is bounded and centred") {
  const Dataset ds = Distribution::uniform_cube(2).sample(1000, {1, 1}, 5);
  for (std::size_t c = 0; c < 2; ++c) {
    double sum = 0.0;
    for (std::size_t i = 0; i < 1000; ++i) {
      const double v = ds.at(i, c);
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
      sum += v;
    }
    CHECK(std::abs(sum / 1000.0 - 0.5) <= 0.05);
  }
}

TEST_CASE("Gaussian sampler reproduces the covariance") {
  const std::size_t n = 100000;
  const Dataset ds = gauss09().sample(n, {1, 1}, 6);
  double s[2] = {0, 0}, ss[3] = {0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const double a = ds.at(i, 0), b = ds.at(i, 1);
    s[0] += a;
    s[1] += b;
    ss[0] += a * a;
    ss[1] += a * b;
    ss[2] += b * b;
  }
  const double m0 = s[0] / n, m1 = s[1] / n;
  const double c00 = ss[0] / n - m0 * m0, c01 = ss[1] / n - m0 * m1, c11 = ss[2] / n - m1 * m1;
  CHECK(std::abs(c01 / std::sqrt(c00 * c11) - 0.9) <= 0.01);
  const double frob = std::sqrt((c00 - 1) * (c00 - 1) + 2 * (c01 - 0.9) * (c01 - 0.9) +
                                (c11 - 1) * (c11 - 1));
  CHECK(frob < 0.02);
}

TEST_CASE("beta sampler stays inside the unit interval") {
  const Dataset ds = Distribution::beta_iid(0.5, 0.5, 3).sample(2000, {3}, 7);
  double sum = 0.0;
  for (std::size_t i = 0; i < 2000; ++i)
    for (std::size_t c = 0; c < 3; ++c) {
      REQUIRE(ds.at(i, c) >= 0.0);
      REQUIRE(ds.at(i, c) <= 1.0);
      sum += ds.at(i, c);
    }
  CHECK(std::abs(sum / 6000.0 - 0.5) <= 0.03);
}

TEST_CASE("sampling is deterministic under the seed") {
  const auto a = gauss09().sample(50, {1, 1}, 9);
  const auto b = gauss09().sample(50, {1, 1}, 9);
  const auto c = gauss09().sample(50, {1, 1}, 10);
  CHECK(a.values() == b.values());
  CHECK(a.values() != c.values());
}

TEST_CASE("invalid distributions are rejected") {
  CHECK_THROWS_AS(Distribution::mvn({0, 0}, {1, 2, 2, 1}), Error);
  CHECK_THROWS_AS(Distribution::mvn({0, 0}, {1, 0.5, 0.4, 1}), Error);
  CHECK_THROWS_AS(Distribution::mvn({0, 0}, {1, 0, 0}), Error);
  CHECK_THROWS_AS(Distribution::beta_iid(0, 1, 1), Error);
  CHECK_THROWS_AS(Distribution::uniform_cube(0), Error);
  const double m[] = {4, 2, 2, 3};
  const auto l = cholesky(m, 2);
  CHECK(l[0] == doctest::Approx(2.0));
  CHECK(l[1] == 0.0);
  CHECK(l[2] == doctest::Approx(1.0));
  CHECK(l[3] == doctest::Approx(std::sqrt(2.0)));
  try {
    const double bad[] = {1, 0, 0, -1};
    cholesky(bad, 2);
    FAIL("accepted an indefinite matrix");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
  }
}
