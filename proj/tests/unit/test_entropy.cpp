#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "helpers.hpp"
#include "knnmi/entropy.hpp"
#include "knnmi/knn.hpp"
#include "knnmi/error.hpp"
#include "knnmi/specfn.hpp"
#include "knnmi/synth.hpp"

using namespace knnmi;

namespace {

EntropyConfig cfg(std::size_t k, Norm norm = Norm::LInf) {
  EntropyConfig c;
  c.k = k;
  c.norm = norm;
  return c;
}

}  // namespace

TEST_CASE("KL estimate on the 1-D hand example") {
  const Dataset ds({0.0, 0.1, 0.3, 0.7}, 1, {1});
  // mpmath: (1/4) sum ln(8 rho_i) - psi(1) with rho = (0.1, 0.1, 0.2, 0.4)
  for (Norm norm : {Norm::L2, Norm::LInf}) {
    const auto r = kl_entropy(ds, cfg(1, norm));
    CHECK(r.estimate == doctest::Approx(0.8739324990072820869).epsilon(1e-13));
    CHECK(r.method == "kl");
    CHECK(r.local.size() == 4);
    CHECK(r.samples == 4);
  }
}

TEST_CASE("KL equals its eq-KL2 form with the log k - psi(k) correction") {
  const Dataset ds = testing::random_dataset(300, {2}, 40);
  for (std::size_t k : {1, 3, 7}) {
    const auto r = kl_entropy(ds, cfg(k, Norm::L2));
    const std::size_t cols[] = {0, 1};
    const auto rho = knn_radii(ds, cols, k, Norm::L2);
    double sum = 0.0;
    const double n = 300.0;
    for (double p : rho)
      sum += std::log(n * std::numbers::pi * p * p / static_cast<double>(k));
    const double expected = sum / n + std::log(static_cast<double>(k)) - digamma(static_cast<double>(k));
    CHECK(r.estimate == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("KL scale law: estimate shifts by d ln a") {
  const Dataset ds = testing::random_dataset(400, {3}, 41);
  for (double a : {0.5, 2.0, 10.0}) {
    for (Norm norm : {Norm::L2, Norm::LInf}) {
      const double h0 = kl_entropy(ds, cfg(4, norm)).estimate;
      const double h1 = kl_entropy(testing::transform(ds, a, 0.0), cfg(4, norm)).estimate;
      CHECK(std::abs(h1 - h0 - 3.0 * std::log(a)) <= 1e-9);
    }
  }
  const Dataset one({0.0, 0.1, 0.3, 0.7}, 1, {1});
  const double h0 = kl_entropy(one, cfg(1)).estimate;
  const double h2 = kl_entropy(testing::transform(one, 2.0, 0.0), cfg(1)).estimate;
  CHECK(h2 - h0 == doctest::Approx(std::numbers::ln2).epsilon(1e-14));
}

TEST_CASE("KL is translation and permutation invariant") {
  const Dataset ds = testing::dyadic_dataset(500, {2}, 42);
  const double h0 = kl_entropy(ds, cfg(3)).estimate;
  CHECK(kl_entropy(testing::transform(ds, 1.0, 5.0), cfg(3)).estimate == h0);
  const Dataset p = testing::permute_rows(ds, testing::reversed_then_rotated(ds.rows()));
  CHECK(std::abs(kl_entropy(p, cfg(3)).estimate - h0) <= 1e-10);
}

TEST_CASE("truncation threshold formula") {
  CHECK(truncation_threshold(2, 1, 1.0) == doctest::Approx(std::pow(std::log(2.0), 2.0) / 2.0));
  // N = e^2 is not an integer; check the formula through its pieces instead.
  const double n = 7.0;
  CHECK(truncation_threshold(7, 1, 1.0) == doctest::Approx(std::pow(std::log(n), 2.0) / n));
  CHECK(truncation_threshold(7, 2, 1.0) == doctest::Approx(std::sqrt(std::pow(std::log(n), 2.0) / n)));
  double prev = INFINITY;
  for (std::size_t m = 100; m <= 1000000; m *= 10) {
    const double a = truncation_threshold(m, 1, 0.5);
    CHECK(a < prev);
    prev = a;
  }
  CHECK(truncation_threshold(1000000, 1, 0.5) < 0.003);
  const double a1 = truncation_threshold(500, 1, 0.5);
  const double a2 = truncation_threshold(500, 2, 0.5);
  CHECK(std::log(a2) == doctest::Approx(0.5 * std::log(a1)).epsilon(1e-14));
}

TEST_CASE("truncated KL with an infinite threshold equals KL") {
  const Dataset ds = testing::random_dataset(600, {2}, 43);
  EntropyConfig c = cfg(4);
  const double plain = kl_entropy(ds, c).estimate;
  c.truncate = true;
  c.threshold_override = std::numeric_limits<double>::infinity();
  const auto t = truncated_kl_entropy(ds, c);
  CHECK(std::abs(t.estimate - plain) <= 1e-12);
  CHECK(t.method == "kl_trunc");

  c.threshold_override = 1e-9;
  const auto zero = truncated_kl_entropy(ds, c);
  CHECK(zero.estimate == 0.0);
  CHECK(std::all_of(zero.truncated.begin(), zero.truncated.end(), [](bool b) { return b; }));
  for (double v : zero.local) CHECK(v == 0.0);
}

TEST_CASE("truncated KL flags exactly the samples beyond a_N") {
  const Dataset ds = testing::random_dataset(200, {1}, 44);
  EntropyConfig c = cfg(2);
  c.truncate = true;
  const auto r = estimate_entropy(ds, c);
  REQUIRE(r.threshold.has_value());
  CHECK(*r.threshold == doctest::Approx(truncation_threshold(200, 1, 0.5)));
  const std::size_t cols[] = {0};
  const auto rho = knn_radii(ds, cols, 2, Norm::LInf);
  const auto xi = kl_local_terms(rho, 1, 2, Norm::LInf);
  for (std::size_t i = 0; i < rho.size(); ++i) {
    CHECK(r.truncated[i] == (rho[i] > *r.threshold));
    CHECK(r.local[i] == (r.truncated[i] ? 0.0 : xi[i]));
  }
}

TEST_CASE("KL on uniform samples is close to zero") {
  const auto dist = Distribution::uniform_cube(1);
  const Dataset ds = dist.sample(5000, {1}, 2024);
  CHECK(std::abs(kl_entropy(ds, cfg(4)).estimate) < 0.05);
  EntropyConfig c = cfg(4);
  c.truncate = true;
  CHECK(std::abs(estimate_entropy(ds, c).estimate) < 0.05);
}

TEST_CASE("KL bias shrinks from N = 256 to N = 4096 on uniform cubes") {
  for (std::size_t d : {1, 2}) {
    const auto dist = Distribution::uniform_cube(d);
    auto mean_bias = [&](std::size_t n) {
      double sum = 0.0;
      for (std::uint32_t t = 0; t < 100; ++t) {
        PhiloxStream rng(555, t, static_cast<std::uint32_t>(n));
        sum += kl_entropy(dist.sample(n, {d}, rng), cfg(4)).estimate;
      }
      return std::abs(sum / 100.0);
    };
    CAPTURE(d);
    CHECK(mean_bias(4096) < mean_bias(256));
  }
}

TEST_CASE("entropy config validation") {
  const Dataset ds = testing::random_dataset(20, {1}, 45);
  EntropyConfig c = cfg(0);
  CHECK_THROWS_AS(kl_entropy(ds, c), Error);
  c = cfg(20);
  CHECK_THROWS_AS(kl_entropy(ds, c), Error);
  c = cfg(2);
  c.truncate = true;
  c.delta = 0.0;
  CHECK_THROWS_AS(estimate_entropy(ds, c), Error);
  const Dataset dup({1.0, 1.0, 2.0}, 1, {1});
  CHECK_THROWS_AS(kl_entropy(dup, cfg(1)), Error);
}
