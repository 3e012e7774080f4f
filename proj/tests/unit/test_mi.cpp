#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "helpers.hpp"
#include "knnmi/entropy.hpp"
#include "knnmi/error.hpp"
#include "knnmi/experiments.hpp"
#include "knnmi/mi.hpp"
#include "knnmi/specfn.hpp"
#include "knnmi/synth.hpp"

using namespace knnmi;

namespace {

Dataset hand_2d() { return Dataset({0, 0, 1, 0, 0, 2}, 2, {1, 1}); }

MiConfig make(MiKind kind, std::size_t k) {
  MiConfig c;
  c.kind = kind;
  c.k = k;
  return c;
}

double mean_over_trials(const Distribution& dist, std::size_t n, std::size_t trials,
                        std::uint64_t seed, auto&& estimator) {
  double sum = 0.0;
  for (std::uint32_t t = 0; t < trials; ++t) {
    PhiloxStream rng(seed, t, static_cast<std::uint32_t>(n));
    sum += estimator(dist.sample(n, {dist.dim() / 2, dist.dim() - dist.dim() / 2}, rng));
  }
  return sum / static_cast<double>(trials);
}

}  // namespace

TEST_CASE("KSG on the hand example") {
  const auto r = mi_ksg(hand_2d(), 1);
  // mpmath: psi(1) + ln 3 - (2(psi(3) + psi(2)) + 2 psi(3)) / 3
  CHECK(r.estimate == doctest::Approx(-0.99083871309702411466).epsilon(1e-13));
  CHECK(r.method == "ksg");
  CHECK(r.norm == Norm::LInf);
  const double manual = digamma(1) + std::log(3.0) -
                        (2.0 * (digamma(3) + digamma(2)) + 2.0 * digamma(3)) / 3.0;
  CHECK(r.estimate == doctest::Approx(manual).epsilon(1e-15));
}

TEST_CASE("KSG with strict counting on the hand example") {
  const auto r = mi_ksg(hand_2d(), 1, Boundary::Strict);
  // counts_x = (1, 0, 2), counts_y = (1, 1, 0)
  const double manual = digamma(1) + std::log(3.0) -
                        (digamma(2) + digamma(2) + digamma(1) + digamma(2) + digamma(3) +
                         digamma(1)) / 3.0;
  CHECK(r.estimate == doctest::Approx(manual).epsilon(1e-14));
  MiConfig bad = make(MiKind::BiKsg, 1);
  bad.boundary = Boundary::Strict;
  CHECK_THROWS_AS(estimate_mi(hand_2d(), bad), Error);
}

TEST_CASE("BI-KSG volume constant and hand value") {
  CHECK(log_ball_volume(1, Norm::L2) * 2.0 - log_ball_volume(2, Norm::L2) ==
        doctest::Approx(0.24156447527049044469).epsilon(1e-14));
  const Dataset ds = hand_2d();
  const auto r = mi_biksg(ds, 1);
  const auto s = neighbor_stats(ds, 1, Norm::L2);
  double sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    sum += std::log(static_cast<double>(s.counts[0][i])) + std::log(static_cast<double>(s.counts[1][i]));
  const double expected = digamma(1) + std::log(3.0) + std::log(4.0 / std::numbers::pi) - sum / 3.0;
  CHECK(r.estimate == doctest::Approx(expected).epsilon(1e-14));
  REQUIRE(r.warnings.size() == 1);
  CHECK(mi_biksg(ds, 2).warnings.empty());
}

TEST_CASE("3KL is the sum and difference of three KL estimates") {
  const Dataset ds = testing::random_dataset(300, {1, 2}, 50);
  for (Norm norm : {Norm::L2, Norm::LInf}) {
    EntropyConfig c;
    c.k = 3;
    c.norm = norm;
    const std::size_t x[] = {0};
    const std::size_t y[] = {1};
    const double hx = kl_entropy(ds.select(x), c).estimate;
    const double hy = kl_entropy(ds.select(y), c).estimate;
    const double hz = kl_entropy(ds, c).estimate;
    CHECK(mi_3kl(ds, 3, norm).estimate == doctest::Approx(hx + hy - hz).epsilon(1e-12));
  }
}

TEST_CASE("invariances of the pairwise estimators") {
  const Dataset ds = testing::dyadic_dataset(400, {1, 2}, 51);
  const double ksg = mi_ksg(ds, 4).estimate;
  const double bi = mi_biksg(ds, 4).estimate;
  const double tkl = mi_3kl(ds, 4).estimate;
  for (double a : {0.5, 4.0}) {
    const Dataset moved = testing::transform(ds, a, 3.0);
    CHECK(mi_ksg(moved, 4).estimate == ksg);
    CHECK(mi_biksg(moved, 4).estimate == bi);
    CHECK(std::abs(mi_3kl(moved, 4).estimate - tkl) <= 1e-9);
  }
  const Dataset rough = testing::random_dataset(400, {1, 1}, 52);
  const Dataset scaled = testing::transform(rough, 10.0, 0.0);
  CHECK(std::abs(mi_3kl(scaled, 2).estimate - mi_3kl(rough, 2).estimate) <= 1e-9);
  CHECK(std::abs(mi_ksg(scaled, 2).estimate - mi_ksg(rough, 2).estimate) <= 1e-12);

  const Dataset p = testing::permute_rows(ds, testing::reversed_then_rotated(ds.rows()));
  CHECK(std::abs(mi_ksg(p, 4).estimate - ksg) <= 1e-10);
  CHECK(std::abs(mi_biksg(p, 4).estimate - bi) <= 1e-10);
  CHECK(std::abs(mi_3kl(p, 4).estimate - tkl) <= 1e-10);
}

TEST_CASE("local decomposition identity iota = xi_x + xi_y - xi_z") {
  const Dataset ds = testing::random_dataset(500, {2, 1}, 53, true);
  for (Norm norm : {Norm::L2, Norm::LInf}) {
    const auto t = decompose_local(ds, 3, norm, TrueEntropies{1.0, 2.0, 3.0});
    const double est = norm == Norm::L2 ? mi_biksg(ds, 3).estimate : mi_ksg(ds, 3).estimate;
    double sum = 0.0;
    for (std::size_t i = 0; i < t.iota.size(); ++i) {
      REQUIRE(std::abs(t.iota[i] - (t.xi_x[i] + t.xi_y[i] - t.xi_z[i])) <= 1e-10);
      REQUIRE(t.b_x[i] == t.xi_x[i] - 1.0);
      REQUIRE(t.b_y[i] == t.xi_y[i] - 2.0);
      REQUIRE(t.b_z[i] == t.xi_z[i] - 3.0);
      sum += t.iota[i];
    }
    CHECK(std::abs(sum / 500.0 - est) <= 1e-10);
  }
  MiConfig c = make(MiKind::ThreeKL, 3);
  const auto t3 = decompose_local(ds, c);
  for (std::size_t i = 0; i < t3.iota.size(); ++i)
    REQUIRE(std::abs(t3.iota[i] - (t3.xi_x[i] + t3.xi_y[i] - t3.xi_z[i])) <= 1e-10);
  CHECK(t3.b_x.empty());
}

TEST_CASE("KSG local joint term uses the product of l_inf marginal balls") {
  const Dataset ds = testing::random_dataset(100, {1, 1}, 54);
  const auto t = decompose_local(ds, 2, Norm::LInf);
  const auto s = neighbor_stats(ds, 2, Norm::LInf);
  for (std::size_t i = 0; i < 100; ++i) {
    const double expected = -digamma(2) + std::log(100.0) + 2.0 * std::numbers::ln2 +
                            2.0 * std::log(s.rho[i]);
    REQUIRE(t.xi_z[i] == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("truncated MI variants") {
  const Dataset ds = testing::random_dataset(800, {1, 1}, 55, true);
  for (MiKind kind : {MiKind::ThreeKL, MiKind::Ksg, MiKind::BiKsg}) {
    CAPTURE(to_string(kind));
    MiConfig c = make(kind, 3);
    const double plain = estimate_mi(ds, c).estimate;
    c.threshold_override = std::numeric_limits<double>::infinity();
    const auto inf = mi_truncated(ds, c);
    CHECK(inf.estimate == doctest::Approx(plain).epsilon(1e-13));
    CHECK(inf.method == std::string(to_string(kind)) + "_trunc");
    c.threshold_override = 1e-12;
    CHECK(mi_truncated(ds, c).estimate == 0.0);
  }
  MiConfig c = make(MiKind::Ksg, 3);
  c.truncate = true;
  const auto r = estimate_mi(ds, c);
  REQUIRE(r.threshold.has_value());
  CHECK(*r.threshold == doctest::Approx(truncation_threshold(800, 2, 0.5)));
}

TEST_CASE("truncation rarely binds for a correlated Gaussian at N = 3200") {
  std::vector<double> cov{1.0, 0.9, 0.9, 1.0};
  const auto dist = Distribution::mvn({0.0, 0.0}, cov);
  for (std::uint32_t t = 0; t < 5; ++t) {
    PhiloxStream rng(77, t);
    const Dataset ds = dist.sample(3200, {1, 1}, rng);
    MiConfig c = make(MiKind::Ksg, 1);
    const double plain = estimate_mi(ds, c).estimate;
    c.truncate = true;
    CHECK(std::abs(estimate_mi(ds, c).estimate - plain) < 0.02);
  }
}

TEST_CASE("norm and parameter validation") {
  MiConfig c = make(MiKind::Ksg, 2);
  c.norm = Norm::L2;
  CHECK_THROWS_AS(estimate_mi(hand_2d(), c), Error);
  c = make(MiKind::BiKsg, 2);
  c.norm = Norm::LInf;
  CHECK_THROWS_AS(estimate_mi(hand_2d(), c), Error);
  c = make(MiKind::ThreeKL, 1);
  c.norm = Norm::L2;
  CHECK_NOTHROW(estimate_mi(Dataset({0, 0, 1, 3, 2, 1}, 2, {1, 1}), c));
  const Dataset three({1, 2, 3, 4, 5, 6, 7, 8, 9}, 3, {1, 1, 1});
  CHECK_THROWS_AS(mi_ksg(three, 1), Error);
  CHECK(parse_mi_kind("bi-ksg") == MiKind::BiKsg);
  CHECK(!parse_mi_kind("kde"));
}

TEST_CASE("duplicate marginal values are named for 3KL") {
  const Dataset ds({0, 0, 0, 1, 1, 2, 2, 3}, 2, {1, 1});
  try {
    mi_3kl(ds, 1);
    FAIL("accepted duplicate X values");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DuplicateSample);
    CHECK(std::string(e.what()).find('X') != std::string::npos);
  }
  CHECK_NOTHROW(mi_ksg(ds, 1));
}

TEST_CASE("independent uniforms give near-zero MI for all estimators") {
  const auto dist = Distribution::uniform_cube(2);
  for (int m = 0; m < 3; ++m) {
    const double mean = mean_over_trials(dist, 4096, 100, 900 + m, [&](const Dataset& ds) {
      if (m == 0) return mi_3kl(ds, 4).estimate;
      if (m == 1) return mi_ksg(ds, 4).estimate;
      return mi_biksg(ds, 4).estimate;
    });
    CAPTURE(m);
    CHECK(std::abs(mean) <= 0.05);
  }
}
