#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "knnmi/rng.hpp"

using knnmi::PhiloxStream;

// Known-answer vectors from the Random123 distribution (kat_vectors).
TEST_CASE("philox4x32-10 known answers") {
  const auto zero = PhiloxStream::apply({0, 0, 0, 0}, {0, 0});
  CHECK(zero == PhiloxStream::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  const auto ones = PhiloxStream::apply({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                        {0xffffffffu, 0xffffffffu});
  CHECK(ones == PhiloxStream::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  const auto pi = PhiloxStream::apply({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                      {0xa4093822u, 0x299f31d0u});
  CHECK(pi == PhiloxStream::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are deterministic and distinct") {
  PhiloxStream a(42, 1, 2), b(42, 1, 2), c(42, 1, 3), d(43, 1, 2);
  std::vector<std::uint32_t> va, vb, vc, vd;
  for (int i = 0; i < 64; ++i) {
    va.push_back(a.next_u32());
    vb.push_back(b.next_u32());
    vc.push_back(c.next_u32());
    vd.push_back(d.next_u32());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
}

TEST_CASE("uniform draws stay in range with the right moments") {
  PhiloxStream rng(7);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(sum2 / n - mean * mean - 1.0 / 12.0) < 2e-3);
  for (int i = 0; i < 1000; ++i) CHECK(rng.uniform_positive() > 0.0);
}

TEST_CASE("normal, gamma and beta samplers have the right means and variances") {
  PhiloxStream rng(11);
  const int n = 200000;
  auto moments = [&](auto draw) {
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = draw();
      s += x;
      s2 += x * x;
    }
    const double m = s / n;
    return std::pair{m, s2 / n - m * m};
  };
  auto [nm, nv] = moments([&] { return rng.normal(); });
  CHECK(std::abs(nm) < 4.0 / std::sqrt(n));
  CHECK(std::abs(nv - 1.0) < 0.02);
  for (double shape : {0.3, 1.0, 2.5, 9.0}) {
    CAPTURE(shape);
    auto [gm, gv] = moments([&] { return rng.gamma(shape); });
    CHECK(std::abs(gm - shape) < 4.0 * std::sqrt(shape / n));
    CHECK(std::abs(gv / shape - 1.0) < 0.05);
  }
  auto [bm, bv] = moments([&] { return rng.beta(2.0, 5.0); });
  CHECK(std::abs(bm - 2.0 / 7.0) < 2e-3);
  CHECK(std::abs(bv - 10.0 / (49.0 * 8.0)) < 1e-3);
}
