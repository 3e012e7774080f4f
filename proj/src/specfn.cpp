#include "knnmi/specfn.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "knnmi/error.hpp"

namespace knnmi {

namespace {

[[noreturn]] void domain_error(const char* fn, double x) {
  std::ostringstream msg;
  msg.precision(17);
  msg << fn << ": argument must be positive and finite, got " << x;
  fail(ErrorKind::Domain, msg.str());
}

}  // namespace

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) domain_error("digamma", x);

  double shift = 0.0;
  // At x >= 10 the first omitted term (B14) is below 1e-15.
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  // B2/2, B4/4, ..., B12/12 applied to 1/x^2, 1/x^4, ...
  const double inv2 = 1.0 / (x * x);
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0))))));
  return shift + std::log(x) - 0.5 / x - series;
}

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) domain_error("log_gamma", x);
  if (x == 1.0 || x == 2.0) return 0.0;

  // Stirling series is accurate to ~1e-16 once x >= 10.
  double log_prod = 0.0;
  double prod = 1.0;
  while (x < 10.0) {
    prod *= x;
    if (prod > 1e280) {
      log_prod += std::log(prod);
      prod = 1.0;
    }
    x += 1.0;
  }
  log_prod += std::log(prod);

  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv * (1.0 / 12.0 -
             inv2 * (1.0 / 360.0 -
                     inv2 * (1.0 / 1260.0 -
                             inv2 * (1.0 / 1680.0 -
                                     inv2 * (1.0 / 1188.0 - inv2 * (691.0 / 360360.0))))));
  const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
  return (x - 0.5) * std::log(x) - x + half_log_two_pi + series - log_prod;
}

double log_ball_volume(std::size_t dim, Norm norm) {
  if (dim == 0) fail(ErrorKind::InvalidArgument, "log_ball_volume: dimension must be >= 1");
  const double d = static_cast<double>(dim);
  if (norm == Norm::LInf) return d * std::numbers::ln2;
  return 0.5 * d * std::log(std::numbers::pi) - log_gamma(0.5 * d + 1.0);
}

}  // namespace knnmi
