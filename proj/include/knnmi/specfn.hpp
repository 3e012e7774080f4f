#pragma once

#include <cstddef>

#include "knnmi/norm.hpp"

namespace knnmi {

/// Digamma function psi(x) = d/dx ln Gamma(x), for x > 0.
///
/// Shifts the argument upward past 10 with psi(x) = psi(x+1) - 1/x and then
/// applies the asymptotic expansion with Bernoulli numbers through B12.
/// Absolute error is below 1e-14 over the positive axis.
double digamma(double x);

/// ln Gamma(x) for x > 0.
double log_gamma(double x);

/// Natural log of the volume of the unit l_p ball in `dim` dimensions.
/// l_inf gives dim * ln 2 exactly; l_2 gives ln(pi^{d/2} / Gamma(d/2 + 1)).
double log_ball_volume(std::size_t dim, Norm norm);

}  // namespace knnmi
