#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "knnmi/norm.hpp"

namespace knnmi {

/// Per-sample pieces of a pairwise MI estimate.
///
/// iota[i] = xi_x[i] + xi_y[i] - xi_z[i] for every sample that was not
/// truncated; truncated samples carry iota[i] = 0 and their untruncated xi.
/// The b_* vectors are xi_* minus the supplied ground-truth entropies and
/// are empty when no ground truth was given.
struct LocalMiTerms {
  std::vector<double> iota;
  std::vector<double> xi_x;
  std::vector<double> xi_y;
  std::vector<double> xi_z;
  std::vector<double> b_x;
  std::vector<double> b_y;
  std::vector<double> b_z;
};

struct EstimateReport {
  std::string method;
  double estimate = 0.0;
  std::size_t k = 0;
  Norm norm = Norm::LInf;
  std::size_t samples = 0;
  std::vector<std::size_t> dims;
  /// Per-sample terms whose mean is the estimate (xi for entropy, iota for MI).
  std::vector<double> local;
  /// Set when truncation was applied.
  std::optional<double> threshold;
  std::vector<bool> truncated;
  std::optional<LocalMiTerms> mi_terms;
  std::vector<std::string> warnings;
};

/// Neumaier-compensated sum in index order.
double compensated_sum(std::span<const double> values);
inline double compensated_mean(std::span<const double> values) {
  return compensated_sum(values) / static_cast<double>(values.size());
}

}  // namespace knnmi
