#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "knnmi/dataset.hpp"
#include "knnmi/norm.hpp"
#include "knnmi/report.hpp"

namespace knnmi {

struct EntropyConfig {
  std::size_t k = 4;
  Norm norm = Norm::LInf;
  bool truncate = false;
  double delta = 0.5;
  /// Replaces the computed truncation radius; test hook only.
  std::optional<double> threshold_override;

  void validate() const;
};

/// ((ln N)^{1+delta} / N)^{1/dim}.
double truncation_threshold(std::size_t n, std::size_t dim, double delta);

/// Local KL terms -psi(k) + ln N + ln c_{d,p} + d ln rho_i for given radii.
std::vector<double> kl_local_terms(std::span<const double> rho, std::size_t dim, std::size_t k,
                                   Norm norm);

/// Kozachenko-Leonenko estimate over all columns of ds, in nats.
EstimateReport kl_entropy(const Dataset& ds, const EntropyConfig& cfg);
/// KL with local terms zeroed wherever rho exceeds the truncation radius.
EstimateReport truncated_kl_entropy(const Dataset& ds, const EntropyConfig& cfg);
/// Dispatches on cfg.truncate.
EstimateReport estimate_entropy(const Dataset& ds, const EntropyConfig& cfg);

}  // namespace knnmi
