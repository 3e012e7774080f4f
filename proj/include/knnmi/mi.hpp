#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "knnmi/dataset.hpp"
#include "knnmi/knn.hpp"
#include "knnmi/norm.hpp"
#include "knnmi/report.hpp"

namespace knnmi {

enum class MiKind { ThreeKL, Ksg, BiKsg };

const char* to_string(MiKind kind);
std::optional<MiKind> parse_mi_kind(const std::string& text);

/// The norm each kind runs in: KSG is l_inf, BI-KSG is l_2, 3KL is free.
Norm default_norm(MiKind kind);

struct MiConfig {
  MiKind kind = MiKind::Ksg;
  std::size_t k = 4;
  /// Only 3KL accepts an explicit norm; KSG and BI-KSG reject a mismatch.
  std::optional<Norm> norm;
  bool truncate = false;
  double delta = 0.5;
  std::optional<double> threshold_override;
  /// Strict is accepted only by KSG (l_inf) and is off by default.
  Boundary boundary = Boundary::Inclusive;

  Norm effective_norm() const;
  void validate() const;
};

/// Ground-truth (H(X), H(Y), H(X,Y)) for local bias diagnostics.
struct TrueEntropies {
  double h_x = 0.0;
  double h_y = 0.0;
  double h_xy = 0.0;
};

/// H(X) + H(Y) - H(X,Y) with three independent KL radius searches.
EstimateReport mi_3kl(const Dataset& ds, std::size_t k, Norm norm = Norm::LInf);
/// psi(k) + ln N - mean(psi(n_x + 1) + psi(n_y + 1)), l_inf shared radius.
EstimateReport mi_ksg(const Dataset& ds, std::size_t k,
                      Boundary boundary = Boundary::Inclusive);
/// psi(k) + ln N + ln(c_dx c_dy / c_d) - mean(ln n_x + ln n_y), l_2 shared radius.
EstimateReport mi_biksg(const Dataset& ds, std::size_t k);
/// Truncated variants: samples with rho > a_N contribute 0.
EstimateReport mi_truncated(const Dataset& ds, const MiConfig& cfg);

EstimateReport estimate_mi(const Dataset& ds, const MiConfig& cfg);

/// Per-sample xi / iota decomposition, optionally with local biases.
LocalMiTerms decompose_local(const Dataset& ds, const MiConfig& cfg,
                             const std::optional<TrueEntropies>& truth = std::nullopt);
/// KSG form under l_inf, BI-KSG form under l_2.
LocalMiTerms decompose_local(const Dataset& ds, std::size_t k, Norm norm,
                             const std::optional<TrueEntropies>& truth = std::nullopt);

}  // namespace knnmi
