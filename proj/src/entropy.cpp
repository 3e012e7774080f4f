#include "knnmi/entropy.hpp"

#include <cmath>
#include <numeric>

#include "knnmi/error.hpp"
#include "knnmi/knn.hpp"
#include "knnmi/specfn.hpp"

namespace knnmi {

void EntropyConfig::validate() const {
  if (k < 1) fail(ErrorKind::InvalidArgument, "k must be at least 1");
  if (truncate && !(delta > 0.0)) fail(ErrorKind::InvalidArgument, "delta must be positive");
  if (threshold_override && !(*threshold_override >= 0.0))
    fail(ErrorKind::InvalidArgument, "threshold override must be nonnegative");
}

double truncation_threshold(std::size_t n, std::size_t dim, double delta) {
  if (n < 2) fail(ErrorKind::InvalidArgument, "truncation threshold needs N >= 2");
  if (dim < 1) fail(ErrorKind::InvalidArgument, "truncation threshold needs dim >= 1");
  const double nn = static_cast<double>(n);
  return std::pow(std::pow(std::log(nn), 1.0 + delta) / nn, 1.0 / static_cast<double>(dim));
}

std::vector<double> kl_local_terms(std::span<const double> rho, std::size_t dim, std::size_t k,
                                   Norm norm) {
  const double offset = -digamma(static_cast<double>(k)) +
                        std::log(static_cast<double>(rho.size())) + log_ball_volume(dim, norm);
  const double d = static_cast<double>(dim);
  std::vector<double> xi(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) xi[i] = offset + d * std::log(rho[i]);
  return xi;
}

namespace {

EstimateReport kl_impl(const Dataset& ds, const EntropyConfig& cfg, bool truncate) {
  cfg.validate();
  std::vector<std::size_t> cols(ds.cols());
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  const auto rho = knn_radii(ds, cols, cfg.k, cfg.norm);
  require_positive_radii(rho, ds.group_count() == 1 ? ds.group(0).name : "joint");

  EstimateReport report;
  report.method = truncate ? "kl_trunc" : "kl";
  report.k = cfg.k;
  report.norm = cfg.norm;
  report.samples = ds.rows();
  report.dims = {ds.cols()};
  report.local = kl_local_terms(rho, ds.cols(), cfg.k, cfg.norm);
  if (truncate) {
    const double a_n = cfg.threshold_override.value_or(
        truncation_threshold(ds.rows(), ds.cols(), cfg.delta));
    report.threshold = a_n;
    report.truncated.resize(ds.rows());
    for (std::size_t i = 0; i < rho.size(); ++i) {
      report.truncated[i] = rho[i] > a_n;
      if (report.truncated[i]) report.local[i] = 0.0;
    }
  }
  report.estimate = compensated_mean(report.local);
  return report;
}

}  // namespace

EstimateReport kl_entropy(const Dataset& ds, const EntropyConfig& cfg) {
  return kl_impl(ds, cfg, false);
}

EstimateReport truncated_kl_entropy(const Dataset& ds, const EntropyConfig& cfg) {
  return kl_impl(ds, cfg, true);
}

EstimateReport estimate_entropy(const Dataset& ds, const EntropyConfig& cfg) {
  return kl_impl(ds, cfg, cfg.truncate);
}

}  // namespace knnmi
