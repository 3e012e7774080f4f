#include "knnmi/mi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "knnmi/entropy.hpp"
#include "knnmi/error.hpp"
#include "knnmi/knn.hpp"
#include "knnmi/specfn.hpp"

namespace knnmi {

const char* to_string(MiKind kind) {
  switch (kind) {
    case MiKind::ThreeKL: return "3kl";
    case MiKind::Ksg: return "ksg";
    case MiKind::BiKsg: return "biksg";
  }
  return "?";
}

std::optional<MiKind> parse_mi_kind(const std::string& text) {
  if (text == "3kl" || text == "threekl") return MiKind::ThreeKL;
  if (text == "ksg") return MiKind::Ksg;
  if (text == "biksg" || text == "bi-ksg") return MiKind::BiKsg;
  return std::nullopt;
}

Norm default_norm(MiKind kind) { return kind == MiKind::BiKsg ? Norm::L2 : Norm::LInf; }

Norm MiConfig::effective_norm() const { return norm.value_or(default_norm(kind)); }

void MiConfig::validate() const {
  if (k < 1) fail(ErrorKind::InvalidArgument, "k must be at least 1");
  if (norm && kind != MiKind::ThreeKL && *norm != default_norm(kind)) {
    fail(ErrorKind::InvalidArgument, std::string(to_string(kind)) + " is defined only for the " +
                                         to_string(default_norm(kind)) + " norm");
  }
  if (boundary == Boundary::Strict && kind != MiKind::Ksg)
    fail(ErrorKind::InvalidArgument, "the strict count boundary applies only to ksg");
  if (truncate && !(delta > 0.0)) fail(ErrorKind::InvalidArgument, "delta must be positive");
  if (threshold_override && !(*threshold_override >= 0.0))
    fail(ErrorKind::InvalidArgument, "threshold override must be nonnegative");
}

namespace {

struct PairShape {
  std::size_t dx;
  std::size_t dy;
};

PairShape require_pair(const Dataset& ds) {
  if (ds.group_count() != 2) {
    fail(ErrorKind::InvalidArgument, "pairwise mutual information needs exactly 2 groups, got " +
                                         std::to_string(ds.group_count()));
  }
  return {ds.group(0).dim, ds.group(1).dim};
}

void attach_biases(LocalMiTerms& t, const std::optional<TrueEntropies>& truth) {
  if (!truth) return;
  const std::size_t n = t.iota.size();
  t.b_x.resize(n);
  t.b_y.resize(n);
  t.b_z.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.b_x[i] = t.xi_x[i] - truth->h_x;
    t.b_y[i] = t.xi_y[i] - truth->h_y;
    t.b_z[i] = t.xi_z[i] - truth->h_xy;
  }
}

EstimateReport three_kl(const Dataset& ds, const MiConfig& cfg,
                        const std::optional<TrueEntropies>& truth) {
  const auto [dx, dy] = require_pair(ds);
  const Norm norm = cfg.effective_norm();
  const std::size_t n = ds.rows();
  const std::size_t x_ids[] = {0};
  const std::size_t y_ids[] = {1};
  const std::size_t xy_ids[] = {0, 1};
  const auto rho_x = knn_radii(ds, ds.columns_of(x_ids), cfg.k, norm);
  require_positive_radii(rho_x, ds.group(0).name);
  const auto rho_y = knn_radii(ds, ds.columns_of(y_ids), cfg.k, norm);
  require_positive_radii(rho_y, ds.group(1).name);
  const auto rho_z = knn_radii(ds, ds.columns_of(xy_ids), cfg.k, norm);
  require_positive_radii(rho_z, "joint");

  LocalMiTerms t;
  t.xi_x = kl_local_terms(rho_x, dx, cfg.k, norm);
  t.xi_y = kl_local_terms(rho_y, dy, cfg.k, norm);
  t.xi_z = kl_local_terms(rho_z, dx + dy, cfg.k, norm);

  EstimateReport report;
  // Each entropy term is truncated against the radius for its own dimension.
  double a_x = 0.0, a_y = 0.0, a_z = 0.0;
  if (cfg.truncate) {
    a_x = cfg.threshold_override.value_or(truncation_threshold(n, dx, cfg.delta));
    a_y = cfg.threshold_override.value_or(truncation_threshold(n, dy, cfg.delta));
    a_z = cfg.threshold_override.value_or(truncation_threshold(n, dx + dy, cfg.delta));
    report.threshold = a_z;
    report.truncated.resize(n);
  }
  t.iota.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double hx = t.xi_x[i], hy = t.xi_y[i], hz = t.xi_z[i];
    if (cfg.truncate) {
      if (rho_x[i] > a_x) hx = 0.0;
      if (rho_y[i] > a_y) hy = 0.0;
      if (rho_z[i] > a_z) hz = 0.0;
      report.truncated[i] = rho_z[i] > a_z;
    }
    t.iota[i] = hx + hy - hz;
  }
  report.estimate = compensated_mean(t.iota);
  report.local = t.iota;
  attach_biases(t, truth);
  report.mi_terms = std::move(t);
  return report;
}

EstimateReport shared_radius(const Dataset& ds, const MiConfig& cfg,
                             const std::optional<TrueEntropies>& truth) {
  const auto [dx, dy] = require_pair(ds);
  const bool bias_improved = cfg.kind == MiKind::BiKsg;
  const Norm norm = bias_improved ? Norm::L2 : Norm::LInf;
  const std::size_t n = ds.rows();
  const NeighborStats stats =
      neighbor_stats(ds, cfg.k, norm, singleton_subspaces(ds), cfg.boundary);

  const double log_n = std::log(static_cast<double>(n));
  const double psi_k = digamma(static_cast<double>(cfg.k));
  const double log_cx = log_ball_volume(dx, norm);
  const double log_cy = log_ball_volume(dy, norm);
  // KSG's joint ball is the product of l_inf marginal balls; BI-KSG uses the l_2 ball.
  const double log_cz = bias_improved ? log_ball_volume(dx + dy, norm) : log_cx + log_cy;
  const double volume_term = bias_improved ? log_cx + log_cy - log_cz : 0.0;

  auto marginal_correction = [&](std::size_t count) {
    return bias_improved ? std::log(static_cast<double>(count))
                         : digamma(static_cast<double>(count) + 1.0);
  };

  EstimateReport report;
  double a_n = 0.0;
  if (cfg.truncate) {
    a_n = cfg.threshold_override.value_or(truncation_threshold(n, dx + dy, cfg.delta));
    report.threshold = a_n;
    report.truncated.resize(n);
  }

  LocalMiTerms t;
  t.iota.resize(n);
  t.xi_x.resize(n);
  t.xi_y.resize(n);
  t.xi_z.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double log_rho = std::log(stats.rho[i]);
    const double fx = marginal_correction(stats.counts[0][i]);
    const double fy = marginal_correction(stats.counts[1][i]);
    t.xi_x[i] = -fx + log_n + log_cx + static_cast<double>(dx) * log_rho;
    t.xi_y[i] = -fy + log_n + log_cy + static_cast<double>(dy) * log_rho;
    t.xi_z[i] = -psi_k + log_n + log_cz + static_cast<double>(dx + dy) * log_rho;
    t.iota[i] = psi_k + log_n + volume_term - fx - fy;
    if (cfg.truncate && stats.rho[i] > a_n) {
      report.truncated[i] = true;
      t.iota[i] = 0.0;
    }
  }
  report.estimate = compensated_mean(t.iota);
  report.local = t.iota;
  attach_biases(t, truth);
  report.mi_terms = std::move(t);

  if (bias_improved) {
    const double ratio = std::max(static_cast<double>(dx) / static_cast<double>(dy),
                                  static_cast<double>(dy) / static_cast<double>(dx));
    if (static_cast<double>(cfg.k) <= ratio) {
      std::ostringstream msg;
      msg << "k=" << cfg.k << " does not exceed max(dx/dy, dy/dx)=" << ratio
          << "; BI-KSG consistency is only guaranteed above that value";
      report.warnings.push_back(msg.str());
    }
  }
  return report;
}

EstimateReport compute(const Dataset& ds, const MiConfig& cfg,
                       const std::optional<TrueEntropies>& truth) {
  cfg.validate();
  EstimateReport report =
      cfg.kind == MiKind::ThreeKL ? three_kl(ds, cfg, truth) : shared_radius(ds, cfg, truth);
  report.method = std::string(to_string(cfg.kind)) + (cfg.truncate ? "_trunc" : "");
  report.k = cfg.k;
  report.norm = cfg.effective_norm();
  report.samples = ds.rows();
  report.dims = ds.group_dims();
  return report;
}

}  // namespace

EstimateReport mi_3kl(const Dataset& ds, std::size_t k, Norm norm) {
  MiConfig cfg;
  cfg.kind = MiKind::ThreeKL;
  cfg.k = k;
  cfg.norm = norm;
  return compute(ds, cfg, std::nullopt);
}

EstimateReport mi_ksg(const Dataset& ds, std::size_t k, Boundary boundary) {
  MiConfig cfg;
  cfg.kind = MiKind::Ksg;
  cfg.k = k;
  cfg.boundary = boundary;
  return compute(ds, cfg, std::nullopt);
}

EstimateReport mi_biksg(const Dataset& ds, std::size_t k) {
  MiConfig cfg;
  cfg.kind = MiKind::BiKsg;
  cfg.k = k;
  return compute(ds, cfg, std::nullopt);
}

EstimateReport mi_truncated(const Dataset& ds, const MiConfig& cfg) {
  MiConfig truncated = cfg;
  truncated.truncate = true;
  return compute(ds, truncated, std::nullopt);
}

EstimateReport estimate_mi(const Dataset& ds, const MiConfig& cfg) {
  return compute(ds, cfg, std::nullopt);
}

LocalMiTerms decompose_local(const Dataset& ds, const MiConfig& cfg,
                             const std::optional<TrueEntropies>& truth) {
  return *compute(ds, cfg, truth).mi_terms;
}

LocalMiTerms decompose_local(const Dataset& ds, std::size_t k, Norm norm,
                             const std::optional<TrueEntropies>& truth) {
  MiConfig cfg;
  cfg.kind = norm == Norm::L2 ? MiKind::BiKsg : MiKind::Ksg;
  cfg.k = k;
  return decompose_local(ds, cfg, truth);
}

}  // namespace knnmi
