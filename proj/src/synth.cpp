#include "knnmi/synth.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "knnmi/error.hpp"
#include "knnmi/specfn.hpp"

namespace knnmi {

std::vector<double> cholesky(std::span<const double> a, std::size_t dim) {
  if (dim == 0 || a.size() != dim * dim)
    fail(ErrorKind::Validation, "covariance must be a square dim x dim matrix");
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < r; ++c) {
      const double x = a[r * dim + c], y = a[c * dim + r];
      if (!std::isfinite(x) || std::fabs(x - y) > 1e-12 * std::max(1.0, std::fabs(x)))
        fail(ErrorKind::Validation, "covariance matrix is not symmetric");
    }
  }
  std::vector<double> l(dim * dim, 0.0);
  for (std::size_t j = 0; j < dim; ++j) {
    double diag = a[j * dim + j];
    for (std::size_t p = 0; p < j; ++p) diag -= l[j * dim + p] * l[j * dim + p];
    if (!(diag > 0.0)) fail(ErrorKind::Validation, "covariance matrix is not positive definite");
    const double ljj = std::sqrt(diag);
    l[j * dim + j] = ljj;
    for (std::size_t i = j + 1; i < dim; ++i) {
      double v = a[i * dim + j];
      for (std::size_t p = 0; p < j; ++p) v -= l[i * dim + p] * l[j * dim + p];
      l[i * dim + j] = v / ljj;
    }
  }
  return l;
}

double log_det_spd(std::span<const double> matrix, std::size_t dim) {
  const auto l = cholesky(matrix, dim);
  double s = 0.0;
  for (std::size_t j = 0; j < dim; ++j) s += std::log(l[j * dim + j]);
  return 2.0 * s;
}

double beta_entropy(double a, double b) {
  const double log_beta = log_gamma(a) + log_gamma(b) - log_gamma(a + b);
  return log_beta - (a - 1.0) * digamma(a) - (b - 1.0) * digamma(b) +
         (a + b - 2.0) * digamma(a + b);
}

Distribution Distribution::uniform_cube(std::size_t dim) {
  if (dim == 0) fail(ErrorKind::Validation, "uniform cube needs dim >= 1");
  Distribution d;
  d.kind_ = Kind::UniformCube;
  d.dim_ = dim;
  return d;
}

Distribution Distribution::mvn(std::vector<double> mean, std::vector<double> covariance) {
  Distribution d;
  d.kind_ = Kind::Mvn;
  d.dim_ = mean.size();
  if (d.dim_ == 0) fail(ErrorKind::Validation, "mvn needs a non-empty mean");
  for (double m : mean)
    if (!std::isfinite(m)) fail(ErrorKind::Validation, "mvn mean must be finite");
  d.chol_ = cholesky(covariance, d.dim_);
  d.mean_ = std::move(mean);
  d.cov_ = std::move(covariance);
  return d;
}

Distribution Distribution::beta_iid(double alpha, double beta, std::size_t dim) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
    fail(ErrorKind::Validation, "beta parameters must be positive");
  if (dim == 0) fail(ErrorKind::Validation, "beta_iid needs dim >= 1");
  Distribution d;
  d.kind_ = Kind::BetaIid;
  d.dim_ = dim;
  d.alpha_ = alpha;
  d.beta_ = beta;
  return d;
}

std::string Distribution::describe() const {
  std::ostringstream s;
  s.precision(17);
  switch (kind_) {
    case Kind::UniformCube: s << "uniform_cube(" << dim_ << ")"; break;
    case Kind::Mvn: s << "mvn(" << dim_ << ")"; break;
    case Kind::BetaIid: s << "beta_iid(" << alpha_ << "," << beta_ << "," << dim_ << ")"; break;
  }
  return s.str();
}

Dataset Distribution::sample(std::size_t n, std::vector<std::size_t> group_dims,
                             PhiloxStream& rng) const {
  if (n < 2) fail(ErrorKind::InvalidArgument, "sample size must be at least 2");
  std::vector<double> values(n * dim_);
  std::vector<double> z(dim_);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = values.data() + i * dim_;
    switch (kind_) {
      case Kind::UniformCube:
        for (std::size_t c = 0; c < dim_; ++c) row[c] = rng.uniform();
        break;
      case Kind::BetaIid:
        for (std::size_t c = 0; c < dim_; ++c) row[c] = rng.beta(alpha_, beta_);
        break;
      case Kind::Mvn:
        for (std::size_t c = 0; c < dim_; ++c) z[c] = rng.normal();
        for (std::size_t r = 0; r < dim_; ++r) {
          double v = mean_[r];
          for (std::size_t c = 0; c <= r; ++c) v += chol_[r * dim_ + c] * z[c];
          row[r] = v;
        }
        break;
    }
  }
  return Dataset(std::move(values), dim_, std::move(group_dims));
}

Dataset Distribution::sample(std::size_t n, std::vector<std::size_t> group_dims,
                             std::uint64_t seed) const {
  PhiloxStream rng(seed);
  return sample(n, std::move(group_dims), rng);
}

double Distribution::entropy(std::span<const std::size_t> columns) const {
  if (columns.empty()) fail(ErrorKind::InvalidArgument, "entropy needs at least one column");
  for (std::size_t c : columns)
    if (c >= dim_) fail(ErrorKind::InvalidArgument, "column outside the distribution");
  const double d = static_cast<double>(columns.size());
  switch (kind_) {
    case Kind::UniformCube: return 0.0;
    case Kind::BetaIid: return d * beta_entropy(alpha_, beta_);
    case Kind::Mvn: {
      std::vector<double> sub;
      for (std::size_t r : columns)
        for (std::size_t c : columns) sub.push_back(cov_[r * dim_ + c]);
      return 0.5 * (d * std::log(2.0 * std::numbers::pi * std::numbers::e) +
                    log_det_spd(sub, columns.size()));
    }
  }
  return 0.0;
}

double Distribution::entropy() const {
  std::vector<std::size_t> all(dim_);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return entropy(all);
}

double Distribution::total_correlation(std::span<const std::size_t> group_dims) const {
  const std::size_t total = std::accumulate(group_dims.begin(), group_dims.end(), std::size_t{0});
  if (total != dim_ || group_dims.size() < 2)
    fail(ErrorKind::InvalidArgument, "group dimensions must partition the distribution");
  if (kind_ != Kind::Mvn) return 0.0;
  // sum_l 1/2 ln det S_ll - 1/2 ln det S; the 2*pi*e terms cancel.
  double value = -0.5 * log_det_spd(cov_, dim_);
  std::size_t first = 0;
  for (std::size_t d : group_dims) {
    std::vector<double> sub;
    for (std::size_t r = first; r < first + d; ++r)
      for (std::size_t c = first; c < first + d; ++c) sub.push_back(cov_[r * dim_ + c]);
    value += 0.5 * log_det_spd(sub, d);
    first += d;
  }
  return value;
}

double true_entropy(const Distribution& dist) { return dist.entropy(); }

double true_mi(const Distribution& dist, std::span<const std::size_t> group_dims) {
  return dist.total_correlation(group_dims);
}

}  // namespace knnmi
