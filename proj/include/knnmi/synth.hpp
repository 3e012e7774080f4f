#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "knnmi/dataset.hpp"
#include "knnmi/rng.hpp"

namespace knnmi {

class Distribution {
 public:
  enum class Kind { UniformCube, Mvn, BetaIid };

  static Distribution uniform_cube(std::size_t dim);
  /// Covariance is row-major dim x dim and must be symmetric positive definite.
  static Distribution mvn(std::vector<double> mean, std::vector<double> covariance);
  static Distribution beta_iid(double alpha, double beta, std::size_t dim);

  Kind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& covariance() const noexcept { return cov_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  std::string describe() const;

  /// Draws n rows from the stream; mvn applies the Cholesky factor to
  /// standard normals.
  Dataset sample(std::size_t n, std::vector<std::size_t> group_dims, PhiloxStream& rng) const;
  Dataset sample(std::size_t n, std::vector<std::size_t> group_dims, std::uint64_t seed) const;

  /// Differential entropy in nats of the marginal on the given columns.
  double entropy(std::span<const std::size_t> columns) const;
  double entropy() const;
  /// sum_l H(X_l) - H(X) for the column partition; 0 for product laws.
  double total_correlation(std::span<const std::size_t> group_dims) const;

 private:
  Distribution() = default;

  Kind kind_ = Kind::UniformCube;
  std::size_t dim_ = 0;
  std::vector<double> mean_;
  std::vector<double> cov_;
  std::vector<double> chol_;
  double alpha_ = 0.0;
  double beta_ = 0.0;
};

/// Lower-triangular Cholesky factor (row-major); throws Validation if the
/// matrix is not symmetric positive definite.
std::vector<double> cholesky(std::span<const double> matrix, std::size_t dim);
double log_det_spd(std::span<const double> matrix, std::size_t dim);

/// Closed forms used as ground truth.
double true_entropy(const Distribution& dist);
double true_mi(const Distribution& dist, std::span<const std::size_t> group_dims);
/// Entropy of Beta(a, b): ln B(a,b) - (a-1)psi(a) - (b-1)psi(b) + (a+b-2)psi(a+b).
double beta_entropy(double a, double b);

}  // namespace knnmi
