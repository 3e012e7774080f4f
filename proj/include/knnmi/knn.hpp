#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "knnmi/dataset.hpp"
#include "knnmi/norm.hpp"

namespace knnmi {

/// Dense row-major copy of a subset of a dataset's columns.
class PointSet {
 public:
  PointSet(const Dataset& ds, std::span<const std::size_t> columns);
  PointSet(std::vector<double> coords, std::size_t dim);

  std::size_t size() const noexcept { return size_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }

 private:
  std::vector<double> coords_;
  std::size_t size_ = 0;
  std::size_t dim_ = 0;
};

/// ||a - b||_p, accumulated in coordinate order. Every search path uses this
/// one function so that indexed and brute-force radii are bit-identical.
double distance(std::span<const double> a, std::span<const double> b, Norm norm);

/// Exact k-d tree over a PointSet for k-NN radii and inclusive range counts.
///
/// Nodes keep tight bounding boxes; pruning compares a lower bound on the
/// distance that is monotone under rounding, so no candidate within the
/// radius is ever skipped. Dimensions above kBruteForceDim fall back to a
/// linear scan.
class NeighborIndex {
 public:
  static constexpr std::size_t kBruteForceDim = 20;

  NeighborIndex(PointSet points, Norm norm);

  std::size_t size() const noexcept { return points_.size(); }
  std::size_t dim() const noexcept { return points_.dim(); }
  Norm norm() const noexcept { return norm_; }
  const PointSet& points() const noexcept { return points_; }

  /// Distance from point i to its k-th nearest other point (1 <= k <= N-1).
  double kth_nn_distance(std::size_t i, std::size_t k) const;
  /// Number of points j != i with distance(j, i) <= radius.
  std::size_t count_within(std::size_t i, double radius) const;
  /// Number of indexed points within radius of an arbitrary query.
  std::size_t count_within(std::span<const double> query, double radius) const;

 private:
  struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t left = 0;
    std::size_t right = 0;
    bool leaf = true;
  };

  std::size_t build(std::size_t begin, std::size_t end);
  double lower_bound(std::size_t node, std::span<const double> q) const;
  double upper_bound(std::size_t node, std::span<const double> q) const;
  void knn_search(std::size_t node, std::span<const double> q, std::size_t self, std::size_t k,
                  std::vector<double>& best) const;
  std::size_t range_count(std::size_t node, std::span<const double> q, double radius) const;

  PointSet points_;
  Norm norm_;
  bool brute_ = false;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::vector<double> box_lo_;
  std::vector<double> box_hi_;
};

/// Marginal count boundary. Inclusive counts ||.|| <= rho; Strict counts
/// ||.|| < rho, the convention of the original KSG software.
enum class Boundary { Inclusive, Strict };

const char* to_string(Boundary boundary);

/// Joint-space k-NN radii with per-subspace counts at that radius.
struct NeighborStats {
  std::vector<double> rho;
  /// counts[s][i]: samples j != i within rho[i] in subspace s.
  std::vector<std::vector<std::size_t>> counts;
  std::size_t k = 0;
  Norm norm = Norm::LInf;
  Boundary boundary = Boundary::Inclusive;
};

/// Groups-of-groups whose projections get counted; default is one per group.
using Subspaces = std::vector<std::vector<std::size_t>>;
Subspaces singleton_subspaces(const Dataset& ds);

/// Throws DuplicateSample naming the rows whose radius is zero.
void require_positive_radii(std::span<const double> rho, const std::string& space);

NeighborStats neighbor_stats(const Dataset& ds, std::size_t k, Norm norm);
NeighborStats neighbor_stats(const Dataset& ds, std::size_t k, Norm norm,
                             const Subspaces& subspaces,
                             Boundary boundary = Boundary::Inclusive);

/// O(N^2 d) reference with the same contract as neighbor_stats.
NeighborStats brute_force_stats(const Dataset& ds, std::size_t k, Norm norm);
NeighborStats brute_force_stats(const Dataset& ds, std::size_t k, Norm norm,
                                const Subspaces& subspaces,
                                Boundary boundary = Boundary::Inclusive);

/// k-NN radius of every sample in the given columns, without counts.
std::vector<double> knn_radii(const Dataset& ds, std::span<const std::size_t> columns,
                              std::size_t k, Norm norm);

/// Count of j != i within radius of sample i in one group's projection.
std::size_t count_within(const Dataset& ds, std::size_t group, std::size_t i, double radius,
                         Norm norm);

}  // namespace knnmi
