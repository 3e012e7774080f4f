#include "knnmi/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "knnmi/error.hpp"
#include "knnmi/parallel.hpp"

namespace knnmi {

namespace {

constexpr std::size_t kLeafSize = 12;

void check_k(std::size_t k, std::size_t n) {
  if (k < 1 || k >= n) {
    fail(ErrorKind::InvalidArgument, "k must satisfy 1 <= k <= N-1 (k=" + std::to_string(k) +
                                         ", N=" + std::to_string(n) + ")");
  }
}

void check_radius(double radius) {
  if (!(radius >= 0.0)) fail(ErrorKind::InvalidArgument, "radius must be nonnegative");
}

// Keeps the k smallest distances seen so far in ascending order.
inline void offer(std::vector<double>& best, std::size_t k, double d) {
  if (best.size() == k) {
    if (!(d < best.back())) return;
    best.pop_back();
  }
  best.insert(std::upper_bound(best.begin(), best.end(), d), d);
}

}  // namespace

PointSet::PointSet(const Dataset& ds, std::span<const std::size_t> columns)
    : size_(ds.rows()), dim_(columns.size()) {
  if (dim_ == 0) fail(ErrorKind::InvalidArgument, "point set needs at least one column");
  coords_.reserve(size_ * dim_);
  for (std::size_t i = 0; i < size_; ++i)
    for (std::size_t c : columns) coords_.push_back(ds.at(i, c));
}

PointSet::PointSet(std::vector<double> coords, std::size_t dim)
    : coords_(std::move(coords)), dim_(dim) {
  if (dim_ == 0 || coords_.size() % dim_ != 0)
    fail(ErrorKind::InvalidArgument, "point set coordinates do not match the dimension");
  size_ = coords_.size() / dim_;
}

double distance(std::span<const double> a, std::span<const double> b, Norm norm) {
  const std::size_t dim = a.size();
  if (norm == Norm::LInf) {
    double m = 0.0;
    for (std::size_t c = 0; c < dim; ++c) m = std::max(m, std::fabs(a[c] - b[c]));
    return m;
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    const double diff = a[c] - b[c];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

NeighborIndex::NeighborIndex(PointSet points, Norm norm)
    : points_(std::move(points)), norm_(norm), brute_(points_.dim() > kBruteForceDim) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (!brute_) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, points_.size());
  }
}

std::size_t NeighborIndex::build(std::size_t begin, std::size_t end) {
  const std::size_t dim = points_.dim();
  const std::size_t id = nodes_.size();
  nodes_.push_back({begin, end, 0, 0, true});
  box_lo_.resize((id + 1) * dim);
  box_hi_.resize((id + 1) * dim);

  std::size_t split_dim = 0;
  double widest = -1.0;
  for (std::size_t c = 0; c < dim; ++c) {
    double lo = points_.point(order_[begin])[c];
    double hi = lo;
    for (std::size_t p = begin + 1; p < end; ++p) {
      const double v = points_.point(order_[p])[c];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    box_lo_[id * dim + c] = lo;
    box_hi_[id * dim + c] = hi;
    if (hi - lo > widest) {
      widest = hi - lo;
      split_dim = c;
    }
  }
  if (end - begin <= kLeafSize || widest <= 0.0) return id;

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::size_t a, std::size_t b) {
                     return points_.point(a)[split_dim] < points_.point(b)[split_dim];
                   });
  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  nodes_[id].leaf = false;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

double NeighborIndex::lower_bound(std::size_t node, std::span<const double> q) const {
  const std::size_t dim = points_.dim();
  const double* lo = box_lo_.data() + node * dim;
  const double* hi = box_hi_.data() + node * dim;
  double acc = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    double gap = 0.0;
    if (q[c] < lo[c]) {
      gap = lo[c] - q[c];
    } else if (q[c] > hi[c]) {
      gap = q[c] - hi[c];
    }
    if (norm_ == Norm::LInf) {
      acc = std::max(acc, gap);
    } else {
      acc += gap * gap;
    }
  }
  return norm_ == Norm::LInf ? acc : std::sqrt(acc);
}

double NeighborIndex::upper_bound(std::size_t node, std::span<const double> q) const {
  const std::size_t dim = points_.dim();
  const double* lo = box_lo_.data() + node * dim;
  const double* hi = box_hi_.data() + node * dim;
  double acc = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    const double far = std::max(std::fabs(q[c] - lo[c]), std::fabs(hi[c] - q[c]));
    if (norm_ == Norm::LInf) {
      acc = std::max(acc, far);
    } else {
      acc += far * far;
    }
  }
  return norm_ == Norm::LInf ? acc : std::sqrt(acc);
}

void NeighborIndex::knn_search(std::size_t node, std::span<const double> q, std::size_t self,
                               std::size_t k, std::vector<double>& best) const {
  const Node& n = nodes_[node];
  if (n.leaf) {
    for (std::size_t p = n.begin; p < n.end; ++p) {
      const std::size_t j = order_[p];
      if (j == self) continue;
      offer(best, k, distance(q, points_.point(j), norm_));
    }
    return;
  }
  const double dl = lower_bound(n.left, q);
  const double dr = lower_bound(n.right, q);
  const std::size_t first = dl <= dr ? n.left : n.right;
  const std::size_t second = dl <= dr ? n.right : n.left;
  const double d_first = std::min(dl, dr);
  const double d_second = std::max(dl, dr);
  if (best.size() < k || !(d_first > best.back())) knn_search(first, q, self, k, best);
  if (best.size() < k || !(d_second > best.back())) knn_search(second, q, self, k, best);
}

double NeighborIndex::kth_nn_distance(std::size_t i, std::size_t k) const {
  check_k(k, size());
  if (i >= size()) fail(ErrorKind::InvalidArgument, "sample index out of range");
  const auto q = points_.point(i);
  if (brute_) {
    std::vector<double> all;
    all.reserve(size() - 1);
    for (std::size_t j = 0; j < size(); ++j)
      if (j != i) all.push_back(distance(q, points_.point(j), norm_));
    std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k - 1), all.end());
    return all[k - 1];
  }
  std::vector<double> best;
  best.reserve(k + 1);
  knn_search(0, q, i, k, best);
  return best.back();
}

std::size_t NeighborIndex::range_count(std::size_t node, std::span<const double> q,
                                       double radius) const {
  if (lower_bound(node, q) > radius) return 0;
  const Node& n = nodes_[node];
  if (upper_bound(node, q) <= radius) return n.end - n.begin;
  if (n.leaf) {
    std::size_t count = 0;
    for (std::size_t p = n.begin; p < n.end; ++p)
      if (distance(q, points_.point(order_[p]), norm_) <= radius) ++count;
    return count;
  }
  return range_count(n.left, q, radius) + range_count(n.right, q, radius);
}

std::size_t NeighborIndex::count_within(std::span<const double> query, double radius) const {
  check_radius(radius);
  if (query.size() != dim()) fail(ErrorKind::InvalidArgument, "query dimension mismatch");
  if (brute_) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < size(); ++j)
      if (distance(query, points_.point(j), norm_) <= radius) ++count;
    return count;
  }
  return range_count(0, query, radius);
}

std::size_t NeighborIndex::count_within(std::size_t i, double radius) const {
  if (i >= size()) fail(ErrorKind::InvalidArgument, "sample index out of range");
  // The query point itself is at distance 0 and always inside.
  return count_within(points_.point(i), radius) - 1;
}

Subspaces singleton_subspaces(const Dataset& ds) {
  Subspaces s;
  for (std::size_t g = 0; g < ds.group_count(); ++g) s.push_back({g});
  return s;
}

void require_positive_radii(std::span<const double> rho, const std::string& space) {
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < rho.size(); ++i)
    if (!(rho[i] > 0.0)) bad.push_back(i);
  if (bad.empty()) return;
  std::ostringstream msg;
  msg << "duplicate samples in " << space << " space: zero k-NN distance at rows";
  const std::size_t shown = std::min<std::size_t>(bad.size(), 10);
  for (std::size_t p = 0; p < shown; ++p) msg << (p ? ", " : " ") << bad[p];
  if (bad.size() > shown) msg << " and " << bad.size() - shown << " more";
  fail(ErrorKind::DuplicateSample, msg.str());
}

namespace {

std::vector<std::size_t> all_columns(const Dataset& ds) {
  std::vector<std::size_t> cols(ds.cols());
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  return cols;
}

std::string joint_space_name(const Dataset& ds) {
  if (ds.group_count() == 1) return ds.group(0).name;
  std::string name;
  for (const auto& g : ds.groups()) name += g.name;
  return name;
}

// d < r holds exactly when d <= the largest double below r.
double count_radius(double rho, Boundary boundary) {
  return boundary == Boundary::Strict ? std::nextafter(rho, 0.0) : rho;
}

}  // namespace

const char* to_string(Boundary boundary) {
  return boundary == Boundary::Strict ? "strict" : "inclusive";
}

NeighborStats neighbor_stats(const Dataset& ds, std::size_t k, Norm norm) {
  return neighbor_stats(ds, k, norm, singleton_subspaces(ds));
}

NeighborStats neighbor_stats(const Dataset& ds, std::size_t k, Norm norm,
                             const Subspaces& subspaces, Boundary boundary) {
  const std::size_t n = ds.rows();
  check_k(k, n);
  const auto joint_cols = all_columns(ds);
  const NeighborIndex joint(PointSet(ds, joint_cols), norm);
  std::vector<NeighborIndex> marginals;
  marginals.reserve(subspaces.size());
  for (const auto& s : subspaces) marginals.emplace_back(PointSet(ds, ds.columns_of(s)), norm);

  NeighborStats stats;
  stats.k = k;
  stats.norm = norm;
  stats.boundary = boundary;
  stats.rho.resize(n);
  stats.counts.assign(subspaces.size(), std::vector<std::size_t>(n));
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) stats.rho[i] = joint.kth_nn_distance(i, k);
  });
  require_positive_radii(stats.rho, joint_space_name(ds));
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t s = 0; s < marginals.size(); ++s)
        stats.counts[s][i] = marginals[s].count_within(i, count_radius(stats.rho[i], boundary));
  });
  return stats;
}

NeighborStats brute_force_stats(const Dataset& ds, std::size_t k, Norm norm) {
  return brute_force_stats(ds, k, norm, singleton_subspaces(ds));
}

NeighborStats brute_force_stats(const Dataset& ds, std::size_t k, Norm norm,
                                const Subspaces& subspaces, Boundary boundary) {
  const std::size_t n = ds.rows();
  check_k(k, n);
  std::vector<std::vector<std::size_t>> sub_cols;
  for (const auto& s : subspaces) sub_cols.push_back(ds.columns_of(s));

  auto project = [&](std::size_t i, const std::vector<std::size_t>& cols) {
    std::vector<double> p;
    p.reserve(cols.size());
    for (std::size_t c : cols) p.push_back(ds.at(i, c));
    return p;
  };

  NeighborStats stats;
  stats.k = k;
  stats.norm = norm;
  stats.boundary = boundary;
  stats.rho.resize(n);
  stats.counts.assign(subspaces.size(), std::vector<std::size_t>(n, 0));
  std::vector<double> dists(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t w = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) dists[w++] = distance(ds.row(i), ds.row(j), norm);
    std::sort(dists.begin(), dists.end());
    stats.rho[i] = dists[k - 1];
  }
  require_positive_radii(stats.rho, joint_space_name(ds));
  for (std::size_t s = 0; s < subspaces.size(); ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto pi = project(i, sub_cols[s]);
      std::size_t count = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double d = distance(pi, project(j, sub_cols[s]), norm);
        if (boundary == Boundary::Strict ? d < stats.rho[i] : d <= stats.rho[i]) ++count;
      }
      stats.counts[s][i] = count;
    }
  }
  return stats;
}

std::vector<double> knn_radii(const Dataset& ds, std::span<const std::size_t> columns,
                              std::size_t k, Norm norm) {
  check_k(k, ds.rows());
  const NeighborIndex index(PointSet(ds, columns), norm);
  std::vector<double> rho(ds.rows());
  parallel_for(ds.rows(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) rho[i] = index.kth_nn_distance(i, k);
  });
  return rho;
}

std::size_t count_within(const Dataset& ds, std::size_t group, std::size_t i, double radius,
                         Norm norm) {
  check_radius(radius);
  if (i >= ds.rows()) fail(ErrorKind::InvalidArgument, "sample index out of range");
  const std::size_t ids[] = {group};
  const auto cols = ds.columns_of(ids);
  std::vector<double> pi;
  for (std::size_t c : cols) pi.push_back(ds.at(i, c));
  std::size_t count = 0;
  std::vector<double> pj(cols.size());
  for (std::size_t j = 0; j < ds.rows(); ++j) {
    if (j == i) continue;
    for (std::size_t c = 0; c < cols.size(); ++c) pj[c] = ds.at(j, cols[c]);
    if (distance(pi, pj, norm) <= radius) ++count;
  }
  return count;
}

}  // namespace knnmi
