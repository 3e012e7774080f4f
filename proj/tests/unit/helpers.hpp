#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "knnmi/dataset.hpp"
#include "knnmi/rng.hpp"

namespace testing {

// Continuous draws; ties have probability zero.
inline knnmi::Dataset random_dataset(std::size_t n, std::vector<std::size_t> dims,
                                     std::uint64_t seed, bool gaussian = false) {
  std::size_t cols = 0;
  for (auto d : dims) cols += d;
  knnmi::PhiloxStream rng(seed, 77);
  std::vector<double> v(n * cols);
  for (auto& x : v) x = gaussian ? rng.normal() : rng.uniform();
  return knnmi::Dataset(std::move(v), cols, std::move(dims));
}

// Multiples of 2^-20 in [0, 1): shifting by integers and scaling by powers of
// two are exact, so invariance checks can demand bit equality.
inline knnmi::Dataset dyadic_dataset(std::size_t n, std::vector<std::size_t> dims,
                                     std::uint64_t seed) {
  std::size_t cols = 0;
  for (auto d : dims) cols += d;
  knnmi::PhiloxStream rng(seed, 78);
  std::vector<double> v(n * cols);
  for (auto& x : v) x = std::ldexp(static_cast<double>(rng.next_u32() >> 12), -20);
  return knnmi::Dataset(std::move(v), cols, std::move(dims));
}

inline knnmi::Dataset transform(const knnmi::Dataset& ds, double scale, double shift) {
  std::vector<double> v = ds.values();
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = v[i] * scale + shift * static_cast<double>(1 + i % ds.cols());
  return knnmi::Dataset(std::move(v), ds.cols(), ds.group_dims());
}

inline knnmi::Dataset permute_rows(const knnmi::Dataset& ds, const std::vector<std::size_t>& perm) {
  std::vector<double> v;
  v.reserve(ds.values().size());
  for (std::size_t i : perm)
    for (double x : ds.row(i)) v.push_back(x);
  return knnmi::Dataset(std::move(v), ds.cols(), ds.group_dims());
}

inline std::vector<std::size_t> reversed_then_rotated(std::size_t n) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = (n - 1 - i + 7) % n;
  return perm;
}

}  // namespace testing
