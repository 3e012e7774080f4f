#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace knnmi {

/// A contiguous block of columns forming one variable (X, Y, or X_l).
struct Group {
  std::string name;
  std::size_t first_column = 0;
  std::size_t dim = 0;
};

/// N x d matrix of finite samples, row-major, partitioned into column groups.
///
/// Immutable once constructed; every constructor path validates finiteness,
/// N >= 2 and that the group dimensions partition the columns.
class Dataset {
 public:
  Dataset(std::vector<double> values, std::size_t cols, std::vector<std::size_t> group_dims);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t group_count() const noexcept { return groups_.size(); }
  const std::vector<Group>& groups() const noexcept { return groups_; }
  const Group& group(std::size_t g) const;
  std::vector<std::size_t> group_dims() const;

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }
  double at(std::size_t i, std::size_t c) const { return values_[i * cols_ + c]; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Column indices covered by the given groups, in group order.
  std::vector<std::size_t> columns_of(std::span<const std::size_t> group_ids) const;
  /// New single-group dataset holding only the listed groups' columns.
  Dataset select(std::span<const std::size_t> group_ids) const;

 private:
  std::vector<double> values_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Group> groups_;
};

/// Reads a comma-separated file of reals; the optional header line is skipped.
/// Empty group_dims reads every column as one group.
Dataset load_csv(const std::string& path, std::vector<std::size_t> group_dims, bool has_header);
Dataset parse_csv(const std::string& text, std::vector<std::size_t> group_dims, bool has_header,
                  const std::string& source = "<memory>");

enum class DegeneracyMode { Error, Jitter };

struct DegeneracyPolicy {
  DegeneracyMode mode = DegeneracyMode::Error;
  double jitter_scale = 0.0;

  void validate() const;
};

/// Pairs (i, j), i < j, of identical rows in the given column subset.
std::vector<std::pair<std::size_t, std::size_t>> find_duplicate_rows(
    const Dataset& ds, std::span<const std::size_t> columns);

/// Enforces the duplicate policy on the joint space: throws a
/// DuplicateSample error naming offending rows, or returns a copy with
/// seeded uniform noise in [-jitter_scale, jitter_scale] added to every entry.
Dataset check_duplicates(const Dataset& ds, const DegeneracyPolicy& policy, std::uint64_t seed);

}  // namespace knnmi
