#include "knnmi/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "knnmi/error.hpp"
#include "knnmi/rng.hpp"

namespace knnmi {

namespace {

std::vector<std::string> default_group_names(std::size_t count) {
  if (count == 1) return {"Z"};
  if (count == 2) return {"X", "Y"};
  std::vector<std::string> names;
  for (std::size_t g = 0; g < count; ++g) names.push_back("X" + std::to_string(g + 1));
  return names;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Dataset::Dataset(std::vector<double> values, std::size_t cols, std::vector<std::size_t> group_dims)
    : values_(std::move(values)), cols_(cols) {
  if (cols_ == 0) fail(ErrorKind::Validation, "dataset: column count must be positive");
  if (values_.size() % cols_ != 0)
    fail(ErrorKind::Validation, "dataset: value count is not a multiple of the column count");
  rows_ = values_.size() / cols_;
  if (rows_ < 2) fail(ErrorKind::Validation, "dataset: at least 2 samples are required");

  if (group_dims.empty()) group_dims.push_back(cols_);
  std::size_t total = 0;
  for (std::size_t d : group_dims) {
    if (d == 0) fail(ErrorKind::Validation, "dataset: group dimensions must be positive");
    total += d;
  }
  if (total != cols_) {
    fail(ErrorKind::Validation, "dataset: group dimensions sum to " + std::to_string(total) +
                                    " but the data has " + std::to_string(cols_) + " columns");
  }
  const auto names = default_group_names(group_dims.size());
  std::size_t first = 0;
  for (std::size_t g = 0; g < group_dims.size(); ++g) {
    groups_.push_back({names[g], first, group_dims[g]});
    first += group_dims[g];
  }

  for (std::size_t idx = 0; idx < values_.size(); ++idx) {
    if (!std::isfinite(values_[idx])) {
      fail(ErrorKind::Validation, "dataset: non-finite value at row " + std::to_string(idx / cols_) +
                                      ", column " + std::to_string(idx % cols_));
    }
  }
}

const Group& Dataset::group(std::size_t g) const {
  if (g >= groups_.size()) {
    fail(ErrorKind::InvalidArgument, "dataset: group id " + std::to_string(g) + " out of range");
  }
  return groups_[g];
}

std::vector<std::size_t> Dataset::group_dims() const {
  std::vector<std::size_t> dims;
  for (const auto& g : groups_) dims.push_back(g.dim);
  return dims;
}

std::vector<std::size_t> Dataset::columns_of(std::span<const std::size_t> group_ids) const {
  std::vector<std::size_t> cols;
  for (std::size_t g : group_ids) {
    const Group& grp = group(g);
    for (std::size_t c = 0; c < grp.dim; ++c) cols.push_back(grp.first_column + c);
  }
  return cols;
}

Dataset Dataset::select(std::span<const std::size_t> group_ids) const {
  const auto cols = columns_of(group_ids);
  if (cols.empty()) fail(ErrorKind::InvalidArgument, "dataset: empty group selection");
  std::vector<double> out;
  out.reserve(rows_ * cols.size());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t c : cols) out.push_back(at(i, c));
  Dataset sub(std::move(out), cols.size(), {cols.size()});
  std::string name;
  for (std::size_t g : group_ids) name += groups_[g].name;
  sub.groups_[0].name = name;
  return sub;
}

Dataset parse_csv(const std::string& text, std::vector<std::size_t> group_dims, bool has_header,
                  const std::string& source) {
  // No dims means a single group as wide as the first data row.
  std::size_t expected =
      std::accumulate(group_dims.begin(), group_dims.end(), std::size_t{0});
  const bool infer = group_dims.empty();
  if (!infer && std::find(group_dims.begin(), group_dims.end(), 0u) != group_dims.end())
    fail(ErrorKind::Ingestion, source + ": group dimensions must be positive");

  std::vector<double> values;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (trim(view).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::size_t fields = 0;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = view.find(',', start);
      const std::string_view field =
          trim(view.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                   : comma - start));
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
        fail(ErrorKind::Ingestion, source + ":" + std::to_string(line_no) + ": cannot parse field " +
                                       std::to_string(fields + 1) + " ('" + std::string(field) +
                                       "') as a real number");
      }
      if (!std::isfinite(value)) {
        fail(ErrorKind::Ingestion, source + ":" + std::to_string(line_no) +
                                       ": non-finite value in field " + std::to_string(fields + 1));
      }
      values.push_back(value);
      ++fields;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (infer && expected == 0) expected = fields;
    if (fields != expected) {
      fail(ErrorKind::Ingestion, source + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(expected) + " fields, found " +
                                     std::to_string(fields));
    }
  }
  if (expected == 0 || values.size() / expected < 2)
    fail(ErrorKind::Ingestion, source + ": at least 2 data rows are required");
  try {
    return Dataset(std::move(values), expected, std::move(group_dims));
  } catch (const Error& e) {
    fail(ErrorKind::Ingestion, source + ": " + e.what());
  }
}

Dataset load_csv(const std::string& path, std::vector<std::size_t> group_dims, bool has_header) {
  std::ifstream file(path, std::ios::binary);
  if (!file) fail(ErrorKind::Ingestion, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_csv(buffer.str(), std::move(group_dims), has_header, path);
}

void DegeneracyPolicy::validate() const {
  if (!(jitter_scale >= 0.0) || !std::isfinite(jitter_scale))
    fail(ErrorKind::InvalidArgument, "jitter scale must be a finite nonnegative number");
  if (mode == DegeneracyMode::Jitter && jitter_scale <= 0.0)
    fail(ErrorKind::InvalidArgument, "jitter mode requires a positive jitter scale");
  if (mode == DegeneracyMode::Error && jitter_scale != 0.0)
    fail(ErrorKind::InvalidArgument, "jitter scale is only meaningful in jitter mode");
}

std::vector<std::pair<std::size_t, std::size_t>> find_duplicate_rows(
    const Dataset& ds, std::span<const std::size_t> columns) {
  std::vector<std::size_t> order(ds.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    for (std::size_t c : columns) {
      if (ds.at(a, c) != ds.at(b, c)) return ds.at(a, c) < ds.at(b, c);
    }
    return a < b;
  };
  auto equal = [&](std::size_t a, std::size_t b) {
    return std::all_of(columns.begin(), columns.end(),
                       [&](std::size_t c) { return ds.at(a, c) == ds.at(b, c); });
  };
  std::sort(order.begin(), order.end(), less);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t run = 0; run < order.size();) {
    std::size_t end = run + 1;
    while (end < order.size() && equal(order[run], order[end])) ++end;
    for (std::size_t a = run; a < end; ++a)
      for (std::size_t b = a + 1; b < end; ++b)
        pairs.emplace_back(std::min(order[a], order[b]), std::max(order[a], order[b]));
    run = end;
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

Dataset check_duplicates(const Dataset& ds, const DegeneracyPolicy& policy, std::uint64_t seed) {
  policy.validate();
  std::vector<std::size_t> all(ds.cols());
  std::iota(all.begin(), all.end(), std::size_t{0});

  if (policy.mode == DegeneracyMode::Error) {
    const auto dups = find_duplicate_rows(ds, all);
    if (!dups.empty()) {
      std::ostringstream msg;
      msg << "duplicate samples in joint space: rows";
      const std::size_t shown = std::min<std::size_t>(dups.size(), 10);
      for (std::size_t p = 0; p < shown; ++p)
        msg << (p ? ", " : " ") << "(" << dups[p].first << ", " << dups[p].second << ")";
      if (dups.size() > shown) msg << " and " << dups.size() - shown << " more pairs";
      fail(ErrorKind::DuplicateSample, msg.str());
    }
    return ds;
  }

  PhiloxStream rng(seed, 0x6a177e5u, 0);
  const double scale = policy.jitter_scale;
  std::vector<double> out = ds.values();
  for (double& v : out) {
    const double original = v;
    double moved = original + rng.uniform(-scale, scale);
    // Rounding of the sum can push the shift a hair past the scale.
    while (std::fabs(moved - original) > scale) moved = std::nextafter(moved, original);
    v = moved;
  }
  Dataset jittered(std::move(out), ds.cols(), ds.group_dims());
  if (!find_duplicate_rows(jittered, all).empty())
    fail(ErrorKind::DuplicateSample, "duplicate samples remain after jitter; increase the scale");
  return jittered;
}

}  // namespace knnmi
