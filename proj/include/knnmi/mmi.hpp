#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "knnmi/dataset.hpp"
#include "knnmi/knn.hpp"
#include "knnmi/norm.hpp"
#include "knnmi/report.hpp"

namespace knnmi {

/// Exact rational coefficient, always stored in lowest terms with den > 0.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  /// Accepts "p/q", "p", or a terminating decimal such as "-0.5".
  static Rational parse(const std::string& text);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

  Rational operator+(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator-() const { return Rational(-num_, den_); }
  bool operator==(const Rational& o) const = default;
  bool is_zero() const noexcept { return num_ == 0; }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

struct SetTerm {
  std::vector<std::size_t> groups;  // sorted, unique
  Rational coeff;
};

/// Coefficients a_S over subsets of L variables with sum_{S contains l} a_S = 0.
class BalancedSetFunction {
 public:
  /// Validates: non-empty unique subsets, ids < group_count, balance, and a
  /// term for the union of all referenced groups (the shared-radius space).
  BalancedSetFunction(std::vector<SetTerm> terms, std::size_t group_count);

  /// sum_l H(X_l) - H(X_1, ..., X_L).
  static BalancedSetFunction total_correlation(std::size_t group_count);
  /// Parses [{"groups": [0, 2], "coeff": "1/1"}, ...].
  static BalancedSetFunction from_json(const std::string& json, std::size_t group_count);

  const std::vector<SetTerm>& terms() const noexcept { return terms_; }
  std::size_t group_count() const noexcept { return group_count_; }
  /// Union of all groups that appear in some term.
  const std::vector<std::size_t>& support() const noexcept { return support_; }

 private:
  std::vector<SetTerm> terms_;
  std::size_t group_count_ = 0;
  std::vector<std::size_t> support_;
};

struct GeneralMmiOptions {
  /// l_inf uses psi(n + psi_offset); l_2 uses ln n with ball-volume constants.
  Norm norm = Norm::LInf;
  /// 1 reduces to pairwise KSG at L = 2; 0 is the literal psi(n) form.
  int psi_offset = 1;
  /// Strict needs l_inf with psi_offset 1 so every digamma argument stays >= 1.
  Boundary boundary = Boundary::Inclusive;
};

/// Sum of L marginal KL entropies minus the joint KL entropy.
EstimateReport mmi_l_plus_1_kl(const Dataset& ds, std::size_t k, Norm norm = Norm::LInf);
EstimateReport mmi_ksg(const Dataset& ds, std::size_t k, int psi_offset = 1,
                       Boundary boundary = Boundary::Inclusive);
EstimateReport mmi_biksg(const Dataset& ds, std::size_t k);
/// Shared-radius estimator for an arbitrary balanced set function.
EstimateReport mmi_general(const Dataset& ds, const BalancedSetFunction& f, std::size_t k,
                           const GeneralMmiOptions& options = {});

}  // namespace knnmi
