#include "knnmi/mmi.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "knnmi/entropy.hpp"
#include "knnmi/error.hpp"
#include "knnmi/knn.hpp"
#include "knnmi/specfn.hpp"

namespace knnmi {

namespace {

Rational from_wide(__int128 num, __int128 den) {
  if (den == 0) fail(ErrorKind::Validation, "rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  __int128 a = num < 0 ? -num : num;
  __int128 b = den;
  while (b != 0) {
    const __int128 r = a % b;
    a = b;
    b = r;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  constexpr __int128 kMax = std::numeric_limits<std::int64_t>::max();
  if (num > kMax || num < -kMax || den > kMax)
    fail(ErrorKind::Validation, "rational coefficient overflow");
  return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

std::string subset_name(const std::vector<std::size_t>& groups) {
  std::ostringstream s;
  s << "{";
  for (std::size_t p = 0; p < groups.size(); ++p) s << (p ? "," : "") << groups[p];
  s << "}";
  return s.str();
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) fail(ErrorKind::Validation, "rational with zero denominator");
  std::int64_t g = std::gcd(num, den);
  if (g == 0) g = 1;
  num_ = num / g;
  den_ = den / g;
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
}

Rational Rational::parse(const std::string& raw) {
  std::string text = raw;
  text.erase(std::remove_if(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); }),
             text.end());
  auto parse_int = [&](const std::string& part) -> std::int64_t {
    if (part.empty()) fail(ErrorKind::Validation, "bad rational '" + raw + "'");
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(part, &used);
    } catch (const std::exception&) {
      fail(ErrorKind::Validation, "bad rational '" + raw + "'");
    }
    if (used != part.size()) fail(ErrorKind::Validation, "bad rational '" + raw + "'");
    return v;
  };
  if (const auto slash = text.find('/'); slash != std::string::npos) {
    return Rational(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
  }
  if (const auto dot = text.find('.'); dot != std::string::npos) {
    const std::string frac = text.substr(dot + 1);
    if (frac.size() > 15 || frac.find_first_not_of("0123456789") != std::string::npos)
      fail(ErrorKind::Validation, "bad rational '" + raw + "'");
    std::string whole = text.substr(0, dot);
    const bool negative = !whole.empty() && whole[0] == '-';
    if (whole.empty() || whole == "-" || whole == "+") whole += "0";
    std::int64_t den = 1;
    for (std::size_t p = 0; p < frac.size(); ++p) den *= 10;
    const std::int64_t w = parse_int(whole);
    const std::int64_t f = frac.empty() ? 0 : parse_int(frac);
    const __int128 num = static_cast<__int128>(w) * den + (negative ? -f : f);
    return from_wide(num, den);
  }
  return Rational(parse_int(text));
}

std::string Rational::str() const {
  return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::operator+(const Rational& o) const {
  return from_wide(static_cast<__int128>(num_) * o.den_ + static_cast<__int128>(o.num_) * den_,
                   static_cast<__int128>(den_) * o.den_);
}

Rational Rational::operator*(const Rational& o) const {
  return from_wide(static_cast<__int128>(num_) * o.num_, static_cast<__int128>(den_) * o.den_);
}

BalancedSetFunction::BalancedSetFunction(std::vector<SetTerm> terms, std::size_t group_count)
    : group_count_(group_count) {
  if (group_count_ == 0) fail(ErrorKind::Validation, "set function needs at least one group");
  std::set<std::vector<std::size_t>> seen;
  for (auto& term : terms) {
    auto& g = term.groups;
    std::sort(g.begin(), g.end());
    if (g.empty()) fail(ErrorKind::Validation, "set function contains an empty subset");
    if (std::adjacent_find(g.begin(), g.end()) != g.end())
      fail(ErrorKind::Validation, "set function subset " + subset_name(g) + " repeats a group");
    if (g.back() >= group_count_) {
      fail(ErrorKind::Validation, "set function subset " + subset_name(g) +
                                      " references a group outside 0.." +
                                      std::to_string(group_count_ - 1));
    }
    if (!seen.insert(g).second)
      fail(ErrorKind::Validation, "set function lists subset " + subset_name(g) + " twice");
  }
  std::erase_if(terms, [](const SetTerm& t) { return t.coeff.is_zero(); });
  if (terms.empty()) fail(ErrorKind::Validation, "set function has no nonzero terms");

  std::vector<Rational> totals(group_count_);
  for (const auto& term : terms)
    for (std::size_t g : term.groups) totals[g] = totals[g] + term.coeff;
  std::vector<std::size_t> violating;
  for (std::size_t g = 0; g < group_count_; ++g)
    if (!totals[g].is_zero()) violating.push_back(g);
  if (!violating.empty()) {
    std::ostringstream msg;
    msg << "set function is not balanced; coefficient sums are nonzero for groups";
    for (std::size_t p = 0; p < violating.size(); ++p)
      msg << (p ? ", " : " ") << violating[p] << " (sum " << totals[violating[p]].str() << ")";
    fail(ErrorKind::Validation, msg.str());
  }

  std::set<std::size_t> support;
  for (const auto& term : terms) support.insert(term.groups.begin(), term.groups.end());
  support_.assign(support.begin(), support.end());
  const bool has_joint = std::any_of(terms.begin(), terms.end(),
                                     [&](const SetTerm& t) { return t.groups == support_; });
  if (!has_joint) {
    fail(ErrorKind::Validation, "set function must include a term for the joint subset " +
                                    subset_name(support_) + " that fixes the shared radius");
  }
  terms_ = std::move(terms);
}

BalancedSetFunction BalancedSetFunction::total_correlation(std::size_t group_count) {
  if (group_count < 2)
    fail(ErrorKind::InvalidArgument, "multivariate information needs at least 2 groups");
  std::vector<SetTerm> terms;
  std::vector<std::size_t> all;
  for (std::size_t g = 0; g < group_count; ++g) {
    terms.push_back({{g}, Rational(1)});
    all.push_back(g);
  }
  terms.push_back({all, Rational(-1)});
  return BalancedSetFunction(std::move(terms), group_count);
}

BalancedSetFunction BalancedSetFunction::from_json(const std::string& text,
                                                   std::size_t group_count) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Validation, std::string("set function JSON: ") + e.what());
  }
  if (doc.is_object() && doc.contains("terms")) doc = doc["terms"];
  if (!doc.is_array()) fail(ErrorKind::Validation, "set function JSON must be a list of terms");
  std::vector<SetTerm> terms;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("groups") || !item.contains("coeff"))
      fail(ErrorKind::Validation, "each set function term needs 'groups' and 'coeff'");
    SetTerm term;
    for (const auto& g : item["groups"]) {
      if (!g.is_number_integer() || g.get<long long>() < 0)
        fail(ErrorKind::Validation, "set function group ids must be nonnegative integers");
      term.groups.push_back(g.get<std::size_t>());
    }
    const auto& c = item["coeff"];
    if (c.is_string()) {
      term.coeff = Rational::parse(c.get<std::string>());
    } else if (c.is_number_integer()) {
      term.coeff = Rational(c.get<std::int64_t>());
    } else {
      fail(ErrorKind::Validation, "set function coefficients must be integers or \"p/q\" strings");
    }
    terms.push_back(std::move(term));
  }
  return BalancedSetFunction(std::move(terms), group_count);
}

EstimateReport mmi_l_plus_1_kl(const Dataset& ds, std::size_t k, Norm norm) {
  if (ds.group_count() < 2)
    fail(ErrorKind::InvalidArgument, "multivariate information needs at least 2 groups");
  const std::size_t n = ds.rows();
  const std::size_t groups = ds.group_count();
  std::vector<double> iota(n, 0.0);
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t ids[] = {g};
    const auto rho = knn_radii(ds, ds.columns_of(ids), k, norm);
    require_positive_radii(rho, ds.group(g).name);
    const auto xi = kl_local_terms(rho, ds.group(g).dim, k, norm);
    for (std::size_t i = 0; i < n; ++i) iota[i] = g == 0 ? xi[i] : iota[i] + xi[i];
  }
  std::vector<std::size_t> all(ds.cols());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto rho = knn_radii(ds, all, k, norm);
  require_positive_radii(rho, "joint");
  const auto xi = kl_local_terms(rho, ds.cols(), k, norm);
  for (std::size_t i = 0; i < n; ++i) iota[i] -= xi[i];

  EstimateReport report;
  report.method = "mmi_kl";
  report.k = k;
  report.norm = norm;
  report.samples = n;
  report.dims = ds.group_dims();
  report.estimate = compensated_mean(iota);
  report.local = std::move(iota);
  return report;
}

EstimateReport mmi_general(const Dataset& ds, const BalancedSetFunction& f, std::size_t k,
                           const GeneralMmiOptions& options) {
  if (f.group_count() != ds.group_count()) {
    fail(ErrorKind::InvalidArgument, "set function is over " + std::to_string(f.group_count()) +
                                         " groups but the dataset has " +
                                         std::to_string(ds.group_count()));
  }
  if (options.psi_offset != 0 && options.psi_offset != 1)
    fail(ErrorKind::InvalidArgument, "psi offset must be 0 or 1");
  const Norm norm = options.norm;
  if (options.boundary == Boundary::Strict && (norm != Norm::LInf || options.psi_offset != 1))
    fail(ErrorKind::InvalidArgument,
         "the strict count boundary needs the linf norm with psi offset 1");

  // Restrict to the support so the shared radius lives in the joint term's space.
  const auto& support = f.support();
  std::vector<std::size_t> support_dims;
  for (std::size_t g : support) support_dims.push_back(ds.group(g).dim);
  std::vector<double> values;
  const auto support_cols = ds.columns_of(support);
  values.reserve(ds.rows() * support_cols.size());
  for (std::size_t i = 0; i < ds.rows(); ++i)
    for (std::size_t c : support_cols) values.push_back(ds.at(i, c));
  const Dataset joint(std::move(values), support_cols.size(), support_dims);

  auto local_id = [&](std::size_t g) {
    return static_cast<std::size_t>(std::lower_bound(support.begin(), support.end(), g) -
                                    support.begin());
  };
  Subspaces subspaces;
  std::vector<std::size_t> term_slot;
  std::vector<std::size_t> term_dim;
  Rational coeff_sum;
  Rational weighted_dim;
  for (const auto& term : f.terms()) {
    std::size_t dim = 0;
    for (std::size_t g : term.groups) dim += ds.group(g).dim;
    term_dim.push_back(dim);
    coeff_sum = coeff_sum + term.coeff;
    weighted_dim = weighted_dim + term.coeff * Rational(static_cast<std::int64_t>(dim));
    if (term.groups == support) {
      term_slot.push_back(static_cast<std::size_t>(-1));
      continue;
    }
    std::vector<std::size_t> local;
    for (std::size_t g : term.groups) local.push_back(local_id(g));
    term_slot.push_back(subspaces.size());
    subspaces.push_back(std::move(local));
  }
  // The d_S log rho contributions must cancel before any data is touched.
  if (!weighted_dim.is_zero())
    fail(ErrorKind::Validation, "set function does not cancel the shared radius term");

  const NeighborStats stats = neighbor_stats(joint, k, norm, subspaces, options.boundary);
  const std::size_t n = ds.rows();
  const double psi_k = digamma(static_cast<double>(k));
  double constant = coeff_sum.to_double() * std::log(static_cast<double>(n));
  if (norm == Norm::L2) {
    // l_inf ball volumes are 2^d and cancel exactly by balance.
    for (std::size_t t = 0; t < f.terms().size(); ++t)
      constant += f.terms()[t].coeff.to_double() * log_ball_volume(term_dim[t], Norm::L2);
  }
  const double offset = static_cast<double>(options.psi_offset);

  std::vector<double> iota(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = constant;
    for (std::size_t t = 0; t < f.terms().size(); ++t) {
      const double a = f.terms()[t].coeff.to_double();
      if (term_slot[t] == static_cast<std::size_t>(-1)) {
        acc -= a * psi_k;
        continue;
      }
      const double count = static_cast<double>(stats.counts[term_slot[t]][i]);
      acc -= a * (norm == Norm::L2 ? std::log(count) : digamma(count + offset));
    }
    iota[i] = acc;
  }

  EstimateReport report;
  report.method = "mmi_general";
  report.k = k;
  report.norm = norm;
  report.samples = n;
  report.dims = ds.group_dims();
  report.estimate = compensated_mean(iota);
  report.local = std::move(iota);
  return report;
}

EstimateReport mmi_ksg(const Dataset& ds, std::size_t k, int psi_offset, Boundary boundary) {
  auto report = mmi_general(ds, BalancedSetFunction::total_correlation(ds.group_count()), k,
                            {Norm::LInf, psi_offset, boundary});
  report.method = "mmi_ksg";
  return report;
}

EstimateReport mmi_biksg(const Dataset& ds, std::size_t k) {
  auto report = mmi_general(ds, BalancedSetFunction::total_correlation(ds.group_count()), k,
                            {Norm::L2, 1});
  report.method = "mmi_biksg";
  if (ds.group_count() == 2) {
    const double dx = static_cast<double>(ds.group(0).dim);
    const double dy = static_cast<double>(ds.group(1).dim);
    if (static_cast<double>(k) <= std::max(dx / dy, dy / dx)) {
      report.warnings.push_back("k=" + std::to_string(k) +
                                " does not exceed max(dx/dy, dy/dx); BI-KSG consistency is "
                                "only guaranteed above that value");
    }
  }
  return report;
}

}  // namespace knnmi
