#include "knnmi/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "knnmi/entropy.hpp"
#include "knnmi/error.hpp"
#include "knnmi/json_out.hpp"
#include "knnmi/mi.hpp"
#include "knnmi/mmi.hpp"
#include "knnmi/parallel.hpp"
#include "knnmi/report.hpp"

namespace knnmi {

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::BiasTable: return "bias_table";
    case ExperimentKind::MseSlope: return "mse_slope";
    case ExperimentKind::CorrelationBoost: return "correlation_boost";
  }
  return "?";
}

namespace {

enum class Family { Entropy, Pairwise, Multivariate };

struct MethodInfo {
  Family family;
  bool known;
};

MethodInfo method_info(const std::string& m) {
  if (m == "kl" || m == "kl_trunc") return {Family::Entropy, true};
  if (m == "3kl" || m == "ksg" || m == "biksg" || m == "3kl_trunc" || m == "ksg_trunc" ||
      m == "biksg_trunc")
    return {Family::Pairwise, true};
  if (m == "mmi_kl" || m == "mmi_ksg" || m == "mmi_biksg") return {Family::Multivariate, true};
  return {Family::Entropy, false};
}

MiConfig pairwise_config(const std::string& method, const ExperimentSpec& spec) {
  const bool truncated = method.ends_with("_trunc");
  const std::string base = truncated ? method.substr(0, method.size() - 6) : method;
  MiConfig cfg;
  cfg.kind = *parse_mi_kind(base);
  cfg.k = spec.k;
  if (cfg.kind == MiKind::ThreeKL) cfg.norm = spec.norm;
  cfg.truncate = truncated;
  cfg.delta = spec.delta;
  if (cfg.kind == MiKind::Ksg) cfg.boundary = spec.boundary;
  return cfg;
}

double estimate_with(const std::string& method, const Dataset& ds, const ExperimentSpec& spec) {
  switch (method_info(method).family) {
    case Family::Entropy: {
      EntropyConfig cfg;
      cfg.k = spec.k;
      cfg.norm = spec.norm;
      cfg.truncate = method == "kl_trunc";
      cfg.delta = spec.delta;
      return estimate_entropy(ds, cfg).estimate;
    }
    case Family::Pairwise:
      return estimate_mi(ds, pairwise_config(method, spec)).estimate;
    case Family::Multivariate:
      if (method == "mmi_kl") return mmi_l_plus_1_kl(ds, spec.k, spec.norm).estimate;
      if (method == "mmi_ksg") return mmi_ksg(ds, spec.k, 1, spec.boundary).estimate;
      return mmi_biksg(ds, spec.k).estimate;
  }
  return 0.0;
}

double closed_form_truth(const std::string& method, const ExperimentSpec& spec) {
  if (method_info(method).family == Family::Entropy) return spec.distribution.entropy();
  return spec.distribution.total_correlation(spec.group_dims);
}

[[noreturn]] void rethrow_with_context(const Error& e, std::size_t n, const std::string& method,
                                       std::size_t trial, std::uint64_t seed) {
  std::ostringstream msg;
  msg << e.what() << " (N=" << n << ", method=" << method << ", trial=" << trial
      << ", seed=" << seed << ")";
  throw Error(e.kind(), msg.str());
}

PhiloxStream trial_stream(const ExperimentSpec& spec, std::size_t trial, std::size_t size_index) {
  return PhiloxStream(spec.master_seed, static_cast<std::uint32_t>(trial),
                      static_cast<std::uint32_t>(size_index));
}

std::string protocol_for(const ExperimentSpec& spec) {
  std::ostringstream s;
  s << to_string(spec.kind) << ": distribution=" << spec.distribution.describe()
    << ", k=" << spec.k << ", trials=" << spec.trials
    << ", count boundary=" << to_string(spec.boundary)
    << ", paired draws (all methods see the same sample per trial)"
    << ", rng=philox4x32-10 substream (master_seed, trial, size_index)"
    << ", variance over trials with 1/T normalisation";
  if (spec.kind == ExperimentKind::MseSlope) s << ", OLS of ln(mse) on ln(N)";
  if (spec.kind == ExperimentKind::CorrelationBoost)
    s << ", Pearson(b(X,Y), b(X)) over local biases pooled across all trials"
      << ", scatter data from trial 0";
  return s.str();
}

// Runs every (size, trial) draw and evaluates each method on it.
std::vector<std::vector<std::vector<double>>> run_trials(const ExperimentSpec& spec) {
  const std::size_t sizes = spec.sample_sizes.size();
  const std::size_t methods = spec.methods.size();
  std::vector<std::vector<std::vector<double>>> est(
      sizes, std::vector<std::vector<double>>(methods, std::vector<double>(spec.trials)));
  parallel_for(sizes * spec.trials, [&](std::size_t begin, std::size_t end) {
    for (std::size_t job = begin; job < end; ++job) {
      const std::size_t s = job / spec.trials;
      const std::size_t t = job % spec.trials;
      const std::size_t n = spec.sample_sizes[s];
      auto rng = trial_stream(spec, t, s);
      const Dataset ds = spec.distribution.sample(n, spec.group_dims, rng);
      for (std::size_t m = 0; m < methods; ++m) {
        try {
          est[s][m][t] = estimate_with(spec.methods[m], ds, spec);
        } catch (const Error& e) {
          rethrow_with_context(e, n, spec.methods[m], t, spec.master_seed);
        }
      }
    }
  });
  return est;
}

ExperimentResult aggregate(const ExperimentSpec& spec) {
  ExperimentResult result;
  result.kind = spec.kind;
  result.spec = spec;
  result.protocol = protocol_for(spec);
  result.estimates = run_trials(spec);
  for (std::size_t s = 0; s < spec.sample_sizes.size(); ++s) {
    for (std::size_t m = 0; m < spec.methods.size(); ++m) {
      const auto& e = result.estimates[s][m];
      double truth = spec.true_value.value_or(closed_form_truth(spec.methods[m], spec));
      if (spec.self_truth) truth = compensated_mean(e);
      CellStats cell = summarize(e, truth);
      cell.n = spec.sample_sizes[s];
      cell.method = spec.methods[m];
      result.cells.push_back(cell);
    }
  }
  return result;
}

std::vector<std::size_t> parse_sizes(const nlohmann::json& doc) {
  std::vector<std::size_t> out;
  if (!doc.is_array()) fail(ErrorKind::Validation, "sample_sizes must be a list");
  for (const auto& v : doc) {
    if (!v.is_number_integer() || v.get<long long>() < 2)
      fail(ErrorKind::Validation, "sample sizes must be integers >= 2");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (trials < 1) fail(ErrorKind::Validation, "trials must be at least 1");
  if (sample_sizes.empty()) fail(ErrorKind::Validation, "sample_sizes must not be empty");
  for (std::size_t i = 1; i < sample_sizes.size(); ++i)
    if (sample_sizes[i] <= sample_sizes[i - 1])
      fail(ErrorKind::Validation, "sample_sizes must be strictly increasing");
  if (k < 1 || k >= sample_sizes.front())
    fail(ErrorKind::Validation, "k must satisfy 1 <= k < smallest sample size");
  if (methods.empty()) fail(ErrorKind::Validation, "methods must not be empty");
  const std::size_t total = std::accumulate(group_dims.begin(), group_dims.end(), std::size_t{0});
  if (total != distribution.dim())
    fail(ErrorKind::Validation, "group_dims must sum to the distribution dimension");
  for (const auto& m : methods) {
    const auto info = method_info(m);
    if (!info.known) fail(ErrorKind::Validation, "unknown method '" + m + "'");
    if (info.family == Family::Pairwise && group_dims.size() != 2)
      fail(ErrorKind::Validation, "method '" + m + "' needs exactly 2 groups");
    if (info.family == Family::Multivariate && group_dims.size() < 2)
      fail(ErrorKind::Validation, "method '" + m + "' needs at least 2 groups");
    if (kind == ExperimentKind::CorrelationBoost && m != "3kl" && m != "ksg" && m != "biksg")
      fail(ErrorKind::Validation, "correlation_boost supports only 3kl, ksg and biksg");
  }
  if (kind == ExperimentKind::MseSlope && sample_sizes.size() < 3)
    fail(ErrorKind::Validation, "mse_slope needs at least 3 sample sizes");
  if (self_truth && true_value)
    fail(ErrorKind::Validation, "true_value cannot be both a number and \"self\"");
}

Distribution parse_distribution(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("kind"))
    fail(ErrorKind::Validation, "distribution needs a 'kind'");
  const std::string kind = doc["kind"].get<std::string>();
  if (kind == "uniform_cube") return Distribution::uniform_cube(doc.value("dim", std::size_t{1}));
  if (kind == "beta_iid") {
    return Distribution::beta_iid(doc.value("alpha", 2.0), doc.value("beta", 2.0),
                                  doc.value("dim", std::size_t{1}));
  }
  if (kind == "mvn") {
    if (!doc.contains("cov") || !doc["cov"].is_array())
      fail(ErrorKind::Validation, "mvn needs a 'cov' matrix");
    const auto& rows = doc["cov"];
    const std::size_t dim = rows.size();
    std::vector<double> cov;
    for (const auto& r : rows) {
      if (!r.is_array() || r.size() != dim) fail(ErrorKind::Validation, "mvn 'cov' must be square");
      for (const auto& v : r) cov.push_back(v.get<double>());
    }
    std::vector<double> mean(dim, 0.0);
    if (doc.contains("mean")) mean = doc["mean"].get<std::vector<double>>();
    if (mean.size() != dim) fail(ErrorKind::Validation, "mvn 'mean' length must match 'cov'");
    return Distribution::mvn(std::move(mean), std::move(cov));
  }
  fail(ErrorKind::Validation, "unsupported distribution kind '" + kind + "'");
}

ExperimentSpec parse_experiment_spec(const std::string& text, std::optional<std::uint64_t> seed) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Validation, std::string("experiment spec: ") + e.what());
  }
  ExperimentSpec spec;
  try {
    const std::string kind = doc.value("kind", std::string("bias_table"));
    if (kind == "bias_table") {
      spec.kind = ExperimentKind::BiasTable;
    } else if (kind == "mse_slope") {
      spec.kind = ExperimentKind::MseSlope;
    } else if (kind == "correlation_boost") {
      spec.kind = ExperimentKind::CorrelationBoost;
    } else {
      fail(ErrorKind::Validation, "unknown experiment kind '" + kind + "'");
    }
    if (!doc.contains("distribution")) fail(ErrorKind::Validation, "spec needs a 'distribution'");
    spec.distribution = parse_distribution(doc["distribution"]);
    spec.group_dims = doc.value("group_dims", std::vector<std::size_t>{spec.distribution.dim()});
    if (!doc.contains("methods")) fail(ErrorKind::Validation, "spec needs 'methods'");
    spec.methods = doc["methods"].get<std::vector<std::string>>();
    spec.k = doc.value("k", std::size_t{4});
    if (doc.contains("norm")) {
      const auto norm = parse_norm(doc["norm"].get<std::string>());
      if (!norm) fail(ErrorKind::Validation, "norm must be 'l2' or 'linf'");
      spec.norm = *norm;
    }
    spec.delta = doc.value("delta", 0.5);
    const std::string boundary = doc.value("boundary", std::string("inclusive"));
    if (boundary == "strict") {
      spec.boundary = Boundary::Strict;
    } else if (boundary != "inclusive") {
      fail(ErrorKind::Validation, "boundary must be 'inclusive' or 'strict'");
    }
    if (!doc.contains("sample_sizes")) fail(ErrorKind::Validation, "spec needs 'sample_sizes'");
    spec.sample_sizes = parse_sizes(doc["sample_sizes"]);
    spec.trials = doc.value("trials", std::size_t{1});
    spec.master_seed = doc.value("master_seed", std::uint64_t{0});
    if (doc.contains("true_value")) {
      const auto& tv = doc["true_value"];
      if (tv.is_string() && tv.get<std::string>() == "self") {
        spec.self_truth = true;
      } else if (tv.is_number()) {
        spec.true_value = tv.get<double>();
      } else {
        fail(ErrorKind::Validation, "true_value must be a number or \"self\"");
      }
    }
    spec.outputs = doc.value("outputs", std::string{});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Validation, std::string("experiment spec: ") + e.what());
  }
  if (seed) spec.master_seed = *seed;
  spec.validate();
  return spec;
}

CellStats summarize(std::span<const double> estimates, double truth) {
  if (estimates.empty()) fail(ErrorKind::InvalidArgument, "no estimates to summarise");
  const double t = static_cast<double>(estimates.size());
  CellStats c;
  c.truth = truth;
  c.trials = estimates.size();
  c.mean_estimate = compensated_mean(estimates);
  c.bias = c.mean_estimate - truth;
  std::vector<double> dev2(estimates.size()), err2(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    dev2[i] = (estimates[i] - c.mean_estimate) * (estimates[i] - c.mean_estimate);
    err2[i] = (estimates[i] - truth) * (estimates[i] - truth);
  }
  c.variance = compensated_mean(dev2);
  c.mse = compensated_mean(err2);
  c.stderr_mean = std::sqrt(c.variance / t);
  return c;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::InvalidArgument, "pearson: series lengths differ");
  if (a.size() < 2) fail(ErrorKind::InvalidArgument, "pearson: need at least 2 points");
  const double ma = compensated_mean(a);
  const double mb = compensated_mean(b);
  std::vector<double> sab(a.size()), saa(a.size()), sbb(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab[i] = da * db;
    saa[i] = da * da;
    sbb[i] = db * db;
  }
  const double vaa = compensated_sum(saa);
  const double vbb = compensated_sum(sbb);
  if (!(vaa > 0.0) || !(vbb > 0.0))
    fail(ErrorKind::DegenerateStatistic, "pearson: a series has zero variance");
  const double r = compensated_sum(sab) / std::sqrt(vaa * vbb);
  return std::clamp(r, -1.0, 1.0);
}

SlopeFit fit_loglog_slope(std::span<const std::size_t> sizes, std::span<const double> mse) {
  if (sizes.size() != mse.size()) fail(ErrorKind::InvalidArgument, "slope fit: length mismatch");
  if (sizes.size() < 3) fail(ErrorKind::InvalidArgument, "slope fit needs at least 3 points");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (!(mse[i] > 0.0))
      fail(ErrorKind::DegenerateStatistic, "slope fit: MSE is zero at N=" + std::to_string(sizes[i]));
    x.push_back(std::log(static_cast<double>(sizes[i])));
    y.push_back(std::log(mse[i]));
  }
  const double mx = compensated_mean(x), my = compensated_mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) fail(ErrorKind::DegenerateStatistic, "slope fit: sample sizes are identical");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

ExperimentResult run_bias_table(const ExperimentSpec& spec) {
  ExperimentSpec s = spec;
  s.kind = ExperimentKind::BiasTable;
  s.validate();
  return aggregate(s);
}

ExperimentResult run_mse_slope(const ExperimentSpec& spec) {
  ExperimentSpec s = spec;
  s.kind = ExperimentKind::MseSlope;
  s.validate();
  ExperimentResult result = aggregate(s);
  for (const auto& method : s.methods) {
    std::vector<double> mse;
    for (std::size_t n : s.sample_sizes) mse.push_back(result.cell(n, method).mse);
    SlopeFit fit = fit_loglog_slope(s.sample_sizes, mse);
    fit.method = method;
    result.slopes.push_back(fit);
  }
  return result;
}

ExperimentResult run_correlation_boost(const ExperimentSpec& spec) {
  ExperimentSpec s = spec;
  s.kind = ExperimentKind::CorrelationBoost;
  s.validate();
  const auto& dist = s.distribution;
  std::vector<std::size_t> x_cols(s.group_dims[0]), y_cols(s.group_dims[1]), all(dist.dim());
  std::iota(x_cols.begin(), x_cols.end(), std::size_t{0});
  std::iota(y_cols.begin(), y_cols.end(), s.group_dims[0]);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const TrueEntropies truth{dist.entropy(x_cols), dist.entropy(y_cols), dist.entropy(all)};

  ExperimentResult result;
  result.kind = s.kind;
  result.spec = s;
  result.protocol = protocol_for(s);
  const std::size_t sizes = s.sample_sizes.size();
  const std::size_t methods = s.methods.size();
  result.estimates.assign(sizes, std::vector<std::vector<double>>(methods, std::vector<double>(s.trials)));

  for (std::size_t si = 0; si < sizes; ++si) {
    const std::size_t n = s.sample_sizes[si];
    // pooled[m] holds b(X,Y) and b(X) for all trials, trial-major.
    std::vector<std::vector<double>> pooled_z(methods, std::vector<double>(n * s.trials));
    std::vector<std::vector<double>> pooled_x(methods, std::vector<double>(n * s.trials));
    parallel_for(s.trials, [&](std::size_t begin, std::size_t end) {
      for (std::size_t t = begin; t < end; ++t) {
        auto rng = trial_stream(s, t, si);
        const Dataset ds = dist.sample(n, s.group_dims, rng);
        for (std::size_t m = 0; m < methods; ++m) {
          try {
            MiConfig cfg = pairwise_config(s.methods[m], s);
            const LocalMiTerms terms = decompose_local(ds, cfg, truth);
            result.estimates[si][m][t] = compensated_mean(terms.iota);
            std::copy(terms.b_z.begin(), terms.b_z.end(), pooled_z[m].begin() + t * n);
            std::copy(terms.b_x.begin(), terms.b_x.end(), pooled_x[m].begin() + t * n);
          } catch (const Error& e) {
            rethrow_with_context(e, n, s.methods[m], t, s.master_seed);
          }
        }
      }
    });
    for (std::size_t m = 0; m < methods; ++m) {
      result.pearson.push_back({s.methods[m], n, pearson(pooled_z[m], pooled_x[m]), n * s.trials});
      for (std::size_t i = 0; i < n; ++i)
        result.scatter.push_back({n, s.methods[m], i, pooled_z[m][i], pooled_x[m][i]});
      const double mi_truth = s.true_value.value_or(dist.total_correlation(s.group_dims));
      CellStats cell = summarize(result.estimates[si][m],
                                 s.self_truth ? compensated_mean(result.estimates[si][m]) : mi_truth);
      cell.n = n;
      cell.method = s.methods[m];
      result.cells.push_back(cell);
    }
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  switch (spec.kind) {
    case ExperimentKind::BiasTable: return run_bias_table(spec);
    case ExperimentKind::MseSlope: return run_mse_slope(spec);
    case ExperimentKind::CorrelationBoost: return run_correlation_boost(spec);
  }
  return run_bias_table(spec);
}

const CellStats& ExperimentResult::cell(std::size_t n, const std::string& method) const {
  for (const auto& c : cells)
    if (c.n == n && c.method == method) return c;
  fail(ErrorKind::InvalidArgument, "no cell for N=" + std::to_string(n) + ", method=" + method);
}

const PearsonCell& ExperimentResult::pearson_cell(std::size_t n, const std::string& method) const {
  for (const auto& p : pearson)
    if (p.n == n && p.method == method) return p;
  fail(ErrorKind::InvalidArgument, "no correlation for N=" + std::to_string(n) + ", method=" + method);
}

const SlopeFit& ExperimentResult::slope(const std::string& method) const {
  for (const auto& f : slopes)
    if (f.method == method) return f;
  fail(ErrorKind::InvalidArgument, "no slope for method=" + method);
}

nlohmann::json ExperimentResult::to_json() const {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["kind"] = to_string(kind);
  doc["protocol"] = protocol;
  doc["master_seed"] = spec.master_seed;
  doc["distribution"] = spec.distribution.describe();
  doc["group_dims"] = spec.group_dims;
  doc["methods"] = spec.methods;
  doc["k"] = spec.k;
  doc["boundary"] = to_string(spec.boundary);
  doc["sample_sizes"] = spec.sample_sizes;
  doc["trials"] = spec.trials;
  doc["units"] = "nats";
  nlohmann::json cell_list = nlohmann::json::array();
  for (const auto& c : cells) {
    cell_list.push_back({{"N", c.n},
                         {"method", c.method},
                         {"truth", c.truth},
                         {"mean_estimate", c.mean_estimate},
                         {"bias", c.bias},
                         {"variance", c.variance},
                         {"mse", c.mse},
                         {"stderr", c.stderr_mean},
                         {"trials", c.trials}});
  }
  doc["cells"] = cell_list;
  if (!slopes.empty()) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& f : slopes)
      list.push_back({{"method", f.method}, {"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r_squared}});
    doc["slopes"] = list;
  }
  if (!pearson.empty()) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& p : pearson)
      list.push_back({{"method", p.method}, {"N", p.n}, {"pearson_bxy_bx", p.value}, {"pooled_samples", p.pooled}});
    doc["pearson"] = list;
  }
  return doc;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string ExperimentResult::tidy_csv() const {
  std::ostringstream out;
  out << "N,method,statistic,value\n";
  for (const auto& c : cells) {
    const std::pair<const char*, double> stats[] = {
        {"truth", c.truth}, {"mean_estimate", c.mean_estimate}, {"bias", c.bias},
        {"variance", c.variance}, {"mse", c.mse}, {"stderr", c.stderr_mean}};
    for (const auto& [name, value] : stats)
      out << c.n << "," << c.method << "," << name << "," << fmt17(value) << "\n";
  }
  for (const auto& p : pearson)
    out << p.n << "," << p.method << ",pearson_bxy_bx," << fmt17(p.value) << "\n";
  for (const auto& f : slopes) {
    out << "," << f.method << ",slope," << fmt17(f.slope) << "\n";
    out << "," << f.method << ",intercept," << fmt17(f.intercept) << "\n";
    out << "," << f.method << ",r2," << fmt17(f.r_squared) << "\n";
  }
  return out.str();
}

std::string ExperimentResult::scatter_csv() const {
  std::ostringstream out;
  out << "N,method,sample,b_joint,b_x\n";
  for (const auto& p : scatter)
    out << p.n << "," << p.method << "," << p.sample << "," << fmt17(p.b_joint) << ","
        << fmt17(p.b_x) << "\n";
  return out.str();
}

}  // namespace knnmi
