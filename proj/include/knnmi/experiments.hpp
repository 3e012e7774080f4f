#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "knnmi/knn.hpp"
#include "knnmi/norm.hpp"
#include "knnmi/synth.hpp"

namespace knnmi {

enum class ExperimentKind { BiasTable, MseSlope, CorrelationBoost };

const char* to_string(ExperimentKind kind);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::BiasTable;
  Distribution distribution = Distribution::uniform_cube(1);
  std::vector<std::size_t> group_dims;
  /// kl, kl_trunc, 3kl, ksg, biksg, 3kl_trunc, ksg_trunc, biksg_trunc,
  /// mmi_kl, mmi_ksg, mmi_biksg.
  std::vector<std::string> methods;
  std::size_t k = 4;
  /// Norm for kl / 3kl / mmi_kl; the shared-radius estimators fix their own.
  Norm norm = Norm::LInf;
  double delta = 0.5;
  /// Count boundary for ksg, ksg_trunc and mmi_ksg; other methods ignore it.
  Boundary boundary = Boundary::Inclusive;
  std::vector<std::size_t> sample_sizes;
  std::size_t trials = 1;
  std::uint64_t master_seed = 0;
  /// Overrides the closed-form truth; self_truth uses each cell's own mean.
  std::optional<double> true_value;
  bool self_truth = false;
  /// Path prefix for CSV side outputs (written by the caller).
  std::string outputs;

  void validate() const;
};

/// Parses the JSON experiment spec. A "seed" override, when given, replaces
/// master_seed from the document.
ExperimentSpec parse_experiment_spec(const std::string& json_text,
                                     std::optional<std::uint64_t> seed = std::nullopt);
Distribution parse_distribution(const nlohmann::json& doc);

struct CellStats {
  std::size_t n = 0;
  std::string method;
  double truth = 0.0;
  double mean_estimate = 0.0;
  double bias = 0.0;
  double variance = 0.0;
  double mse = 0.0;
  double stderr_mean = 0.0;
  std::size_t trials = 0;
};

struct SlopeFit {
  std::string method;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

struct PearsonCell {
  std::string method;
  std::size_t n = 0;
  double value = 0.0;
  std::size_t pooled = 0;
};

struct ScatterPoint {
  std::size_t n = 0;
  std::string method;
  std::size_t sample = 0;
  double b_joint = 0.0;
  double b_x = 0.0;
};

struct ExperimentResult {
  ExperimentKind kind = ExperimentKind::BiasTable;
  std::string protocol;
  ExperimentSpec spec;
  std::vector<CellStats> cells;
  std::vector<SlopeFit> slopes;
  std::vector<PearsonCell> pearson;
  std::vector<ScatterPoint> scatter;
  /// estimates[size_index][method_index][trial]
  std::vector<std::vector<std::vector<double>>> estimates;

  const CellStats& cell(std::size_t n, const std::string& method) const;
  const PearsonCell& pearson_cell(std::size_t n, const std::string& method) const;
  const SlopeFit& slope(const std::string& method) const;

  nlohmann::json to_json() const;
  /// One row per N x method x statistic.
  std::string tidy_csv() const;
  std::string scatter_csv() const;
};

/// Aggregates trial estimates: bias = mean - truth, population variance,
/// mse = mean squared error against truth, stderr = sqrt(variance / T).
CellStats summarize(std::span<const double> estimates, double truth);

/// Sample Pearson correlation; throws DegenerateStatistic on zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

/// Ordinary least squares of ln(mse) on ln(N).
SlopeFit fit_loglog_slope(std::span<const std::size_t> sizes, std::span<const double> mse);

ExperimentResult run_bias_table(const ExperimentSpec& spec);
ExperimentResult run_mse_slope(const ExperimentSpec& spec);
ExperimentResult run_correlation_boost(const ExperimentSpec& spec);
ExperimentResult run_experiment(const ExperimentSpec& spec);

}  // namespace knnmi
