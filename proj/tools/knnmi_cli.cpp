// knnmi command-line front end. Talks to the library only through knnmi.h.
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "knnmi/knnmi.h"

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(knnmi_status status, const std::string& context) {
  if (status == KNNMI_OK) return;
  std::string msg = context + ": " + knnmi_last_error();
  throw DataError(msg);
}

struct DatasetDeleter {
  void operator()(knnmi_dataset* d) const { knnmi_dataset_free(d); }
};
struct ReportDeleter {
  void operator()(knnmi_report* r) const { knnmi_report_free(r); }
};
using DatasetPtr = std::unique_ptr<knnmi_dataset, DatasetDeleter>;
using ReportPtr = std::unique_ptr<knnmi_report, ReportDeleter>;

struct Common {
  std::string input;
  bool header = false;
  unsigned k = 4;
  std::string norm;
  std::optional<double> jitter;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 0;
  bool strict = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_norm = true) {
  cmd->add_option("--input", c.input, "CSV file of samples, one row per sample")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_flag("--header", c.header, "Skip the first line of the CSV file");
  cmd->add_option("--k", c.k, "Neighbour order")->capture_default_str()->check(CLI::PositiveNumber);
  if (with_norm)
    cmd->add_option("--norm", c.norm, "Norm: l2 or linf (default depends on method)")
        ->check(CLI::IsMember({"l2", "linf"}));
  cmd->add_option("--jitter", c.jitter, "Break duplicate rows with uniform noise of this scale")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "Seed for --jitter");
  cmd->add_option("--out", c.out, "Write the JSON document here instead of stdout");
  cmd->add_option("--threads", c.threads, "Cap on worker threads (0 = all cores)");
}

std::vector<size_t> parse_groups(const std::string& text) {
  std::vector<size_t> dims;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const long v = std::stol(item, &pos);
      while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
      if (pos != item.size() || v <= 0) throw std::invalid_argument(item);
      dims.push_back(static_cast<size_t>(v));
    } catch (const std::exception&) {
      throw UsageError("--groups expects a comma-separated list of positive integers, got '" +
                       text + "'");
    }
  }
  if (dims.empty()) throw UsageError("--groups must name at least one group");
  return dims;
}

int norm_code(const std::string& norm) {
  if (norm.empty()) return -1;
  return norm == "l2" ? KNNMI_NORM_L2 : KNNMI_NORM_LINF;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

void emit(const Common& c, const std::string& doc) {
  if (c.out.empty()) {
    std::cout << doc << '\n';
  } else {
    write_text(c.out, doc + "\n");
  }
}

void validate_common(const Common& c) {
  if (c.jitter && !c.seed) throw UsageError("--jitter needs --seed so the noise is reproducible");
  if (c.seed && !c.jitter) throw UsageError("--seed only applies together with --jitter");
}

DatasetPtr load(const Common& c, const std::vector<size_t>& dims) {
  knnmi_dataset* raw = nullptr;
  check(knnmi_dataset_load_csv(c.input.c_str(), dims.data(), dims.size(), c.header ? 1 : 0, &raw),
        "reading " + c.input);
  DatasetPtr ds(raw);
  if (c.jitter) {
    knnmi_dataset* jittered = nullptr;
    check(knnmi_dataset_check_duplicates(ds.get(), *c.jitter, *c.seed, &jittered), "jitter");
    ds.reset(jittered);
  }
  return ds;
}

void print_warnings(const knnmi_report* r) {
  for (size_t i = 0; i < knnmi_report_warning_count(r); ++i)
    std::cerr << "warning: " << knnmi_report_warning(r, i) << '\n';
}

void finish(const Common& c, knnmi_report* raw) {
  ReportPtr report(raw);
  print_warnings(report.get());
  emit(c, knnmi_report_json(report.get()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nearest-neighbour estimators of entropy and mutual information"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(knnmi_version()));

  Common ent_c, mi_c, mmi_c;

  auto* ent = app.add_subcommand("estimate-entropy", "Differential entropy of all columns");
  add_common(ent, ent_c);
  bool ent_truncate = false;
  double ent_delta = 0.5;
  ent->add_flag("--truncate", ent_truncate, "Use the truncated estimator");
  ent->add_option("--delta", ent_delta, "Truncation exponent")->capture_default_str()
      ->check(CLI::PositiveNumber);

  auto* mi = app.add_subcommand("estimate-mi", "Mutual information between two groups");
  add_common(mi, mi_c);
  std::optional<size_t> dx, dy;
  std::string mi_groups;
  std::string mi_method = "ksg";
  bool mi_truncate = false;
  double mi_delta = 0.5;
  mi->add_option("--dx", dx, "Columns in X")->check(CLI::PositiveNumber);
  mi->add_option("--dy", dy, "Columns in Y")->check(CLI::PositiveNumber);
  mi->add_option("--groups", mi_groups, "Group dimensions, e.g. \"1,1\"");
  mi->add_option("--method", mi_method, "3kl, ksg or biksg")->capture_default_str()
      ->check(CLI::IsMember({"3kl", "ksg", "biksg"}));
  mi->add_flag("--strict-boundary", mi_c.strict,
               "ksg only: count marginal neighbours strictly inside the radius");
  mi->add_flag("--truncate", mi_truncate, "Use the truncated estimator");
  mi->add_option("--delta", mi_delta, "Truncation exponent")->capture_default_str()
      ->check(CLI::PositiveNumber);

  auto* mmi = app.add_subcommand("estimate-mmi", "Multivariate mutual information");
  add_common(mmi, mmi_c);
  std::string mmi_groups;
  std::string mmi_method = "ksg";
  std::string set_function;
  int psi_offset = 1;
  mmi->add_option("--groups", mmi_groups, "Group dimensions, e.g. \"1,1,1\"")->required();
  auto* mmi_method_opt = mmi->add_option("--method", mmi_method, "kl, ksg or biksg")
                             ->capture_default_str()
                             ->check(CLI::IsMember({"kl", "ksg", "biksg"}));
  mmi->add_option("--set-function", set_function,
                  "JSON file with a balanced set function (overrides --method)")
      ->check(CLI::ExistingFile)
      ->excludes(mmi_method_opt);
  mmi->add_flag("--strict-boundary", mmi_c.strict,
                "linf only: count marginal neighbours strictly inside the radius");
  mmi->add_option("--psi-offset", psi_offset, "1 uses psi(n+1), 0 uses psi(n) (linf only)")
      ->capture_default_str()
      ->check(CLI::IsMember({0, 1}));

  auto* exp = app.add_subcommand("experiment", "Run a JSON experiment spec");
  std::string spec_path;
  std::optional<std::uint64_t> exp_seed;
  std::string exp_out;
  unsigned exp_threads = 0;
  exp->add_option("--spec", spec_path, "Experiment spec (JSON)")->required()
      ->check(CLI::ExistingFile);
  exp->add_option("--seed", exp_seed, "Master seed (required)");
  exp->add_option("--out", exp_out, "Write the result JSON here instead of stdout");
  exp->add_option("--threads", exp_threads, "Cap on worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*ent) {
      validate_common(ent_c);
      knnmi_set_threads(ent_c.threads);
      auto ds = load(ent_c, {});
      knnmi_options opt = knnmi_default_options();
      opt.k = ent_c.k;
      opt.norm = norm_code(ent_c.norm);
      opt.truncate = ent_truncate;
      opt.delta = ent_delta;
      knnmi_report* r = nullptr;
      check(knnmi_estimate_entropy(ds.get(), &opt, &r), "estimate-entropy");
      finish(ent_c, r);
    } else if (*mi) {
      validate_common(mi_c);
      std::vector<size_t> dims;
      if (!mi_groups.empty()) {
        if (dx || dy) throw UsageError("use either --dx/--dy or --groups, not both");
        dims = parse_groups(mi_groups);
        if (dims.size() != 2) throw UsageError("estimate-mi needs exactly two groups");
      } else {
        if (!dx || !dy) throw UsageError("estimate-mi needs --dx and --dy (or --groups)");
        dims = {*dx, *dy};
      }
      knnmi_mi_method method = KNNMI_MI_KSG;
      if (mi_method == "3kl") method = KNNMI_MI_3KL;
      if (mi_method == "biksg") method = KNNMI_MI_BIKSG;
      if (method == KNNMI_MI_KSG && mi_c.norm == "l2")
        throw UsageError("ksg is defined for the linf norm; use biksg for l2");
      if (method == KNNMI_MI_BIKSG && mi_c.norm == "linf")
        throw UsageError("biksg is defined for the l2 norm; use ksg for linf");
      knnmi_set_threads(mi_c.threads);
      auto ds = load(mi_c, dims);
      knnmi_options opt = knnmi_default_options();
      opt.k = mi_c.k;
      opt.norm = norm_code(mi_c.norm);
      opt.truncate = mi_truncate;
      opt.delta = mi_delta;
      if (mi_c.strict && method != KNNMI_MI_KSG)
        throw UsageError("--strict-boundary applies only to --method ksg");
      opt.strict_boundary = mi_c.strict;
      knnmi_report* r = nullptr;
      check(knnmi_estimate_mi(ds.get(), method, &opt, &r), "estimate-mi");
      finish(mi_c, r);
    } else if (*mmi) {
      validate_common(mmi_c);
      const auto dims = parse_groups(mmi_groups);
      if (dims.size() < 2) throw UsageError("estimate-mmi needs at least two groups");
      knnmi_options opt = knnmi_default_options();
      opt.k = mmi_c.k;
      opt.norm = norm_code(mmi_c.norm);
      opt.psi_offset = psi_offset;
      const bool general = !set_function.empty();
      knnmi_mmi_method method = KNNMI_MMI_KSG;
      if (mmi_method == "kl") method = KNNMI_MMI_KL;
      if (mmi_method == "biksg") method = KNNMI_MMI_BIKSG;
      if (!general && method == KNNMI_MMI_KSG && mmi_c.norm == "l2")
        throw UsageError("mmi ksg is defined for the linf norm; use biksg for l2");
      if (!general && method == KNNMI_MMI_BIKSG && mmi_c.norm == "linf")
        throw UsageError("mmi biksg is defined for the l2 norm; use ksg for linf");
      if (mmi_c.strict && (general ? mmi_c.norm == "l2" : method != KNNMI_MMI_KSG))
        throw UsageError("--strict-boundary applies only to linf shared-radius estimators");
      if (mmi_c.strict && psi_offset != 1)
        throw UsageError("--strict-boundary needs --psi-offset 1");
      opt.strict_boundary = mmi_c.strict;
      if (psi_offset != 1 && (general ? mmi_c.norm == "l2" : method != KNNMI_MMI_KSG))
        throw UsageError("--psi-offset applies only to linf shared-radius estimators");
      knnmi_set_threads(mmi_c.threads);
      auto ds = load(mmi_c, dims);
      knnmi_report* r = nullptr;
      if (general) {
        const std::string f = read_file(set_function);
        check(knnmi_estimate_mmi_general(ds.get(), f.c_str(), &opt, &r), "estimate-mmi");
      } else {
        check(knnmi_estimate_mmi(ds.get(), method, &opt, &r), "estimate-mmi");
      }
      finish(mmi_c, r);
    } else if (*exp) {
      if (!exp_seed) throw UsageError("experiment needs --seed; all randomness flows from it");
      knnmi_set_threads(exp_threads);
      const std::string spec = read_file(spec_path);
      std::string outputs, kind;
      try {
        const auto doc = nlohmann::json::parse(spec);
        if (doc.is_object()) {
          outputs = doc.value("outputs", std::string{});
          kind = doc.value("kind", std::string{"bias_table"});
        }
      } catch (const nlohmann::json::exception& e) {
        throw DataError(spec_path + ": " + e.what());
      }
      char* result = nullptr;
      char* tidy = nullptr;
      char* scatter = nullptr;
      check(knnmi_run_experiment(spec.c_str(), *exp_seed, &result, &tidy, &scatter),
            "experiment " + spec_path);
      const std::string result_s = result, tidy_s = tidy, scatter_s = scatter;
      knnmi_string_free(result);
      knnmi_string_free(tidy);
      knnmi_string_free(scatter);
      if (!outputs.empty()) {
        write_text(outputs + ".tidy.csv", tidy_s);
        if (kind == "correlation_boost") write_text(outputs + ".scatter.csv", scatter_s);
      }
      Common c;
      c.out = exp_out;
      emit(c, result_s);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
