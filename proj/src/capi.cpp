#include "knnmi/knnmi.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <memory>
#include <string>

#include "knnmi/dataset.hpp"
#include "knnmi/entropy.hpp"
#include "knnmi/error.hpp"
#include "knnmi/experiments.hpp"
#include "knnmi/json_out.hpp"
#include "knnmi/mi.hpp"
#include "knnmi/mmi.hpp"
#include "knnmi/parallel.hpp"

struct knnmi_dataset {
  knnmi::Dataset data;
};

struct knnmi_report {
  knnmi::EstimateReport report;
  std::string json;
};

namespace {

thread_local std::string t_last_error;

knnmi_status status_for(knnmi::ErrorKind kind) {
  switch (kind) {
    case knnmi::ErrorKind::InvalidArgument: return KNNMI_ERR_INVALID_ARGUMENT;
    case knnmi::ErrorKind::Domain: return KNNMI_ERR_DOMAIN;
    case knnmi::ErrorKind::Ingestion: return KNNMI_ERR_INGESTION;
    case knnmi::ErrorKind::DuplicateSample: return KNNMI_ERR_DUPLICATE_SAMPLE;
    case knnmi::ErrorKind::Validation: return KNNMI_ERR_VALIDATION;
    case knnmi::ErrorKind::DegenerateStatistic: return KNNMI_ERR_DEGENERATE;
  }
  return KNNMI_ERR_INTERNAL;
}

template <typename Fn>
knnmi_status guarded(Fn&& fn) {
  try {
    fn();
    t_last_error.clear();
    return KNNMI_OK;
  } catch (const knnmi::Error& e) {
    t_last_error = e.what();
    return status_for(e.kind());
  } catch (const std::bad_alloc&) {
    t_last_error = "out of memory";
    return KNNMI_ERR_INTERNAL;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return KNNMI_ERR_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) knnmi::fail(knnmi::ErrorKind::InvalidArgument, what);
}

std::vector<std::size_t> dims_from(const size_t* group_dims, size_t group_count) {
  if (group_count == 0) return {};
  require(group_dims != nullptr, "group dimensions are required");
  return {group_dims, group_dims + group_count};
}

knnmi_options resolve(const knnmi_options* opt) {
  return opt ? *opt : knnmi_default_options();
}

std::optional<knnmi::Norm> norm_from(int norm) {
  if (norm < 0) return std::nullopt;
  if (norm == KNNMI_NORM_LINF) return knnmi::Norm::LInf;
  if (norm == KNNMI_NORM_L2) return knnmi::Norm::L2;
  knnmi::fail(knnmi::ErrorKind::InvalidArgument, "norm must be KNNMI_NORM_LINF or KNNMI_NORM_L2");
}

std::optional<double> threshold_from(double t) {
  if (std::isnan(t)) return std::nullopt;
  return t;
}

knnmi::Boundary boundary_from(const knnmi_options& o) {
  return o.strict_boundary ? knnmi::Boundary::Strict : knnmi::Boundary::Inclusive;
}

knnmi::MiConfig mi_config(knnmi_mi_method method, const knnmi_options& o) {
  knnmi::MiConfig cfg;
  switch (method) {
    case KNNMI_MI_3KL: cfg.kind = knnmi::MiKind::ThreeKL; break;
    case KNNMI_MI_KSG: cfg.kind = knnmi::MiKind::Ksg; break;
    case KNNMI_MI_BIKSG: cfg.kind = knnmi::MiKind::BiKsg; break;
    default: knnmi::fail(knnmi::ErrorKind::InvalidArgument, "unknown MI method");
  }
  cfg.k = o.k;
  cfg.norm = norm_from(o.norm);
  cfg.truncate = o.truncate != 0;
  cfg.delta = o.delta;
  cfg.threshold_override = threshold_from(o.threshold);
  cfg.boundary = boundary_from(o);
  return cfg;
}

knnmi_report* wrap(knnmi::EstimateReport report) {
  auto r = std::make_unique<knnmi_report>();
  r->json = knnmi::dump_json(knnmi::report_to_json(report));
  r->report = std::move(report);
  return r.release();
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* knnmi_version(void) { return "1.0.0"; }

const char* knnmi_last_error(void) { return t_last_error.c_str(); }

const char* knnmi_status_name(knnmi_status status) {
  switch (status) {
    case KNNMI_OK: return "ok";
    case KNNMI_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case KNNMI_ERR_DOMAIN: return "domain";
    case KNNMI_ERR_INGESTION: return "ingestion";
    case KNNMI_ERR_DUPLICATE_SAMPLE: return "duplicate_sample";
    case KNNMI_ERR_VALIDATION: return "validation";
    case KNNMI_ERR_DEGENERATE: return "degenerate";
    case KNNMI_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void knnmi_set_threads(unsigned threads) { knnmi::set_max_threads(threads); }

knnmi_options knnmi_default_options(void) {
  knnmi_options o;
  o.k = 4;
  o.norm = -1;
  o.truncate = 0;
  o.delta = 0.5;
  o.threshold = NAN;
  o.psi_offset = 1;
  o.strict_boundary = 0;
  return o;
}

knnmi_status knnmi_dataset_load_csv(const char* path, const size_t* group_dims,
                                    size_t group_count, int has_header, knnmi_dataset** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path and output handle are required");
    *out = nullptr;
    auto ds = knnmi::load_csv(path, dims_from(group_dims, group_count), has_header != 0);
    *out = new knnmi_dataset{std::move(ds)};
  });
}

knnmi_status knnmi_dataset_from_rows(const double* values, size_t rows, const size_t* group_dims,
                                     size_t group_count, knnmi_dataset** out) {
  return guarded([&] {
    require(values != nullptr && out != nullptr, "values and output handle are required");
    *out = nullptr;
    auto dims = dims_from(group_dims, group_count);
    require(!dims.empty(), "group dimensions are required");
    std::size_t cols = 0;
    for (auto d : dims) cols += d;
    std::vector<double> v(values, values + rows * cols);
    *out = new knnmi_dataset{knnmi::Dataset(std::move(v), cols, std::move(dims))};
  });
}

knnmi_status knnmi_dataset_check_duplicates(const knnmi_dataset* ds, double jitter_scale,
                                            uint64_t seed, knnmi_dataset** out) {
  return guarded([&] {
    require(ds != nullptr && out != nullptr, "dataset and output handle are required");
    *out = nullptr;
    knnmi::DegeneracyPolicy policy;
    policy.mode = jitter_scale > 0.0 ? knnmi::DegeneracyMode::Jitter : knnmi::DegeneracyMode::Error;
    policy.jitter_scale = jitter_scale;
    *out = new knnmi_dataset{knnmi::check_duplicates(ds->data, policy, seed)};
  });
}

size_t knnmi_dataset_rows(const knnmi_dataset* ds) { return ds ? ds->data.rows() : 0; }
size_t knnmi_dataset_cols(const knnmi_dataset* ds) { return ds ? ds->data.cols() : 0; }
size_t knnmi_dataset_group_count(const knnmi_dataset* ds) {
  return ds ? ds->data.group_count() : 0;
}

knnmi_status knnmi_dataset_value(const knnmi_dataset* ds, size_t row, size_t col, double* out) {
  return guarded([&] {
    require(ds != nullptr && out != nullptr, "dataset and output are required");
    require(row < ds->data.rows() && col < ds->data.cols(), "index out of range");
    *out = ds->data.at(row, col);
  });
}

void knnmi_dataset_free(knnmi_dataset* ds) { delete ds; }

knnmi_status knnmi_estimate_entropy(const knnmi_dataset* ds, const knnmi_options* opt,
                                    knnmi_report** out) {
  return guarded([&] {
    require(ds != nullptr && out != nullptr, "dataset and output handle are required");
    *out = nullptr;
    const auto o = resolve(opt);
    require(!o.strict_boundary, "the count boundary does not apply to entropy estimation");
    knnmi::EntropyConfig cfg;
    cfg.k = o.k;
    cfg.norm = norm_from(o.norm).value_or(knnmi::Norm::LInf);
    cfg.truncate = o.truncate != 0;
    cfg.delta = o.delta;
    cfg.threshold_override = threshold_from(o.threshold);
    *out = wrap(knnmi::estimate_entropy(ds->data, cfg));
  });
}

knnmi_status knnmi_estimate_mi(const knnmi_dataset* ds, knnmi_mi_method method,
                               const knnmi_options* opt, knnmi_report** out) {
  return knnmi_decompose_mi(ds, method, opt, nullptr, out);
}

knnmi_status knnmi_decompose_mi(const knnmi_dataset* ds, knnmi_mi_method method,
                                const knnmi_options* opt, const double* truth,
                                knnmi_report** out) {
  return guarded([&] {
    require(ds != nullptr && out != nullptr, "dataset and output handle are required");
    *out = nullptr;
    const auto cfg = mi_config(method, resolve(opt));
    if (truth == nullptr) {
      *out = wrap(knnmi::estimate_mi(ds->data, cfg));
      return;
    }
    auto report = knnmi::estimate_mi(ds->data, cfg);
    report.mi_terms = knnmi::decompose_local(ds->data, cfg,
                                             knnmi::TrueEntropies{truth[0], truth[1], truth[2]});
    *out = wrap(std::move(report));
  });
}

knnmi_status knnmi_estimate_mmi(const knnmi_dataset* ds, knnmi_mmi_method method,
                                const knnmi_options* opt, knnmi_report** out) {
  return guarded([&] {
    require(ds != nullptr && out != nullptr, "dataset and output handle are required");
    *out = nullptr;
    const auto o = resolve(opt);
    const auto norm = norm_from(o.norm);
    require(!o.truncate, "truncation is not defined for multivariate estimators");
    switch (method) {
      case KNNMI_MMI_KL:
        require(!o.strict_boundary, "the strict count boundary applies only to mmi ksg");
        *out = wrap(knnmi::mmi_l_plus_1_kl(ds->data, o.k, norm.value_or(knnmi::Norm::LInf)));
        return;
      case KNNMI_MMI_KSG:
        require(!norm || *norm == knnmi::Norm::LInf, "mmi ksg is defined only for the linf norm");
        *out = wrap(knnmi::mmi_ksg(ds->data, o.k, o.psi_offset, boundary_from(o)));
        return;
      case KNNMI_MMI_BIKSG:
        require(!norm || *norm == knnmi::Norm::L2, "mmi biksg is defined only for the l2 norm");
        require(!o.strict_boundary, "the strict count boundary applies only to mmi ksg");
        *out = wrap(knnmi::mmi_biksg(ds->data, o.k));
        return;
    }
    knnmi::fail(knnmi::ErrorKind::InvalidArgument, "unknown MMI method");
  });
}

knnmi_status knnmi_estimate_mmi_general(const knnmi_dataset* ds, const char* set_function_json,
                                        const knnmi_options* opt, knnmi_report** out) {
  return guarded([&] {
    require(ds != nullptr && out != nullptr && set_function_json != nullptr,
            "dataset, set function and output handle are required");
    *out = nullptr;
    const auto o = resolve(opt);
    require(!o.truncate, "truncation is not defined for multivariate estimators");
    const auto f = knnmi::BalancedSetFunction::from_json(set_function_json, ds->data.group_count());
    knnmi::GeneralMmiOptions g;
    g.norm = norm_from(o.norm).value_or(knnmi::Norm::LInf);
    g.psi_offset = o.psi_offset;
    g.boundary = boundary_from(o);
    *out = wrap(knnmi::mmi_general(ds->data, f, o.k, g));
  });
}

double knnmi_report_estimate(const knnmi_report* r) { return r ? r->report.estimate : NAN; }
const char* knnmi_report_method(const knnmi_report* r) {
  return r ? r->report.method.c_str() : "";
}
size_t knnmi_report_samples(const knnmi_report* r) { return r ? r->report.samples : 0; }

const double* knnmi_report_terms(const knnmi_report* r, knnmi_term which, size_t* len) {
  if (len) *len = 0;
  if (!r) return nullptr;
  const std::vector<double>* v = nullptr;
  const auto& mi = r->report.mi_terms;
  switch (which) {
    case KNNMI_TERM_LOCAL: v = &r->report.local; break;
    case KNNMI_TERM_XI_X: v = mi ? &mi->xi_x : nullptr; break;
    case KNNMI_TERM_XI_Y: v = mi ? &mi->xi_y : nullptr; break;
    case KNNMI_TERM_XI_Z: v = mi ? &mi->xi_z : nullptr; break;
    case KNNMI_TERM_B_X: v = mi ? &mi->b_x : nullptr; break;
    case KNNMI_TERM_B_Y: v = mi ? &mi->b_y : nullptr; break;
    case KNNMI_TERM_B_Z: v = mi ? &mi->b_z : nullptr; break;
  }
  if (!v || v->empty()) return nullptr;
  if (len) *len = v->size();
  return v->data();
}

size_t knnmi_report_warning_count(const knnmi_report* r) {
  return r ? r->report.warnings.size() : 0;
}

const char* knnmi_report_warning(const knnmi_report* r, size_t index) {
  if (!r || index >= r->report.warnings.size()) return nullptr;
  return r->report.warnings[index].c_str();
}

const char* knnmi_report_json(const knnmi_report* r) { return r ? r->json.c_str() : ""; }

void knnmi_report_free(knnmi_report* r) { delete r; }

knnmi_status knnmi_run_experiment(const char* spec_json, uint64_t seed, char** result_json,
                                  char** tidy_csv, char** scatter_csv) {
  return guarded([&] {
    require(spec_json != nullptr, "experiment spec is required");
    if (result_json) *result_json = nullptr;
    if (tidy_csv) *tidy_csv = nullptr;
    if (scatter_csv) *scatter_csv = nullptr;
    const auto spec = knnmi::parse_experiment_spec(spec_json, seed);
    const auto result = knnmi::run_experiment(spec);
    std::unique_ptr<char, decltype(&std::free)> json(duplicate(knnmi::dump_json(result.to_json())),
                                                     &std::free);
    std::unique_ptr<char, decltype(&std::free)> tidy(duplicate(result.tidy_csv()), &std::free);
    std::unique_ptr<char, decltype(&std::free)> scatter(duplicate(result.scatter_csv()), &std::free);
    if (result_json) *result_json = json.release();
    if (tidy_csv) *tidy_csv = tidy.release();
    if (scatter_csv) *scatter_csv = scatter.release();
  });
}

void knnmi_string_free(char* s) { std::free(s); }

}  // extern "C"
