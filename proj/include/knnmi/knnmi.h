/*
 * knnmi C API: fixed-k nearest-neighbour estimators of differential entropy
 * and (multivariate) mutual information.
 *
 * All handles are opaque. Every fallible call returns a knnmi_status; on
 * failure knnmi_last_error() returns a message describing the most recent
 * error on the calling thread. Estimates are in nats.
 */
#ifndef KNNMI_H
#define KNNMI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(KNNMI_BUILDING)
#    define KNNMI_API __declspec(dllexport)
#  else
#    define KNNMI_API __declspec(dllimport)
#  endif
#else
#  define KNNMI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum knnmi_status {
  KNNMI_OK = 0,
  KNNMI_ERR_INVALID_ARGUMENT = 1,
  KNNMI_ERR_DOMAIN = 2,
  KNNMI_ERR_INGESTION = 3,
  KNNMI_ERR_DUPLICATE_SAMPLE = 4,
  KNNMI_ERR_VALIDATION = 5,
  KNNMI_ERR_DEGENERATE = 6,
  KNNMI_ERR_INTERNAL = 7
} knnmi_status;

typedef enum knnmi_norm { KNNMI_NORM_LINF = 0, KNNMI_NORM_L2 = 2 } knnmi_norm;

typedef enum knnmi_mi_method {
  KNNMI_MI_3KL = 0,
  KNNMI_MI_KSG = 1,
  KNNMI_MI_BIKSG = 2
} knnmi_mi_method;

typedef enum knnmi_mmi_method {
  KNNMI_MMI_KL = 0,
  KNNMI_MMI_KSG = 1,
  KNNMI_MMI_BIKSG = 2
} knnmi_mmi_method;

typedef enum knnmi_term {
  KNNMI_TERM_LOCAL = 0, /* per-sample terms whose mean is the estimate */
  KNNMI_TERM_XI_X = 1,
  KNNMI_TERM_XI_Y = 2,
  KNNMI_TERM_XI_Z = 3,
  KNNMI_TERM_B_X = 4,
  KNNMI_TERM_B_Y = 5,
  KNNMI_TERM_B_Z = 6
} knnmi_term;

typedef struct knnmi_dataset knnmi_dataset;
typedef struct knnmi_report knnmi_report;

typedef struct knnmi_options {
  unsigned k;            /* neighbour order, default 4 */
  int norm;              /* knnmi_norm, or -1 for the method's default */
  int truncate;          /* nonzero enables radius truncation */
  double delta;          /* truncation exponent, default 0.5 */
  double threshold;      /* explicit truncation radius; NaN means computed */
  int psi_offset;        /* MMI KSG: 1 = psi(n+1) (default), 0 = psi(n) */
  int strict_boundary;   /* KSG family: nonzero counts ||.|| < rho instead of <= */
} knnmi_options;

KNNMI_API const char* knnmi_version(void);
KNNMI_API const char* knnmi_last_error(void);
KNNMI_API const char* knnmi_status_name(knnmi_status status);
KNNMI_API void knnmi_set_threads(unsigned threads);
KNNMI_API knnmi_options knnmi_default_options(void);

/* Datasets ------------------------------------------------------------- */

/* group_count == 0 reads every column as a single group. */
KNNMI_API knnmi_status knnmi_dataset_load_csv(const char* path, const size_t* group_dims,
                                              size_t group_count, int has_header,
                                              knnmi_dataset** out);
/* values is row-major rows x sum(group_dims). */
KNNMI_API knnmi_status knnmi_dataset_from_rows(const double* values, size_t rows,
                                               const size_t* group_dims, size_t group_count,
                                               knnmi_dataset** out);
/* jitter_scale == 0 rejects duplicate rows; > 0 adds seeded uniform noise. */
KNNMI_API knnmi_status knnmi_dataset_check_duplicates(const knnmi_dataset* ds,
                                                      double jitter_scale, uint64_t seed,
                                                      knnmi_dataset** out);
KNNMI_API size_t knnmi_dataset_rows(const knnmi_dataset* ds);
KNNMI_API size_t knnmi_dataset_cols(const knnmi_dataset* ds);
KNNMI_API size_t knnmi_dataset_group_count(const knnmi_dataset* ds);
KNNMI_API knnmi_status knnmi_dataset_value(const knnmi_dataset* ds, size_t row, size_t col,
                                           double* out);
KNNMI_API void knnmi_dataset_free(knnmi_dataset* ds);

/* Estimators ----------------------------------------------------------- */

KNNMI_API knnmi_status knnmi_estimate_entropy(const knnmi_dataset* ds, const knnmi_options* opt,
                                              knnmi_report** out);
KNNMI_API knnmi_status knnmi_estimate_mi(const knnmi_dataset* ds, knnmi_mi_method method,
                                         const knnmi_options* opt, knnmi_report** out);
/* Local decomposition with biases against (h_x, h_y, h_xy); truth may be NULL. */
KNNMI_API knnmi_status knnmi_decompose_mi(const knnmi_dataset* ds, knnmi_mi_method method,
                                          const knnmi_options* opt, const double* truth,
                                          knnmi_report** out);
KNNMI_API knnmi_status knnmi_estimate_mmi(const knnmi_dataset* ds, knnmi_mmi_method method,
                                          const knnmi_options* opt, knnmi_report** out);
/* set_function_json: [{"groups": [0, 2], "coeff": "1/1"}, ...] */
KNNMI_API knnmi_status knnmi_estimate_mmi_general(const knnmi_dataset* ds,
                                                  const char* set_function_json,
                                                  const knnmi_options* opt, knnmi_report** out);

KNNMI_API double knnmi_report_estimate(const knnmi_report* r);
KNNMI_API const char* knnmi_report_method(const knnmi_report* r);
KNNMI_API size_t knnmi_report_samples(const knnmi_report* r);
/* Borrowed pointer valid until knnmi_report_free; *len = 0 if unavailable. */
KNNMI_API const double* knnmi_report_terms(const knnmi_report* r, knnmi_term which, size_t* len);
KNNMI_API size_t knnmi_report_warning_count(const knnmi_report* r);
KNNMI_API const char* knnmi_report_warning(const knnmi_report* r, size_t index);
/* JSON document owned by the report (17 significant digits). */
KNNMI_API const char* knnmi_report_json(const knnmi_report* r);
KNNMI_API void knnmi_report_free(knnmi_report* r);

/* Experiments ---------------------------------------------------------- */

/* Runs a JSON experiment spec with the given master seed. The three output
   strings (result JSON, tidy CSV, scatter CSV) are allocated by the library
   and released with knnmi_string_free; any output pointer may be NULL. */
KNNMI_API knnmi_status knnmi_run_experiment(const char* spec_json, uint64_t seed,
                                            char** result_json, char** tidy_csv,
                                            char** scatter_csv);
KNNMI_API void knnmi_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* KNNMI_H */
