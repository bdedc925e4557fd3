/*
 * eclab C API.
 *
 * Every fallible call returns an eclab_status. On failure a human-readable
 * message is available from eclab_last_error() on the calling thread until the
 * next failing call on that thread. Handles are opaque and released with the
 * matching *_free function; passing NULL to a free function is a no-op.
 * Strings returned by the library are owned by it and stay valid for the
 * lifetime of the handle they came from (or, for eclab_last_error, until the
 * next call on the same thread).
 */
#ifndef ECLAB_ECLAB_H
#define ECLAB_ECLAB_H

#include <stddef.h>

#if defined(ECLAB_BUILDING_LIBRARY)
#define ECLAB_API __attribute__((visibility("default")))
#else
#define ECLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum eclab_status {
    ECLAB_OK = 0,
    ECLAB_ERR_INVALID_ARGUMENT = 1,
    ECLAB_ERR_VALIDATION = 2,
    ECLAB_ERR_IO = 3,
    ECLAB_ERR_MISSING_COLUMN = 4,
    ECLAB_ERR_DUPLICATE_KEY = 5,
    ECLAB_ERR_UNPARSABLE_ROW = 6,
    ECLAB_ERR_EMPTY_AFTER_FILTER = 7,
    ECLAB_ERR_SELF_LOOP = 8,
    ECLAB_ERR_YEAR_NOT_FOUND = 9,
    ECLAB_ERR_EMPTY_MATRIX = 10,
    ECLAB_ERR_DEGENERATE_MATRIX = 11,
    ECLAB_ERR_DEGENERATE_SPECTRUM = 12,
    ECLAB_ERR_NO_CONVERGENCE = 13,
    ECLAB_ERR_REPEATED_EIGENVALUE = 14,
    ECLAB_ERR_CONSTANT_SERIES = 15,
    ECLAB_ERR_ZERO_UBIQUITY = 16,
    ECLAB_ERR_ZERO_DENOMINATOR = 17,
    ECLAB_ERR_WINDOW_OVERLAP = 18,
    ECLAB_ERR_YEAR_MISSING = 19,
    ECLAB_ERR_EMPTY_AT_RISK_SET = 20,
    ECLAB_ERR_INSUFFICIENT_OVERLAP = 21,
    ECLAB_ERR_RANK_DEFICIENT = 22,
    ECLAB_ERR_EMPTY_SAMPLE = 23,
    ECLAB_ERR_PERFECT_SEPARATION = 24,
    ECLAB_ERR_INTERNAL = 25
} eclab_status;

typedef enum eclab_method { ECLAB_METHOD_ITERATE = 0, ECLAB_METHOD_EIGEN = 1 } eclab_method;

/* Library-wide settings and diagnostics. */
ECLAB_API const char* eclab_version(void);
ECLAB_API const char* eclab_last_error(void);
ECLAB_API const char* eclab_status_name(eclab_status status);
/* Process exit code for a status: 0 ok, 2 validation, 3 data, 4 numerical, 1 internal. */
ECLAB_API int eclab_exit_code(eclab_status status);
/* Worker threads for parallel stages; 0 selects the hardware concurrency. */
ECLAB_API void eclab_set_threads(unsigned n);
ECLAB_API unsigned eclab_threads(void);

/* Labeled dense matrix (counts, RCA, M, proximity, density). */
typedef struct eclab_matrix eclab_matrix;

ECLAB_API eclab_status eclab_matrix_create(size_t rows, size_t cols, const char* const* row_labels,
                                           const char* const* col_labels, const double* values_row_major,
                                           eclab_matrix** out);
ECLAB_API eclab_status eclab_matrix_read_csv(const char* path, eclab_matrix** out);
ECLAB_API eclab_status eclab_matrix_write_csv(const eclab_matrix* m, const char* path, const char* corner);
ECLAB_API size_t eclab_matrix_rows(const eclab_matrix* m);
ECLAB_API size_t eclab_matrix_cols(const eclab_matrix* m);
ECLAB_API double eclab_matrix_get(const eclab_matrix* m, size_t row, size_t col);
ECLAB_API const char* eclab_matrix_row_label(const eclab_matrix* m, size_t row);
ECLAB_API const char* eclab_matrix_col_label(const eclab_matrix* m, size_t col);
ECLAB_API void eclab_matrix_free(eclab_matrix* m);

/* Specialization and relatedness on in-memory matrices. */
ECLAB_API eclab_status eclab_rca(const eclab_matrix* counts, eclab_matrix** out);
ECLAB_API eclab_status eclab_binarize(const eclab_matrix* rca, double threshold, eclab_matrix** out);
ECLAB_API eclab_status eclab_proximity(const eclab_matrix* m, eclab_matrix** out);
ECLAB_API eclab_status eclab_density(const eclab_matrix* m, const eclab_matrix* phi, int include_self,
                                     eclab_matrix** out);

/* Complexity scores. */
typedef struct eclab_scores eclab_scores;

ECLAB_API eclab_status eclab_complexity(const eclab_matrix* m, eclab_method method, eclab_scores** out);
ECLAB_API size_t eclab_scores_countries(const eclab_scores* s);
ECLAB_API size_t eclab_scores_activities(const eclab_scores* s);
ECLAB_API const char* eclab_scores_country(const eclab_scores* s, size_t i);
ECLAB_API const char* eclab_scores_activity(const eclab_scores* s, size_t i);
ECLAB_API double eclab_scores_eci(const eclab_scores* s, size_t i, int standardized);
ECLAB_API double eclab_scores_pci(const eclab_scores* s, size_t i, int standardized);
ECLAB_API int eclab_scores_iterations(const eclab_scores* s);
ECLAB_API double eclab_scores_residual(const eclab_scores* s);
/* ECLAB_ERR_INVALID_ARGUMENT when the scores did not come from the eigen path. */
ECLAB_API eclab_status eclab_scores_second_eigenvalue(const eclab_scores* s, double* out);
ECLAB_API void eclab_scores_free(eclab_scores* s);

/*
 * File-level operations, one per command-line subcommand. Optional path
 * arguments may be NULL. Year lists are comma-separated ("2020,2021").
 */
ECLAB_API eclab_status eclab_clean_file(const char* languages, const char* exclusions, int top_n, const char* out);
ECLAB_API eclab_status eclab_rca_file(const char* yearly_counts, int year, const char* out);
ECLAB_API eclab_status eclab_m_file(const char* rca, double threshold, const char* out, const char* nested_out,
                                    const char* nested_order_out);
ECLAB_API eclab_status eclab_complexity_file(const char* m, eclab_method method, const char* eci_out,
                                             const char* pci_out, const char* meta_out);
ECLAB_API eclab_status eclab_proximity_file(const char* m, const char* out);
/* phi may be NULL, in which case proximity is computed from m. */
ECLAB_API eclab_status eclab_density_file(const char* m, const char* phi, int include_self, const char* out);
ECLAB_API eclab_status eclab_backbone_file(const char* phi, double threshold, const char* edges_out,
                                           const char* dot_out);
/*
 * Panel source: either a directory of m_<year>.csv (and optional
 * counts_<year>.csv) files, or a yearly counts file binarized at threshold.
 * Exactly one of panel_dir and yearly_counts must be non-NULL.
 */
typedef struct eclab_panel_source {
    const char* panel_dir;
    const char* yearly_counts;
    double threshold;
} eclab_panel_source;

ECLAB_API eclab_status eclab_events_file(const eclab_panel_source* src, const char* base, const char* post,
                                         const char* out);
/* type: "entry" | "exit"; at_risk: "none" | "nonzero-count" | "rca-positive"; ubiquity: "raw" | "z" | "log". */
ECLAB_API eclab_status eclab_transitions_file(const eclab_panel_source* src, const char* base, const char* post,
                                              const char* type, const char* at_risk, const char* ubiquity,
                                              int include_self, const char* out);
/* spec: JSON file holding one model spec or an array of them; estimator: "ols" | "logit". */
ECLAB_API eclab_status eclab_regress_file(const char* spec, const char* data, const char* estimator,
                                          const char* json_out, const char* text_out);
ECLAB_API eclab_status eclab_iv_file(const char* spec, const char* data, const char* endogenous,
                                     const char* instrument, const char* json_out, const char* text_out);
ECLAB_API eclab_status eclab_correlate_file(const char* m, const char* external_scores, const char* json_out);
/* Ranks ECI software next to the external ECIs; sample_filter restricts to the
 * default population / exports / patents thresholds (needs indicators). */
ECLAB_API eclab_status eclab_rank_file(const char* eci, const char* indicators, int sample_filter, const char* out);
/* overrides_json: JSON merge patch applied over the config file, or NULL. */
ECLAB_API eclab_status eclab_pipeline_run(const char* config_path, const char* overrides_json);

#ifdef __cplusplus
}
#endif

#endif /* ECLAB_ECLAB_H */
