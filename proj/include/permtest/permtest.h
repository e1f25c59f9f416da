/*
 * permtest C API: exact and Monte Carlo paired-permutation tests.
 *
 * All functions return a pt_status; on failure pt_last_error() returns a
 * thread-local message describing the most recent error on the calling
 * thread. Handles are opaque and owned by the caller once created.
 */
#ifndef PERMTEST_PERMTEST_H
#define PERMTEST_PERMTEST_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PERMTEST_BUILDING)
#    define PT_API __declspec(dllexport)
#  else
#    define PT_API __declspec(dllimport)
#  endif
#else
#  define PT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pt_status {
    PT_OK = 0,
    PT_ERR_INVALID_ARGUMENT = 1,  /* null pointer, bad enum, zero count */
    PT_ERR_INVALID_INPUT = 2,     /* inconsistent records or engine config */
    PT_ERR_PARSE = 3,
    PT_ERR_ALIGNMENT = 4,
    PT_ERR_EMPTY_DATASET = 5,
    PT_ERR_INVALID_STATISTIC = 6,
    PT_ERR_IO = 7,
    PT_ERR_RESOURCE_LIMIT = 8,
    PT_ERR_OVERSIZE = 9,          /* brute force refused, N > 25 */
    PT_ERR_INTERNAL = 10
} pt_status;

typedef enum pt_format { PT_FORMAT_ENTRY_TSV = 0, PT_FORMAT_TOKEN_TSV = 1, PT_FORMAT_JSON = 2 } pt_format;

typedef enum pt_record_kind { PT_RECORD_ACCURACY = 0, PT_RECORD_F1 = 1 } pt_record_kind;

typedef enum pt_tails { PT_TAILS_ONE = 0, PT_TAILS_TWO = 1 } pt_tails;

typedef enum pt_method {
    PT_METHOD_EXACT_DP = 0,
    PT_METHOD_EXACT_FFT = 1,
    PT_METHOD_MONTE_CARLO = 2,
    PT_METHOD_BRUTE_FORCE = 3
} pt_method;

typedef enum pt_builtin_statistic { PT_STAT_ACC_DIFF = 0, PT_STAT_F1_DIFF = 1 } pt_builtin_statistic;

typedef struct pt_dataset pt_dataset;
typedef struct pt_statistic pt_statistic;

typedef struct pt_entry {
    int64_t correct;
    int64_t length;
    int64_t true_positive;
    int64_t incorrect;
} pt_entry;

typedef struct pt_test_options {
    pt_method method;
    uint64_t mc_samples;              /* Monte Carlo only */
    uint64_t seed;                    /* Monte Carlo only */
    uint64_t fft_base_case_threshold; /* exact-fft only */
    uint64_t memory_cap;              /* cells; applies to both exact engines */
    int parallel;                     /* exact-fft: evaluate split halves concurrently */
} pt_test_options;

typedef struct pt_report {
    double p_value;
    double observed_effect;
    pt_method method;
    uint64_t n_entries;
    int has_mc_samples; /* nonzero iff method == PT_METHOD_MONTE_CARLO */
    uint64_t mc_samples;
    uint64_t seed;
    double elapsed_ms;
} pt_report;

typedef struct pt_bench_config {
    const uint64_t* n_values;
    size_t n_values_count;
    const uint64_t* mc_sample_counts;
    size_t mc_sample_counts_count;
    uint64_t trials;
    uint64_t seed;
    double acc_mean;
    double acc_std;
    double len_mean;
    double len_std;
    double correlation;
    pt_tails tails;
    uint64_t fft_base_case_threshold;
    uint64_t memory_cap;
} pt_bench_config;

/* Per-entry effects g(u, v) for a custom statistic; write m values into
 * out_effects and return 0, or return nonzero to signal an error. */
typedef int (*pt_effect_fn)(const pt_entry* u, const pt_entry* v, int64_t* out_effects, void* user_data);

/* h applied to the m component sums (before any tails wrapper). */
typedef double (*pt_aggregate_fn)(const int64_t* sums, size_t m, void* user_data);

PT_API const char* pt_version(void);
PT_API const char* pt_status_string(pt_status status);
PT_API const char* pt_last_error(void);
/* "exact-dp", "exact-fft", "monte-carlo", "brute-force". */
PT_API const char* pt_method_name(pt_method method);

/* Defaults: exact-fft, 10000 samples, seed 0, threshold 32, cap 2^31. */
PT_API void pt_test_options_init(pt_test_options* options);
/* Defaults: the built-in accuracy/length distribution, one trial, seed 0,
 * two-tailed, no sizes (caller must set n_values). */
PT_API void pt_bench_config_init(pt_bench_config* config);

PT_API pt_status pt_dataset_create(const pt_entry* u, const pt_entry* v, size_t n, pt_dataset** out);
PT_API pt_status pt_dataset_load(const char* u_path, pt_format u_format, const char* v_path, pt_format v_format,
                                 pt_dataset** out);
PT_API pt_status pt_dataset_generate(uint64_t n, const pt_bench_config* config, uint64_t seed, pt_dataset** out);
PT_API pt_status pt_dataset_save(const pt_dataset* dataset, pt_format format, pt_record_kind kind,
                                 const char* u_path, const char* v_path);
PT_API size_t pt_dataset_size(const pt_dataset* dataset);
PT_API pt_status pt_dataset_get_entry(const pt_dataset* dataset, size_t index, pt_entry* u, pt_entry* v);
PT_API void pt_dataset_destroy(pt_dataset* dataset);

PT_API pt_status pt_statistic_create_builtin(pt_builtin_statistic kind, pt_tails tails, pt_statistic** out);
/* declared_range holds m non-negative bounds on |g_i|. integer_valued != 0
 * promises that h maps integer sums to integers (exact threshold test). */
PT_API pt_status pt_statistic_create_custom(size_t m, const int64_t* declared_range, pt_effect_fn effects,
                                            pt_aggregate_fn aggregate, void* user_data, pt_tails tails,
                                            int integer_valued, pt_statistic** out);
PT_API size_t pt_statistic_dims(const pt_statistic* statistic);
PT_API void pt_statistic_destroy(pt_statistic* statistic);

PT_API pt_status pt_run_test(const pt_dataset* dataset, const pt_statistic* statistic,
                             const pt_test_options* options, pt_report* out);

/* Single-line JSON: {"p_value":..,"observed_effect":..,"method":..,"n":..,
 * "mc_samples":..,"seed":..,"elapsed_ms":..}. mc_samples and seed are null
 * for exact methods. Writes at most buffer_size bytes including the NUL;
 * *required (if non-null) receives the full length excluding the NUL. */
PT_API pt_status pt_report_to_json(const pt_report* report, char* buffer, size_t buffer_size, size_t* required);

/* Writes the benchmark CSV (method,n,k,trial,elapsed_ms,p_value) to csv_path,
 * or to stdout when csv_path is NULL or "-". Cells that hit a resource
 * limit are recorded with empty elapsed_ms and p_value. */
PT_API pt_status pt_bench_run(const pt_bench_config* config, const char* csv_path);

#ifdef __cplusplus
}
#endif

#endif /* PERMTEST_PERMTEST_H */
