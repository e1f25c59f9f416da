#include "permtest/permtest.h"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <new>
#include <string>

#include "json.hpp"

#include "permtest/bench.hpp"
#include "permtest/data_io.hpp"
#include "permtest/errors.hpp"
#include "permtest/statistics.hpp"
#include "permtest/test_runner.hpp"

struct pt_dataset {
    permtest::PairedDataset data;
};

struct pt_statistic {
    permtest::DecomposableStatistic stat;
};

namespace {

thread_local std::string last_error;

pt_status fail(pt_status status, const char* message)
{
    last_error = message;
    return status;
}

template <typename Fn>
pt_status guarded(Fn&& fn)
{
    try {
        fn();
        last_error.clear();
        return PT_OK;
    } catch (const permtest::OversizeError& e) {
        return fail(PT_ERR_OVERSIZE, e.what());
    } catch (const permtest::ResourceLimitError& e) {
        return fail(PT_ERR_RESOURCE_LIMIT, e.what());
    } catch (const permtest::ParseError& e) {
        return fail(PT_ERR_PARSE, e.what());
    } catch (const permtest::AlignmentError& e) {
        return fail(PT_ERR_ALIGNMENT, e.what());
    } catch (const permtest::EmptyDatasetError& e) {
        return fail(PT_ERR_EMPTY_DATASET, e.what());
    } catch (const permtest::InvalidStatisticError& e) {
        return fail(PT_ERR_INVALID_STATISTIC, e.what());
    } catch (const permtest::InvalidInputError& e) {
        return fail(PT_ERR_INVALID_INPUT, e.what());
    } catch (const permtest::IoError& e) {
        return fail(PT_ERR_IO, e.what());
    } catch (const std::bad_alloc&) {
        return fail(PT_ERR_RESOURCE_LIMIT, "out of memory");
    } catch (const std::exception& e) {
        return fail(PT_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(PT_ERR_INTERNAL, "unknown error");
    }
}

permtest::EntryRecord to_record(const pt_entry& e)
{
    return {e.correct, e.length, e.true_positive, e.incorrect};
}

pt_entry to_entry(const permtest::EntryRecord& r)
{
    return {r.correct, r.length, r.true_positive, r.incorrect};
}

bool valid_format(pt_format f)
{
    return f == PT_FORMAT_ENTRY_TSV || f == PT_FORMAT_TOKEN_TSV || f == PT_FORMAT_JSON;
}

permtest::CorpusFormat to_format(pt_format f)
{
    switch (f) {
    case PT_FORMAT_TOKEN_TSV:
        return permtest::CorpusFormat::token_tsv;
    case PT_FORMAT_JSON:
        return permtest::CorpusFormat::json;
    default:
        return permtest::CorpusFormat::entry_tsv;
    }
}

bool valid_tails(pt_tails t)
{
    return t == PT_TAILS_ONE || t == PT_TAILS_TWO;
}

permtest::Tails to_tails(pt_tails t)
{
    return t == PT_TAILS_ONE ? permtest::Tails::one : permtest::Tails::two;
}

permtest::BenchConfig to_bench_config(const pt_bench_config& c)
{
    permtest::BenchConfig cfg;
    cfg.n_values.assign(c.n_values, c.n_values + c.n_values_count);
    cfg.mc_sample_counts.assign(c.mc_sample_counts, c.mc_sample_counts + c.mc_sample_counts_count);
    cfg.trials = c.trials;
    cfg.seed = c.seed;
    cfg.acc_mean = c.acc_mean;
    cfg.acc_std = c.acc_std;
    cfg.len_mean = c.len_mean;
    cfg.len_std = c.len_std;
    cfg.correlation = c.correlation;
    cfg.tails = to_tails(c.tails);
    cfg.engine.fft_base_case_threshold = c.fft_base_case_threshold;
    cfg.engine.memory_cap = c.memory_cap;
    return cfg;
}

} // namespace

extern "C" {

const char* pt_version(void)
{
    return "1.0.0";
}

const char* pt_status_string(pt_status status)
{
    switch (status) {
    case PT_OK:
        return "ok";
    case PT_ERR_INVALID_ARGUMENT:
        return "invalid argument";
    case PT_ERR_INVALID_INPUT:
        return "invalid input";
    case PT_ERR_PARSE:
        return "parse error";
    case PT_ERR_ALIGNMENT:
        return "alignment error";
    case PT_ERR_EMPTY_DATASET:
        return "empty dataset";
    case PT_ERR_INVALID_STATISTIC:
        return "invalid statistic";
    case PT_ERR_IO:
        return "i/o error";
    case PT_ERR_RESOURCE_LIMIT:
        return "resource limit exceeded";
    case PT_ERR_OVERSIZE:
        return "dataset too large for brute force";
    case PT_ERR_INTERNAL:
        return "internal error";
    }
    return "unknown status";
}

const char* pt_last_error(void)
{
    return last_error.c_str();
}

const char* pt_method_name(pt_method method)
{
    switch (method) {
    case PT_METHOD_EXACT_DP:
        return "exact-dp";
    case PT_METHOD_EXACT_FFT:
        return "exact-fft";
    case PT_METHOD_MONTE_CARLO:
        return "monte-carlo";
    case PT_METHOD_BRUTE_FORCE:
        return "brute-force";
    }
    return "unknown";
}

void pt_test_options_init(pt_test_options* options)
{
    if (options == nullptr) {
        return;
    }
    options->method = PT_METHOD_EXACT_FFT;
    options->mc_samples = 10000;
    options->seed = 0;
    options->fft_base_case_threshold = 32;
    options->memory_cap = permtest::kDefaultMemoryCap;
    options->parallel = 0;
}

void pt_bench_config_init(pt_bench_config* config)
{
    if (config == nullptr) {
        return;
    }
    const permtest::BenchConfig defaults;
    std::memset(config, 0, sizeof *config);
    config->trials = 1;
    config->acc_mean = defaults.acc_mean;
    config->acc_std = defaults.acc_std;
    config->len_mean = defaults.len_mean;
    config->len_std = defaults.len_std;
    config->correlation = defaults.correlation;
    config->tails = PT_TAILS_TWO;
    config->fft_base_case_threshold = defaults.engine.fft_base_case_threshold;
    config->memory_cap = defaults.engine.memory_cap;
}

pt_status pt_dataset_create(const pt_entry* u, const pt_entry* v, size_t n, pt_dataset** out)
{
    if (out == nullptr || (n > 0 && (u == nullptr || v == nullptr))) {
        return fail(PT_ERR_INVALID_ARGUMENT, "pt_dataset_create: null argument");
    }
    return guarded([&] {
        std::vector<permtest::EntryRecord> us;
        std::vector<permtest::EntryRecord> vs;
        us.reserve(n);
        vs.reserve(n);
        for (size_t i = 0; i < n; ++i) {
            us.push_back(to_record(u[i]));
            vs.push_back(to_record(v[i]));
        }
        *out = new pt_dataset{permtest::make_dataset(std::move(us), std::move(vs))};
    });
}

pt_status pt_dataset_load(const char* u_path, pt_format u_format, const char* v_path, pt_format v_format,
                          pt_dataset** out)
{
    if (u_path == nullptr || v_path == nullptr || out == nullptr) {
        return fail(PT_ERR_INVALID_ARGUMENT, "pt_dataset_load: null argument");
    }
    if (!valid_format(u_format) || !valid_format(v_format)) {
        return fail(PT_ERR_INVALID_ARGUMENT, "pt_dataset_load: unknown format");
    }
    return guarded([&] {
        *out = new pt_dataset{
            permtest::load_paired({to_format(u_format), u_path}, {to_format(v_format), v_path})};
    });
}

pt_status pt_dataset_generate(uint64_t n, const pt_bench_config* config, uint64_t seed, pt_dataset** out)
{
    if (config == nullptr || out == nullptr) {
        return fail(PT_ERR_INVALID_ARGUMENT, "pt_dataset_generate: null argument");
    }
    if (n == 0) {
        return fail(PT_ERR_INVALID_ARGUMENT, "pt_dataset_generate: n must be positive");
    }
    return guarded([&] {
        auto cfg = to_bench_config(*config);
        if (cfg.n_values.empty()) {
            cfg.n_values.push_back(static_cast<std::size_t>(n));
        }
        *out = new pt_dataset{permtest::generate_synthetic(static_cast<std::size_t>(n), cfg, seed)};
    });
}

pt_status pt_dataset_save(const pt_dataset* dataset, pt_format format, pt_record_kind kind, const char* u_path,
                          const char* v_path)
{
    if (dataset == nullptr || u_path == nullptr || v_path == nullptr) {
        return fail(PT_ERR_INVALID_ARGUMENT, "pt_dataset_save: null argument");
    }
    if (!valid_format(format) || (kind != PT_RECORD_ACCURACY && kind != PT_RECORD_F1)) {
        return fail(PT_ERR_INVALID_ARGUMENT, "pt_dataset_save: unknown format or record kind");
    }
    return guarded([&] {
        const auto k = kind == PT_RECORD_F1 ? permtest::RecordKind::f1 : permtest::RecordKind::accuracy;
        permtest::save_entries(u_path, dataset->data.u, to_format(format), k);
        permtest::save_entries(v_path, dataset->data.v, to_format(format), k);
    });
}

size_t pt_dataset_size(const pt_dataset* dataset)
{
    return dataset == nullptr ? 0 : dataset->data.size();
}

pt_status pt_dataset_get_entry(const pt_dataset* dataset, size_t index, pt_entry* u, pt_entry* v)
{
    if (dataset == nullptr) {
        return fail(PT_ERR_INVALID_ARGUMENT, "pt_dataset_get_entry: null dataset");
    }
    if (index >= dataset->data.size()) {
        return fail(PT_ERR_INVALID_ARGUMENT, "pt_dataset_get_entry: index out of range");
    }
    if (u != nullptr) {
        *u = to_entry(dataset->data.u[index]);
    }
    if (v != nullptr) {
        *v = to_entry(dataset->data.v[index]);
    }
    return PT_OK;
}

void pt_dataset_destroy(pt_dataset* dataset)
{
    delete dataset;
}

pt_status pt_statistic_create_builtin(pt_builtin_statistic kind, pt_tails tails, pt_statistic** out)
{
    if (out == nullptr) {
        return fail(PT_ERR_INVALID_ARGUMENT, "pt_statistic_create_builtin: null argument");
    }
    if (!valid_tails(tails) || (kind != PT_STAT_ACC_DIFF && kind != PT_STAT_F1_DIFF)) {
        return fail(PT_ERR_INVALID_ARGUMENT, "pt_statistic_create_builtin: unknown statistic or tails");
    }
    return guarded([&] {
        *out = new pt_statistic{kind == PT_STAT_ACC_DIFF ? permtest::accuracy_diff_statistic(to_tails(tails))
                                                         : permtest::f1_diff_statistic(to_tails(tails))};
    });
}

pt_status pt_statistic_create_custom(size_t m, const int64_t* declared_range, pt_effect_fn effects,
                                     pt_aggregate_fn aggregate, void* user_data, pt_tails tails,
                                     int integer_valued, pt_statistic** out)
{
    if (out == nullptr || declared_range == nullptr || effects == nullptr || aggregate == nullptr) {
        return fail(PT_ERR_INVALID_ARGUMENT, "pt_statistic_create_custom: null argument");
    }
    if (m == 0 || !valid_tails(tails)) {
        return fail(PT_ERR_INVALID_ARGUMENT, "pt_statistic_create_custom: m must be positive and tails valid");
    }
    return guarded([&] {
        auto effect_fn = [effects, user_data, m](const permtest::EntryRecord& u, const permtest::EntryRecord& v) {
            const pt_entry cu = to_entry(u);
            const pt_entry cv = to_entry(v);
            std::vector<std::int64_t> values(m, 0);
            if (effects(&cu, &cv, values.data(), user_data) != 0) {
                throw permtest::InvalidStatisticError("custom effect callback reported an error");
            }
            return permtest::EffectTuple(std::move(values));
        };
        auto aggregate_fn = [aggregate, user_data](std::span<const std::int64_t> sums) {
            return aggregate(sums.data(), sums.size(), user_data);
        };
        *out = new pt_statistic{permtest::DecomposableStatistic(
            "custom", m, effect_fn, aggregate_fn, std::vector<std::int64_t>(declared_range, declared_range + m),
            to_tails(tails), integer_valued != 0)};
    });
}

size_t pt_statistic_dims(const pt_statistic* statistic)
{
    return statistic == nullptr ? 0 : statistic->stat.dims();
}

void pt_statistic_destroy(pt_statistic* statistic)
{
    delete statistic;
}

pt_status pt_run_test(const pt_dataset* dataset, const pt_statistic* statistic, const pt_test_options* options,
                      pt_report* out)
{
    if (dataset == nullptr || statistic == nullptr || out == nullptr) {
        return fail(PT_ERR_INVALID_ARGUMENT, "pt_run_test: null argument");
    }
    pt_test_options opts;
    pt_test_options_init(&opts);
    if (options != nullptr) {
        opts = *options;
    }
    return guarded([&] {
        permtest::TestReport r;
        switch (opts.method) {
        case PT_METHOD_EXACT_DP:
        case PT_METHOD_EXACT_FFT: {
            permtest::ConvolutionEngine engine;
            engine.kind = opts.method == PT_METHOD_EXACT_DP ? permtest::EngineKind::dp : permtest::EngineKind::fft;
            engine.fft_base_case_threshold = opts.fft_base_case_threshold;
            engine.memory_cap = opts.memory_cap;
            engine.parallel = opts.parallel != 0;
            r = permtest::exact_perm_test(dataset->data, statistic->stat, engine);
            break;
        }
        case PT_METHOD_MONTE_CARLO:
            r = permtest::monte_carlo(dataset->data, statistic->stat, opts.mc_samples, opts.seed);
            break;
        case PT_METHOD_BRUTE_FORCE:
            r = permtest::brute_force(dataset->data, statistic->stat);
            break;
        default:
            throw permtest::InvalidInputError("unknown test method");
        }
        out->p_value = r.p_value;
        out->observed_effect = r.observed_effect;
        out->method = opts.method;
        out->n_entries = r.n_entries;
        out->has_mc_samples = r.mc_samples.has_value() ? 1 : 0;
        out->mc_samples = r.mc_samples.value_or(0);
        out->seed = r.rng_seed.value_or(0);
        out->elapsed_ms = r.elapsed_ms();
    });
}

pt_status pt_report_to_json(const pt_report* report, char* buffer, size_t buffer_size, size_t* required)
{
    if (report == nullptr || (buffer == nullptr && buffer_size > 0)) {
        return fail(PT_ERR_INVALID_ARGUMENT, "pt_report_to_json: null argument");
    }
    return guarded([&] {
        nlohmann::ordered_json j;
        j["p_value"] = report->p_value;
        j["observed_effect"] = report->observed_effect;
        j["method"] = pt_method_name(report->method);
        j["n"] = report->n_entries;
        if (report->has_mc_samples != 0) {
            j["mc_samples"] = report->mc_samples;
            j["seed"] = report->seed;
        } else {
            j["mc_samples"] = nullptr;
            j["seed"] = nullptr;
        }
        j["elapsed_ms"] = report->elapsed_ms;
        const std::string text = j.dump();
        if (required != nullptr) {
            *required = text.size();
        }
        if (buffer_size > 0) {
            const size_t n = std::min(text.size(), buffer_size - 1);
            std::memcpy(buffer, text.data(), n);
            buffer[n] = '\0';
        }
    });
}

pt_status pt_bench_run(const pt_bench_config* config, const char* csv_path)
{
    if (config == nullptr || (config->n_values_count > 0 && config->n_values == nullptr) ||
        (config->mc_sample_counts_count > 0 && config->mc_sample_counts == nullptr)) {
        return fail(PT_ERR_INVALID_ARGUMENT, "pt_bench_run: null argument");
    }
    if (!valid_tails(config->tails)) {
        return fail(PT_ERR_INVALID_ARGUMENT, "pt_bench_run: unknown tails");
    }
    return guarded([&] {
        const auto cfg = to_bench_config(*config);
        permtest::validate(cfg);
        std::ofstream file;
        std::ostream* out = &std::cout;
        if (csv_path != nullptr && std::strcmp(csv_path, "-") != 0) {
            file.open(csv_path, std::ios::binary);
            if (!file) {
                throw permtest::IoError(std::string("cannot open ") + csv_path + " for writing");
            }
            out = &file;
        }
        *out << permtest::kBenchCsvHeader << '\n' << std::flush;
        permtest::run_benchmark(cfg, [&](const permtest::BenchRow& row) {
            *out << permtest::to_csv_line(row) << '\n' << std::flush;
            if (!row.error.empty()) {
                std::cerr << "bench: " << row.method << " n=" << row.n << " failed: " << row.error << '\n';
            }
        });
        if (!*out) {
            throw permtest::IoError("failed writing benchmark CSV");
        }
    });
}

} // extern "C"
