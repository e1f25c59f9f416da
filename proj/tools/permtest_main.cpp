// permtest: command-line front end over the C API.
//
//   permtest test U V [--stat acc-diff|f1-diff] [--tails one|two]
//                     [--method exact-dp|exact-fft|mc|brute] [--mc-samples K]
//                     [--seed S] [--format entry-tsv|token-tsv|json]
//   permtest bench [--n 1000,2000,...] [--mc-samples 5000,...] [--trials T] [--out PATH]
//   permtest gen --n N [--seed S] [--format ...] --out PREFIX
//
// Exit codes: 0 success, 2 validation error, 3 resource limit, 1 anything else.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "permtest/permtest.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitValidation = 2;
constexpr int kExitResource = 3;

int exit_code_for(pt_status status)
{
    switch (status) {
    case PT_OK:
        return kExitOk;
    case PT_ERR_RESOURCE_LIMIT:
    case PT_ERR_OVERSIZE:
        return kExitResource;
    case PT_ERR_INTERNAL:
        return kExitOther;
    default:
        return kExitValidation;
    }
}

int report_failure(const char* what, pt_status status)
{
    std::cerr << "permtest: " << what << ": " << pt_status_string(status);
    const std::string detail = pt_last_error();
    if (!detail.empty()) {
        std::cerr << ": " << detail;
    }
    std::cerr << '\n';
    return exit_code_for(status);
}

/// RAII owners for C handles.
struct DatasetHandle {
    pt_dataset* ptr = nullptr;
    ~DatasetHandle() { pt_dataset_destroy(ptr); }
};

struct StatisticHandle {
    pt_statistic* ptr = nullptr;
    ~StatisticHandle() { pt_statistic_destroy(ptr); }
};

const std::map<std::string, pt_format> kFormats{
    {"entry-tsv", PT_FORMAT_ENTRY_TSV}, {"token-tsv", PT_FORMAT_TOKEN_TSV}, {"json", PT_FORMAT_JSON}};
const std::map<std::string, pt_builtin_statistic> kStats{{"acc-diff", PT_STAT_ACC_DIFF}, {"f1-diff", PT_STAT_F1_DIFF}};
const std::map<std::string, pt_tails> kTails{{"one", PT_TAILS_ONE}, {"two", PT_TAILS_TWO}};
const std::map<std::string, pt_method> kMethods{{"exact-dp", PT_METHOD_EXACT_DP},
                                                {"exact-fft", PT_METHOD_EXACT_FFT},
                                                {"mc", PT_METHOD_MONTE_CARLO},
                                                {"brute", PT_METHOD_BRUTE_FORCE}};

const char* file_extension(pt_format f)
{
    switch (f) {
    case PT_FORMAT_JSON:
        return ".json";
    default:
        return ".tsv";
    }
}

struct TestArgs {
    std::string u_path;
    std::string v_path;
    std::string stat = "acc-diff";
    std::string tails = "two";
    std::string method = "exact-fft";
    std::string format = "entry-tsv";
    std::uint64_t mc_samples = 10000;
    std::uint64_t seed = 0;
    std::uint64_t fft_threshold = 32;
    std::uint64_t memory_cap = std::uint64_t{1} << 31;
    bool parallel = false;
};

struct BenchArgs {
    std::vector<std::uint64_t> n_values{1000, 2000, 3000, 4000, 5000, 6000, 7000, 8000, 9000, 10000};
    std::vector<std::uint64_t> mc_samples{5000, 10000, 20000, 40000};
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    double correlation = 0.0;
    std::string tails = "two";
    std::string out = "-";
};

struct GenArgs {
    std::uint64_t n = 1000;
    std::uint64_t seed = 0;
    double correlation = 0.0;
    std::string format = "entry-tsv";
    std::string out;
};

int run_test(const TestArgs& a)
{
    const pt_format format = kFormats.at(a.format);
    DatasetHandle ds;
    if (auto st = pt_dataset_load(a.u_path.c_str(), format, a.v_path.c_str(), format, &ds.ptr); st != PT_OK) {
        return report_failure("loading dataset", st);
    }
    StatisticHandle stat;
    if (auto st = pt_statistic_create_builtin(kStats.at(a.stat), kTails.at(a.tails), &stat.ptr); st != PT_OK) {
        return report_failure("creating statistic", st);
    }
    pt_test_options opts;
    pt_test_options_init(&opts);
    opts.method = kMethods.at(a.method);
    opts.mc_samples = a.mc_samples;
    opts.seed = a.seed;
    opts.fft_base_case_threshold = a.fft_threshold;
    opts.memory_cap = a.memory_cap;
    opts.parallel = a.parallel ? 1 : 0;

    pt_report report;
    if (auto st = pt_run_test(ds.ptr, stat.ptr, &opts, &report); st != PT_OK) {
        return report_failure("running test", st);
    }
    size_t needed = 0;
    pt_report_to_json(&report, nullptr, 0, &needed);
    std::string json(needed + 1, '\0');
    if (auto st = pt_report_to_json(&report, json.data(), json.size(), nullptr); st != PT_OK) {
        return report_failure("formatting report", st);
    }
    json.resize(needed);
    std::cout << json << '\n';

    std::fprintf(stderr, "%s test (%s, %s-tailed) on N = %llu entries\n", pt_method_name(report.method),
                 a.stat.c_str(), a.tails.c_str(), static_cast<unsigned long long>(report.n_entries));
    std::fprintf(stderr, "  observed effect: %.10g\n  p-value:         %.10g\n  elapsed:         %.3f ms\n",
                 report.observed_effect, report.p_value, report.elapsed_ms);
    if (report.has_mc_samples != 0) {
        std::fprintf(stderr, "  samples:         %llu (seed %llu)\n",
                     static_cast<unsigned long long>(report.mc_samples), static_cast<unsigned long long>(report.seed));
    }
    return kExitOk;
}

int run_bench(const BenchArgs& a)
{
    pt_bench_config cfg;
    pt_bench_config_init(&cfg);
    cfg.n_values = a.n_values.data();
    cfg.n_values_count = a.n_values.size();
    cfg.mc_sample_counts = a.mc_samples.data();
    cfg.mc_sample_counts_count = a.mc_samples.size();
    cfg.trials = a.trials;
    cfg.seed = a.seed;
    cfg.correlation = a.correlation;
    cfg.tails = kTails.at(a.tails);
    if (auto st = pt_bench_run(&cfg, a.out.c_str()); st != PT_OK) {
        return report_failure("benchmark", st);
    }
    return kExitOk;
}

int run_gen(const GenArgs& a)
{
    pt_bench_config cfg;
    pt_bench_config_init(&cfg);
    cfg.correlation = a.correlation;
    DatasetHandle ds;
    if (auto st = pt_dataset_generate(a.n, &cfg, a.seed, &ds.ptr); st != PT_OK) {
        return report_failure("generating dataset", st);
    }
    const pt_format format = kFormats.at(a.format);
    const std::string u_path = a.out + ".u" + file_extension(format);
    const std::string v_path = a.out + ".v" + file_extension(format);
    if (auto st = pt_dataset_save(ds.ptr, format, PT_RECORD_ACCURACY, u_path.c_str(), v_path.c_str()); st != PT_OK) {
        return report_failure("writing dataset", st);
    }
    std::cerr << "wrote " << u_path << " and " << v_path << '\n';
    return kExitOk;
}

template <typename Map>
auto choices(const Map& m)
{
    std::vector<std::string> keys;
    for (const auto& [k, _] : m) {
        keys.push_back(k);
    }
    return CLI::IsMember(keys);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact and Monte Carlo paired-permutation significance tests"};
    app.require_subcommand(1);

    TestArgs test_args;
    auto* test = app.add_subcommand("test", "Run a significance test on two systems' outputs");
    test->add_option("u", test_args.u_path, "Outputs of system U")->required();
    test->add_option("v", test_args.v_path, "Outputs of system V")->required();
    test->add_option("--stat", test_args.stat, "Test statistic")->check(choices(kStats))->capture_default_str();
    test->add_option("--tails", test_args.tails, "One- or two-tailed test")->check(choices(kTails))->capture_default_str();
    test->add_option("--method", test_args.method, "Test procedure")->check(choices(kMethods))->capture_default_str();
    test->add_option("--mc-samples", test_args.mc_samples, "Monte Carlo sample count K")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    test->add_option("--seed", test_args.seed, "Monte Carlo seed")->capture_default_str();
    test->add_option("--format", test_args.format, "Input file format")->check(choices(kFormats))->capture_default_str();
    test->add_option("--fft-threshold", test_args.fft_threshold, "Pmfs per DP leaf in the FFT recursion")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    test->add_option("--memory-cap", test_args.memory_cap, "Cell budget for dense pmfs")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    test->add_flag("--parallel", test_args.parallel, "Convolve FFT halves concurrently");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Runtime sweep over synthetic datasets (CSV output)");
    bench->add_option("--n", bench_args.n_values, "Dataset sizes")->delimiter(',')->capture_default_str();
    bench->add_option("--mc-samples", bench_args.mc_samples, "Monte Carlo sample counts")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--trials", bench_args.trials, "Repetitions per cell")->check(CLI::PositiveNumber)->capture_default_str();
    bench->add_option("--seed", bench_args.seed, "Generator and sampler seed")->capture_default_str();
    bench->add_option("--correlation", bench_args.correlation, "Per-entry accuracy correlation between systems")
        ->check(CLI::Range(-1.0, 1.0))
        ->capture_default_str();
    bench->add_option("--tails", bench_args.tails, "One- or two-tailed test")->check(choices(kTails))->capture_default_str();
    bench->add_option("--out", bench_args.out, "CSV path, - for stdout")->capture_default_str();

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "Write a synthetic pair of system outputs");
    gen->add_option("--n", gen_args.n, "Number of entries")->check(CLI::PositiveNumber)->capture_default_str();
    gen->add_option("--seed", gen_args.seed, "Generator seed")->capture_default_str();
    gen->add_option("--correlation", gen_args.correlation, "Per-entry accuracy correlation between systems")
        ->check(CLI::Range(-1.0, 1.0))
        ->capture_default_str();
    gen->add_option("--format", gen_args.format, "Output format")->check(choices(kFormats))->capture_default_str();
    gen->add_option("--out", gen_args.out, "Output prefix; writes PREFIX.u.* and PREFIX.v.*")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    if (test->parsed()) {
        return run_test(test_args);
    }
    if (bench->parsed()) {
        return run_bench(bench_args);
    }
    if (gen->parsed()) {
        return run_gen(gen_args);
    }
    return kExitOther;
}
