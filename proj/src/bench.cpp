#include "permtest/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "permtest/errors.hpp"
#include "permtest/test_runner.hpp"

namespace permtest {

namespace {

std::uint64_t dataset_seed(std::uint64_t seed, std::size_t n)
{
    return seed ^ (static_cast<std::uint64_t>(n) * 0x9E3779B97F4A7C15ULL);
}

std::uint64_t mc_seed(std::uint64_t seed, std::size_t trial, std::uint64_t k)
{
    return seed + 0x100000001B3ULL * (trial + 1) + k;
}

template <typename Run>
BenchRow timed_cell(std::string method, std::size_t n, std::optional<std::uint64_t> k, std::size_t trial, Run&& run)
{
    BenchRow row{std::move(method), n, k, trial, std::nullopt, std::nullopt, {}};
    try {
        const TestReport r = run();
        row.elapsed_ms = r.elapsed_ms();
        row.p_value = r.p_value;
    } catch (const Error& e) {
        row.error = e.what();
    } catch (const std::bad_alloc&) {
        row.error = "out of memory";
    }
    return row;
}

} // namespace

void validate(const BenchConfig& config)
{
    if (config.n_values.empty()) {
        throw InvalidInputError("bench config needs at least one dataset size");
    }
    for (auto n : config.n_values) {
        if (n == 0) {
            throw InvalidInputError("bench dataset sizes must be positive");
        }
    }
    for (auto k : config.mc_sample_counts) {
        if (k == 0) {
            throw InvalidInputError("bench Monte Carlo sample counts must be positive");
        }
    }
    if (config.trials < 1) {
        throw InvalidInputError("bench trials must be >= 1");
    }
    if (!(config.acc_std >= 0.0) || !(config.len_std >= 0.0)) {
        throw InvalidInputError("bench standard deviations must be non-negative");
    }
    if (!(config.correlation >= -1.0 && config.correlation <= 1.0)) {
        throw InvalidInputError("bench correlation must lie in [-1, 1]");
    }
    validate(config.engine);
}

PairedDataset generate_synthetic(std::size_t n, const BenchConfig& config, std::uint64_t seed)
{
    validate(config);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    const double rho = config.correlation;
    const double rho_c = std::sqrt(1.0 - rho * rho);

    PairedDataset ds;
    ds.u.reserve(n);
    ds.v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double raw_len = config.len_mean + config.len_std * unit(rng);
        const std::int64_t length = std::max<std::int64_t>(1, std::llround(raw_len));
        const double zu = unit(rng);
        const double zv = rho * zu + rho_c * unit(rng);
        auto correct = [&](double z) {
            const double acc = std::clamp(config.acc_mean + config.acc_std * z, 0.0, 1.0);
            return std::llround(acc * static_cast<double>(length));
        };
        ds.u.push_back({correct(zu), length, 0, 0});
        ds.v.push_back({correct(zv), length, 0, 0});
    }
    return ds;
}

std::vector<BenchRow> run_benchmark(const BenchConfig& config, const std::function<void(const BenchRow&)>& on_row)
{
    validate(config);
    const auto stat = accuracy_diff_statistic(config.tails);
    ConvolutionEngine dp = config.engine;
    dp.kind = EngineKind::dp;
    ConvolutionEngine fft = config.engine;
    fft.kind = EngineKind::fft;

    std::vector<BenchRow> rows;
    auto emit = [&](BenchRow row) {
        if (on_row) {
            on_row(row);
        }
        rows.push_back(std::move(row));
    };

    for (const std::size_t n : config.n_values) {
        const PairedDataset ds = generate_synthetic(n, config, dataset_seed(config.seed, n));
        for (std::size_t trial = 0; trial < config.trials; ++trial) {
            emit(timed_cell("exact-dp", n, std::nullopt, trial, [&] { return exact_perm_test(ds, stat, dp); }));
            emit(timed_cell("exact-fft", n, std::nullopt, trial, [&] { return exact_perm_test(ds, stat, fft); }));
            for (const auto k : config.mc_sample_counts) {
                emit(timed_cell("monte-carlo", n, k, trial,
                                [&] { return monte_carlo(ds, stat, k, mc_seed(config.seed, trial, k)); }));
            }
        }
    }
    return rows;
}

std::string to_csv_line(const BenchRow& row)
{
    std::string line = row.method + ',' + std::to_string(row.n) + ',';
    if (row.k) {
        line += std::to_string(*row.k);
    }
    line += ',' + std::to_string(row.trial) + ',';
    char buf[64];
    if (row.elapsed_ms) {
        std::snprintf(buf, sizeof buf, "%.6f", *row.elapsed_ms);
        line += buf;
    }
    line += ',';
    if (row.p_value) {
        std::snprintf(buf, sizeof buf, "%.17g", *row.p_value);
        line += buf;
    }
    return line;
}

void write_benchmark_csv(std::ostream& out, std::span<const BenchRow> rows)
{
    out << kBenchCsvHeader << '\n';
    for (const auto& row : rows) {
        out << to_csv_line(row) << '\n';
    }
}

} // namespace permtest
