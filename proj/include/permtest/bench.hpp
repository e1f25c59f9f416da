#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "permtest/convolution.hpp"
#include "permtest/statistics.hpp"

namespace permtest {

/// Runtime sweep over dataset sizes. The accuracy and sentence-length
/// defaults are POS-tagging statistics measured on English UD.
struct BenchConfig {
    std::vector<std::size_t> n_values{1000, 2000, 3000, 4000, 5000, 6000, 7000, 8000, 9000, 10000};
    std::vector<std::uint64_t> mc_sample_counts{5000, 10000, 20000, 40000};
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    double acc_mean = 0.9543;
    double acc_std = 0.1116;
    double len_mean = 12.08;
    double len_std = 10.60;
    /// Correlation between the two systems' per-entry accuracy draws.
    double correlation = 0.0;
    Tails tails = Tails::two;
    /// Used for exact-fft; exact-dp uses the same memory cap.
    ConvolutionEngine engine{};
};

void validate(const BenchConfig& config);

/// n entries, lengths ~ round(Normal(len_mean, len_std)) clamped to >= 1,
/// per-system accuracy ~ Normal(acc_mean, acc_std) clamped to [0, 1],
/// correct = round(accuracy * length). Deterministic in `seed`.
PairedDataset generate_synthetic(std::size_t n, const BenchConfig& config, std::uint64_t seed);

struct BenchRow {
    std::string method;
    std::size_t n = 0;
    std::optional<std::uint64_t> k;
    std::size_t trial = 0;
    std::optional<double> elapsed_ms;
    std::optional<double> p_value;
    /// Set when the cell failed (e.g. resource limit); the sweep continues.
    std::string error;
};

/// Times exact-dp, exact-fft and monte-carlo at every K for each n on one
/// generated dataset per n. Timing covers local effects through p-value.
std::vector<BenchRow> run_benchmark(const BenchConfig& config,
                                    const std::function<void(const BenchRow&)>& on_row = {});

inline constexpr const char* kBenchCsvHeader = "method,n,k,trial,elapsed_ms,p_value";

/// Failed cells leave elapsed_ms and p_value empty.
std::string to_csv_line(const BenchRow& row);
void write_benchmark_csv(std::ostream& out, std::span<const BenchRow> rows);

} // namespace permtest
