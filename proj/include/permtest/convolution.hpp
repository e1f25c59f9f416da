#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "permtest/pmf.hpp"

namespace permtest {

enum class EngineKind { dp, fft };

struct ConvolutionEngine {
    EngineKind kind = EngineKind::fft;
    /// Leaves of the FFT recursion holding at most this many pmfs are
    /// convolved with the DP engine. Must be >= 1.
    std::size_t fft_base_case_threshold = 32;
    std::uint64_t memory_cap = kDefaultMemoryCap;
    /// Evaluate the two halves of each FFT split on separate threads. Output
    /// is identical to the sequential mode.
    bool parallel = false;
};

/// Throws InvalidInputError on a zero threshold or memory cap.
void validate(const ConvolutionEngine& engine);

/// Round-off bookkeeping from FFT merges.
struct ConvolutionDiagnostics {
    /// Smallest cell value seen after an inverse transform, before clamping.
    double min_before_clamp = 0.0;
    std::size_t fft_merges = 0;

    void merge(const ConvolutionDiagnostics& other);
};

/// Values in [-kClampTolerance, 0) after an inverse FFT are round-off and get
/// clamped to zero; anything lower is an InternalError.
inline constexpr double kClampTolerance = 1e-9;

/// Sequential two-point convolution: f_1 * ... * f_N. Keeps two working
/// arrays; each step costs O(current support).
DensePMF convolve_dp(std::span<const LocalPMF> pmfs, std::uint64_t memory_cap = kDefaultMemoryCap);

/// Balanced divide and conquer: split at N/2, convolve each half
/// recursively, merge with fft_pairwise_convolve.
DensePMF convolve_fft(std::span<const LocalPMF> pmfs, const ConvolutionEngine& engine,
                      ConvolutionDiagnostics* diagnostics = nullptr);

/// Dispatch on engine.kind.
DensePMF convolve(std::span<const LocalPMF> pmfs, const ConvolutionEngine& engine,
                  ConvolutionDiagnostics* diagnostics = nullptr);

/// m-dimensional linear convolution of two dense pmfs via real FFTs, each
/// axis zero-padded to a power of two.
DensePMF fft_pairwise_convolve(const DensePMF& a, const DensePMF& b, std::uint64_t memory_cap = kDefaultMemoryCap,
                               ConvolutionDiagnostics* diagnostics = nullptr);

} // namespace permtest
