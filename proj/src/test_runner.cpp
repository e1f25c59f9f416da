#include "permtest/test_runner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <vector>

#include "permtest/errors.hpp"

namespace permtest {

namespace {

std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Counter-based stream: word j of substream k is a pure function of
// (seed, k, j), so samples can be drawn in any order.
class SubstreamRng {
public:
    SubstreamRng(std::uint64_t seed, std::uint64_t k) : key_(mix64(seed ^ mix64(k + kGolden))) {}

    std::uint64_t operator()() { return mix64(key_ + kGolden * ++counter_); }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

using Clock = std::chrono::steady_clock;

/// backward - forward for each two-point entry, flattened n-major.
std::vector<std::int64_t> swap_deltas(std::span<const LocalEffectPair> effects, std::size_t m, bool skip_constant)
{
    std::vector<std::int64_t> deltas;
    deltas.reserve(effects.size() * m);
    for (const auto& e : effects) {
        if (e.forward.dims() != m || e.backward.dims() != m) {
            throw InvalidInputError("local effects have mixed dimensionality");
        }
        if (skip_constant && e.forward == e.backward) {
            continue;
        }
        for (std::size_t i = 0; i < m; ++i) {
            deltas.push_back(e.backward[i] - e.forward[i]);
        }
    }
    return deltas;
}

double finish_exact(double p, std::size_t n)
{
    // The all-stay assignment always qualifies, so p >= 2^-N.
    return std::clamp(p, std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(n, 2000))), 1.0);
}

} // namespace

std::string_view method_name(Method m)
{
    switch (m) {
    case Method::exact_dp:
        return "exact-dp";
    case Method::exact_fft:
        return "exact-fft";
    case Method::monte_carlo:
        return "monte-carlo";
    case Method::brute_force:
        return "brute-force";
    }
    return "unknown";
}

bool meets_threshold(double value, double observed, bool integer_valued)
{
    if (integer_valued) {
        return value >= observed;
    }
    return value >= observed - kThresholdRelTolerance * std::max(1.0, std::fabs(observed));
}

double tail_mass(const DecomposableStatistic& stat, const DensePMF& pmf, double observed)
{
    const std::size_t m = pmf.dims();
    if (m != stat.dims()) {
        throw InvalidInputError("pmf dimensionality does not match the statistic");
    }
    const auto probs = pmf.probs();
    const auto& extents = pmf.extents();
    std::vector<std::int64_t> coords = pmf.offset();
    double p = 0.0;
    for (std::size_t cell = 0; cell < probs.size(); ++cell) {
        if (probs[cell] != 0.0 && meets_threshold(stat.aggregate(coords), observed, stat.integer_valued())) {
            p += probs[cell];
        }
        for (std::size_t i = m; i-- > 0;) {
            if (++coords[i] < pmf.offset()[i] + static_cast<std::int64_t>(extents[i])) {
                break;
            }
            coords[i] = pmf.offset()[i];
        }
    }
    return p;
}

double exact_p_value(const DecomposableStatistic& stat, std::span<const LocalEffectPair> effects,
                     const ConvolutionEngine& engine, ConvolutionDiagnostics* diagnostics)
{
    const double observed = observed_effect(stat, effects);
    const auto pmfs = make_local_pmfs(effects);
    const DensePMF pmf = convolve(pmfs, engine, diagnostics);
    return finish_exact(tail_mass(stat, pmf, observed), effects.size());
}

double monte_carlo_p_value(const DecomposableStatistic& stat, std::span<const LocalEffectPair> effects,
                           std::uint64_t samples, std::uint64_t seed)
{
    if (samples == 0) {
        throw InvalidInputError("monte carlo needs at least one sample");
    }
    const auto base = forward_sums(effects);
    const std::size_t m = base.size();
    const double observed = stat.aggregate(base);
    const auto deltas = swap_deltas(effects, m, true);
    const std::size_t random_entries = deltas.size() / m;
    const bool exact_cmp = stat.integer_valued();

    std::uint64_t hits = 0;
    std::vector<std::int64_t> sums(m);
    for (std::uint64_t k = 0; k < samples; ++k) {
        SubstreamRng gen(seed, k);

        std::uint64_t word = 0;
        int bits_left = 0;
        if (m == 1) {
            std::int64_t s = base[0];
            for (std::size_t j = 0; j < random_entries; ++j) {
                if (bits_left == 0) {
                    word = gen();
                    bits_left = 64;
                }
                s += static_cast<std::int64_t>(word & 1U) * deltas[j];
                word >>= 1;
                --bits_left;
            }
            sums[0] = s;
        } else {
            std::copy(base.begin(), base.end(), sums.begin());
            for (std::size_t j = 0; j < random_entries; ++j) {
                if (bits_left == 0) {
                    word = gen();
                    bits_left = 64;
                }
                if ((word & 1U) != 0) {
                    for (std::size_t i = 0; i < m; ++i) {
                        sums[i] += deltas[j * m + i];
                    }
                }
                word >>= 1;
                --bits_left;
            }
        }
        if (meets_threshold(stat.aggregate(sums), observed, exact_cmp)) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(samples);
}

double brute_force_p_value(const DecomposableStatistic& stat, std::span<const LocalEffectPair> effects)
{
    const std::size_t n = effects.size();
    if (n > kBruteForceMaxEntries) {
        throw OversizeError("brute force enumeration refused: N = " + std::to_string(n) + " exceeds " +
                            std::to_string(kBruteForceMaxEntries));
    }
    auto sums = forward_sums(effects);
    const std::size_t m = sums.size();
    const double observed = stat.aggregate(sums);
    const auto deltas = swap_deltas(effects, m, false);
    const bool exact_cmp = stat.integer_valued();

    // Gray-code walk: each step flips one entry between stay and swap.
    std::vector<bool> swapped(n, false);
    const std::uint64_t total = std::uint64_t{1} << n;
    std::uint64_t hits = meets_threshold(observed, observed, exact_cmp) ? 1 : 0;
    for (std::uint64_t step = 1; step < total; ++step) {
        const auto j = static_cast<std::size_t>(std::countr_zero(step));
        const std::int64_t sign = swapped[j] ? -1 : 1;
        swapped[j] = !swapped[j];
        for (std::size_t i = 0; i < m; ++i) {
            sums[i] += sign * deltas[j * m + i];
        }
        if (meets_threshold(stat.aggregate(sums), observed, exact_cmp)) {
            ++hits;
        }
    }
    return std::ldexp(static_cast<double>(hits), -static_cast<int>(n));
}

TestReport exact_perm_test(const PairedDataset& dataset, const DecomposableStatistic& stat,
                           const ConvolutionEngine& engine, ConvolutionDiagnostics* diagnostics)
{
    validate(engine);
    const auto start = Clock::now();
    const auto effects = local_effects(stat, dataset);
    TestReport r;
    r.observed_effect = observed_effect(stat, effects);
    r.p_value = exact_p_value(stat, effects, engine, diagnostics);
    r.elapsed = Clock::now() - start;
    r.method = engine.kind == EngineKind::dp ? Method::exact_dp : Method::exact_fft;
    r.n_entries = dataset.size();
    return r;
}

TestReport monte_carlo(const PairedDataset& dataset, const DecomposableStatistic& stat, std::uint64_t samples,
                       std::uint64_t seed)
{
    if (samples == 0) {
        throw InvalidInputError("monte carlo needs at least one sample");
    }
    const auto start = Clock::now();
    const auto effects = local_effects(stat, dataset);
    TestReport r;
    r.observed_effect = observed_effect(stat, effects);
    r.p_value = monte_carlo_p_value(stat, effects, samples, seed);
    r.elapsed = Clock::now() - start;
    r.method = Method::monte_carlo;
    r.n_entries = dataset.size();
    r.mc_samples = samples;
    r.rng_seed = seed;
    return r;
}

TestReport brute_force(const PairedDataset& dataset, const DecomposableStatistic& stat)
{
    if (dataset.size() > kBruteForceMaxEntries) {
        throw OversizeError("brute force enumeration refused: N = " + std::to_string(dataset.size()) +
                            " exceeds " + std::to_string(kBruteForceMaxEntries));
    }
    const auto start = Clock::now();
    const auto effects = local_effects(stat, dataset);
    TestReport r;
    r.observed_effect = observed_effect(stat, effects);
    r.p_value = brute_force_p_value(stat, effects);
    r.elapsed = Clock::now() - start;
    r.method = Method::brute_force;
    r.n_entries = dataset.size();
    return r;
}

} // namespace permtest
