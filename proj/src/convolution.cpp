#include "permtest/convolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <complex>
#include <future>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "permtest/errors.hpp"

namespace permtest {

namespace {

// FFTW's planner is not reentrant; execution on distinct arrays is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> fftw_alloc(std::size_t count)
{
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(count, 1)));
    if (p == nullptr) {
        throw ResourceLimitError("fftw_malloc failed for " + std::to_string(count) + " elements");
    }
    return FftwBuffer<T>(p);
}

class Plan {
public:
    explicit Plan(fftw_plan p) : plan_(p)
    {
        if (plan_ == nullptr) {
            throw InternalError("FFTW failed to create a plan");
        }
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    ~Plan()
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    fftw_plan get() const noexcept { return plan_; }

private:
    fftw_plan plan_;
};

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
};

// Plans up to this many real cells are kept for the life of the process;
// larger ones are built per call so their twiddle tables are released.
constexpr std::size_t kPlanCacheMaxCells = std::size_t{1} << 20;

class PlanCache {
public:
    PlanCache() = default;
    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;
    ~PlanCache()
    {
        for (auto& [shape, p] : plans_) {
            fftw_destroy_plan(p.forward);
            fftw_destroy_plan(p.inverse);
        }
    }

    // Caller holds the planner lock.
    PlanPair& slot(const std::vector<int>& shape) { return plans_[shape]; }

private:
    std::map<std::vector<int>, PlanPair> plans_;
};

PlanCache& plan_cache()
{
    static PlanCache cache;
    return cache;
}

/// One-point pmfs only translate the result; pull them out up front.
struct FoldedPmfs {
    std::vector<const LocalPMF*> two_point;
    std::vector<std::int64_t> shift;
};

FoldedPmfs fold_one_point(std::span<const LocalPMF> pmfs)
{
    if (pmfs.empty()) {
        throw InvalidInputError("convolution needs at least one pmf");
    }
    const std::size_t m = pmfs.front().dims();
    FoldedPmfs out;
    out.shift.assign(m, 0);
    out.two_point.reserve(pmfs.size());
    for (const auto& f : pmfs) {
        if (f.dims() != m) {
            throw InvalidInputError("pmfs have mixed dimensionality");
        }
        if (f.two_point()) {
            out.two_point.push_back(&f);
        } else {
            for (std::size_t i = 0; i < m; ++i) {
                out.shift[i] += f.pair().forward[i];
            }
        }
    }
    return out;
}

std::vector<std::size_t> row_major_strides(std::span<const std::size_t> extents)
{
    std::vector<std::size_t> strides(extents.size(), 1);
    for (std::size_t i = extents.size(); i-- > 1;) {
        strides[i - 1] = strides[i] * extents[i];
    }
    return strides;
}

void step_1d(std::span<const double> cur, std::span<double> next, std::size_t gap)
{
    // next[j] = (cur[j] + cur[j - gap]) / 2 with out-of-range terms as zero.
    const std::size_t width = cur.size();
    const std::size_t total = width + gap;
    const std::size_t head = std::min(gap, width);
    for (std::size_t j = 0; j < head; ++j) {
        next[j] = 0.5 * cur[j];
    }
    for (std::size_t j = head; j < width; ++j) {
        next[j] = 0.5 * (cur[j] + cur[j - gap]);
    }
    for (std::size_t j = width; j < gap; ++j) {
        next[j] = 0.0;
    }
    for (std::size_t j = std::max(width, gap); j < total; ++j) {
        next[j] = 0.5 * cur[j - gap];
    }
}

void step_nd(std::span<const double> cur, std::span<const std::size_t> extents, std::span<double> next,
             std::span<const std::size_t> next_extents, std::span<const std::size_t> delta_a,
             std::span<const std::size_t> delta_b)
{
    const std::size_t m = extents.size();
    const auto nstride = row_major_strides(next_extents);
    std::size_t next_cells = 1;
    for (auto e : next_extents) {
        next_cells *= e;
    }
    std::fill(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(next_cells), 0.0);

    std::size_t shift_a = 0;
    std::size_t shift_b = 0;
    for (std::size_t i = 0; i < m; ++i) {
        shift_a += delta_a[i] * nstride[i];
        shift_b += delta_b[i] * nstride[i];
    }

    const std::size_t row = extents[m - 1];
    std::vector<std::size_t> idx(m, 0);
    std::size_t src = 0;
    const std::size_t cells = cur.size();
    while (src < cells) {
        std::size_t base = 0;
        for (std::size_t i = 0; i + 1 < m; ++i) {
            base += idx[i] * nstride[i];
        }
        for (std::size_t j = 0; j < row; ++j) {
            const double half = 0.5 * cur[src + j];
            next[base + j + shift_a] += half;
            next[base + j + shift_b] += half;
        }
        src += row;
        for (std::size_t i = m - 1; i-- > 0;) {
            if (++idx[i] < extents[i]) {
                break;
            }
            idx[i] = 0;
        }
    }
}

DensePMF dp_core(std::span<const LocalPMF* const> pmfs, std::span<const std::int64_t> shift, std::uint64_t memory_cap)
{
    const std::size_t m = shift.size();
    std::vector<std::size_t> final_extents(m, 1);
    for (const auto* f : pmfs) {
        for (std::size_t i = 0; i < m; ++i) {
            const auto a = f->pair().forward[i];
            const auto b = f->pair().backward[i];
            final_extents[i] += static_cast<std::size_t>(std::max(a, b) - std::min(a, b));
        }
    }
    const auto capacity = static_cast<std::size_t>(checked_cell_count(final_extents, memory_cap));

    std::vector<double> cur(capacity, 0.0);
    std::vector<double> next(capacity, 0.0);
    cur[0] = 1.0;
    std::vector<std::int64_t> offset(shift.begin(), shift.end());
    std::vector<std::size_t> extents(m, 1);
    std::size_t cells = 1;

    std::vector<std::size_t> next_extents(m);
    std::vector<std::size_t> delta_a(m);
    std::vector<std::size_t> delta_b(m);
    for (const auto* f : pmfs) {
        const auto& a = f->pair().forward;
        const auto& b = f->pair().backward;
        std::size_t next_cells = 1;
        for (std::size_t i = 0; i < m; ++i) {
            const auto lo = std::min(a[i], b[i]);
            delta_a[i] = static_cast<std::size_t>(a[i] - lo);
            delta_b[i] = static_cast<std::size_t>(b[i] - lo);
            next_extents[i] = extents[i] + std::max(delta_a[i], delta_b[i]);
            next_cells *= next_extents[i];
            offset[i] += lo;
        }
        if (m == 1) {
            step_1d(std::span<const double>(cur.data(), cells), std::span<double>(next.data(), next_cells),
                    std::max(delta_a[0], delta_b[0]));
        } else {
            step_nd(std::span<const double>(cur.data(), cells), extents, next, next_extents, delta_a, delta_b);
        }
        cur.swap(next);
        extents = next_extents;
        cells = next_cells;
    }
    cur.resize(cells);
    return DensePMF(std::move(offset), std::move(extents), std::move(cur));
}

DensePMF fft_recurse(std::span<const LocalPMF* const> pmfs, const ConvolutionEngine& engine,
                     ConvolutionDiagnostics& diag)
{
    const std::size_t m = pmfs.front()->dims();
    if (pmfs.size() <= engine.fft_base_case_threshold) {
        const std::vector<std::int64_t> zero(m, 0);
        return dp_core(pmfs, zero, engine.memory_cap);
    }
    const std::size_t half = pmfs.size() / 2;
    const auto lower = pmfs.first(half);
    const auto upper = pmfs.subspan(half);

    if (engine.parallel) {
        ConvolutionDiagnostics lower_diag;
        auto pending = std::async(std::launch::async, [&] { return fft_recurse(lower, engine, lower_diag); });
        DensePMF right = fft_recurse(upper, engine, diag);
        DensePMF left = pending.get();
        diag.merge(lower_diag);
        return fft_pairwise_convolve(left, right, engine.memory_cap, &diag);
    }
    DensePMF left = fft_recurse(lower, engine, diag);
    DensePMF right = fft_recurse(upper, engine, diag);
    return fft_pairwise_convolve(left, right, engine.memory_cap, &diag);
}

DensePMF scaled_shift(const DensePMF& point, const DensePMF& other)
{
    const double w = point.probs()[0];
    std::vector<std::int64_t> offset = other.offset();
    for (std::size_t i = 0; i < offset.size(); ++i) {
        offset[i] += point.offset()[i];
    }
    std::vector<double> probs(other.probs().begin(), other.probs().end());
    if (w != 1.0) {
        for (auto& p : probs) {
            p *= w;
        }
    }
    return DensePMF(std::move(offset), other.extents(), std::move(probs));
}

} // namespace

void validate(const ConvolutionEngine& engine)
{
    if (engine.fft_base_case_threshold < 1) {
        throw InvalidInputError("fft_base_case_threshold must be >= 1");
    }
    if (engine.memory_cap < 1) {
        throw InvalidInputError("memory_cap must be >= 1");
    }
}

void ConvolutionDiagnostics::merge(const ConvolutionDiagnostics& other)
{
    min_before_clamp = std::min(min_before_clamp, other.min_before_clamp);
    fft_merges += other.fft_merges;
}

DensePMF convolve_dp(std::span<const LocalPMF> pmfs, std::uint64_t memory_cap)
{
    const FoldedPmfs folded = fold_one_point(pmfs);
    return dp_core(folded.two_point, folded.shift, memory_cap);
}

DensePMF convolve_fft(std::span<const LocalPMF> pmfs, const ConvolutionEngine& engine,
                      ConvolutionDiagnostics* diagnostics)
{
    validate(engine);
    const FoldedPmfs folded = fold_one_point(pmfs);
    // Fail before any work if the final box cannot fit.
    support_bounds(pmfs, engine.memory_cap);
    if (folded.two_point.empty()) {
        return DensePMF::point_mass(folded.shift);
    }
    ConvolutionDiagnostics diag;
    DensePMF out = fft_recurse(folded.two_point, engine, diag);
    out.shift(folded.shift);
    if (diagnostics != nullptr) {
        diagnostics->merge(diag);
    }
    return out;
}

DensePMF convolve(std::span<const LocalPMF> pmfs, const ConvolutionEngine& engine,
                  ConvolutionDiagnostics* diagnostics)
{
    validate(engine);
    if (engine.kind == EngineKind::dp) {
        return convolve_dp(pmfs, engine.memory_cap);
    }
    return convolve_fft(pmfs, engine, diagnostics);
}

DensePMF fft_pairwise_convolve(const DensePMF& a, const DensePMF& b, std::uint64_t memory_cap,
                               ConvolutionDiagnostics* diagnostics)
{
    const std::size_t m = a.dims();
    if (m == 0 || b.dims() != m) {
        throw InvalidInputError("fft_pairwise_convolve needs operands of equal, non-zero dimensionality");
    }
    std::vector<std::size_t> extents(m);
    std::vector<std::int64_t> offset(m);
    for (std::size_t i = 0; i < m; ++i) {
        extents[i] = a.extents()[i] + b.extents()[i] - 1;
        offset[i] = a.offset()[i] + b.offset()[i];
    }
    const auto cells = static_cast<std::size_t>(checked_cell_count(extents, memory_cap));

    if (a.size() == 1) {
        return scaled_shift(a, b);
    }
    if (b.size() == 1) {
        return scaled_shift(b, a);
    }

    std::vector<int> padded(m);
    std::size_t real_cells = 1;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t len = std::bit_ceil(extents[i]);
        if (len > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
            throw ResourceLimitError("FFT axis length exceeds the transform size limit");
        }
        padded[i] = static_cast<int>(len);
        real_cells *= len;
    }
    const std::size_t last_complex = static_cast<std::size_t>(padded[m - 1]) / 2 + 1;
    const std::size_t complex_cells = real_cells / static_cast<std::size_t>(padded[m - 1]) * last_complex;

    std::vector<std::size_t> padded_extents(padded.begin(), padded.end());
    const auto pstride = row_major_strides(padded_extents);

    auto real_a = fftw_alloc<double>(real_cells);
    auto real_b = fftw_alloc<double>(real_cells);
    auto spec_a = fftw_alloc<fftw_complex>(complex_cells);
    auto spec_b = fftw_alloc<fftw_complex>(complex_cells);

    auto load = [&](const DensePMF& src, double* dst) {
        std::fill(dst, dst + real_cells, 0.0);
        const auto& ext = src.extents();
        const std::size_t row = ext[m - 1];
        const auto probs = src.probs();
        std::vector<std::size_t> idx(m, 0);
        for (std::size_t s = 0; s < probs.size(); s += row) {
            std::size_t base = 0;
            for (std::size_t i = 0; i + 1 < m; ++i) {
                base += idx[i] * pstride[i];
            }
            std::copy_n(probs.begin() + static_cast<std::ptrdiff_t>(s), row, dst + base);
            for (std::size_t i = m - 1; i-- > 0;) {
                if (++idx[i] < ext[i]) {
                    break;
                }
                idx[i] = 0;
            }
        }
    };
    load(a, real_a.get());
    load(b, real_b.get());

    const bool cacheable = real_cells <= kPlanCacheMaxCells;
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
    {
        std::lock_guard lock(planner_mutex());
        PlanPair* cached = cacheable ? &plan_cache().slot(padded) : nullptr;
        if (cached != nullptr && cached->forward != nullptr && cached->inverse != nullptr) {
            fwd = cached->forward;
            inv = cached->inverse;
        } else {
            fwd = fftw_plan_dft_r2c(static_cast<int>(m), padded.data(), real_a.get(), spec_a.get(), FFTW_ESTIMATE);
            inv = fftw_plan_dft_c2r(static_cast<int>(m), padded.data(), spec_a.get(), real_a.get(), FFTW_ESTIMATE);
            if (cached != nullptr && fwd != nullptr && inv != nullptr) {
                *cached = {fwd, inv};
            }
        }
    }
    // Uncached plans are owned here; Plan's destructor takes the planner
    // lock, so wrap after releasing it.
    std::optional<Plan> owned_fwd;
    std::optional<Plan> owned_inv;
    if (!cacheable || fwd == nullptr || inv == nullptr) {
        if (inv != nullptr) {
            owned_inv.emplace(inv);
        }
        owned_fwd.emplace(fwd);
        if (!owned_inv) {
            owned_inv.emplace(inv);
        }
    }

    fftw_execute_dft_r2c(fwd, real_a.get(), spec_a.get());
    fftw_execute_dft_r2c(fwd, real_b.get(), spec_b.get());
    auto* za = reinterpret_cast<std::complex<double>*>(spec_a.get());
    const auto* zb = reinterpret_cast<const std::complex<double>*>(spec_b.get());
    for (std::size_t i = 0; i < complex_cells; ++i) {
        za[i] *= zb[i];
    }
    fftw_execute_dft_c2r(inv, spec_a.get(), real_a.get());

    const double scale = 1.0 / static_cast<double>(real_cells);
    std::vector<double> probs(cells);
    double min_seen = 0.0;
    const std::size_t row = extents[m - 1];
    std::vector<std::size_t> idx(m, 0);
    for (std::size_t d = 0; d < cells; d += row) {
        std::size_t base = 0;
        for (std::size_t i = 0; i + 1 < m; ++i) {
            base += idx[i] * pstride[i];
        }
        for (std::size_t j = 0; j < row; ++j) {
            double v = real_a[base + j] * scale;
            min_seen = std::min(min_seen, v);
            if (v < 0.0) {
                if (v < -kClampTolerance) {
                    throw InternalError("FFT convolution produced a cell of " + std::to_string(v) +
                                        ", below the round-off tolerance");
                }
                v = 0.0;
            } else if (v > 1.0) {
                v = 1.0;
            }
            probs[d + j] = v;
        }
        for (std::size_t i = m - 1; i-- > 0;) {
            if (++idx[i] < extents[i]) {
                break;
            }
            idx[i] = 0;
        }
    }
    if (diagnostics != nullptr) {
        diagnostics->min_before_clamp = std::min(diagnostics->min_before_clamp, min_seen);
        ++diagnostics->fft_merges;
    }
    return DensePMF(std::move(offset), std::move(extents), std::move(probs));
}

} // namespace permtest
