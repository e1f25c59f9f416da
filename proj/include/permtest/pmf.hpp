#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace permtest {

/// Default cell budget for any dense PMF (2^31 cells).
inline constexpr std::uint64_t kDefaultMemoryCap = std::uint64_t{1} << 31;

/// Tolerance on the total mass of any dense PMF.
inline constexpr double kMassTolerance = 1e-9;

/// Integer effect values, one per scoring function g_i of a statistic.
struct EffectTuple {
    std::vector<std::int64_t> values;

    EffectTuple() = default;
    explicit EffectTuple(std::vector<std::int64_t> v) : values(std::move(v)) {}
    EffectTuple(std::initializer_list<std::int64_t> v) : values(v) {}

    std::size_t dims() const noexcept { return values.size(); }
    std::int64_t operator[](std::size_t i) const { return values[i]; }
    std::int64_t& operator[](std::size_t i) { return values[i]; }

    friend bool operator==(const EffectTuple&, const EffectTuple&) = default;
};

/// The effect of one entry when it stays (forward) and when it is swapped
/// (backward).
struct LocalEffectPair {
    EffectTuple forward;
    EffectTuple backward;

    friend bool operator==(const LocalEffectPair&, const LocalEffectPair&) = default;
};

/// Null distribution of a single entry's effect: uniform over
/// {forward, backward}. Kept symbolic; never densified on its own.
class LocalPMF {
public:
    const LocalEffectPair& pair() const noexcept { return pair_; }
    std::size_t dims() const noexcept { return pair_.forward.dims(); }

    /// True when forward != backward, i.e. mass 1/2 on each of two points.
    bool two_point() const noexcept { return two_point_; }

    /// Mass on each support point: exactly 0.5 or exactly 1.
    double mass() const noexcept { return two_point_ ? 0.5 : 1.0; }

    /// Probability of an arbitrary point.
    double probability(const EffectTuple& z) const;

private:
    friend LocalPMF make_local_pmf(LocalEffectPair pair);
    LocalPMF(LocalEffectPair pair, bool two_point) : pair_(std::move(pair)), two_point_(two_point) {}

    LocalEffectPair pair_;
    bool two_point_;
};

/// Throws InvalidInputError when forward and backward differ in length or are
/// zero-dimensional.
LocalPMF make_local_pmf(LocalEffectPair pair);

std::vector<LocalPMF> make_local_pmfs(std::span<const LocalEffectPair> pairs);

/// An axis-aligned integer box: offset is the minimum coordinate per
/// dimension, extents the number of cells per dimension.
struct SupportBox {
    std::vector<std::int64_t> offset;
    std::vector<std::size_t> extents;

    std::uint64_t cell_count() const;
    friend bool operator==(const SupportBox&, const SupportBox&) = default;
};

/// Product of extents, throwing ResourceLimitError past `memory_cap` (also
/// guards against overflow).
std::uint64_t checked_cell_count(std::span<const std::size_t> extents, std::uint64_t memory_cap);

/// Tight box around every reachable sum of the given pmfs.
SupportBox support_bounds(std::span<const LocalPMF> pmfs, std::uint64_t memory_cap = kDefaultMemoryCap);

/// Probability array over a dense integer box in row-major order (the last
/// dimension varies fastest).
class DensePMF {
public:
    DensePMF() = default;
    DensePMF(std::vector<std::int64_t> offset, std::vector<std::size_t> extents, std::vector<double> probs);

    /// All mass on one point.
    static DensePMF point_mass(std::vector<std::int64_t> at);

    std::size_t dims() const noexcept { return offset_.size(); }
    const std::vector<std::int64_t>& offset() const noexcept { return offset_; }
    const std::vector<std::size_t>& extents() const noexcept { return extents_; }
    std::span<const double> probs() const noexcept { return probs_; }
    std::size_t size() const noexcept { return probs_.size(); }

    /// Probability at absolute coordinates; 0 outside the box.
    double at(std::span<const std::int64_t> coords) const;
    double at(std::int64_t coord) const { return at(std::span<const std::int64_t>(&coord, 1)); }

    /// Absolute coordinates of the cell at a linear index.
    std::vector<std::int64_t> coords_of(std::size_t linear) const;

    /// Translate the support by `delta` without touching the probabilities.
    void shift(std::span<const std::int64_t> delta);

    std::vector<double>& mutable_probs() noexcept { return probs_; }

private:
    std::vector<std::int64_t> offset_;
    std::vector<std::size_t> extents_;
    std::vector<double> probs_;
};

double total_mass(const DensePMF& pmf);

/// Densify a single local pmf over its own tight box.
DensePMF densify(const LocalPMF& pmf);

} // namespace permtest
