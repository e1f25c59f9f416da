#include "permtest/pmf.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "permtest/errors.hpp"

namespace permtest {

double LocalPMF::probability(const EffectTuple& z) const
{
    if (z == pair_.forward || z == pair_.backward) {
        return mass();
    }
    return 0.0;
}

LocalPMF make_local_pmf(LocalEffectPair pair)
{
    if (pair.forward.dims() != pair.backward.dims()) {
        throw InvalidInputError("local effect pair has mismatched dimensionality: forward " +
                                std::to_string(pair.forward.dims()) + ", backward " +
                                std::to_string(pair.backward.dims()));
    }
    if (pair.forward.dims() == 0) {
        throw InvalidInputError("local effect pair is zero-dimensional");
    }
    const bool two_point = pair.forward != pair.backward;
    return LocalPMF(std::move(pair), two_point);
}

std::vector<LocalPMF> make_local_pmfs(std::span<const LocalEffectPair> pairs)
{
    std::vector<LocalPMF> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        out.push_back(make_local_pmf(p));
    }
    return out;
}

std::uint64_t SupportBox::cell_count() const
{
    return checked_cell_count(extents, std::numeric_limits<std::uint64_t>::max());
}

std::uint64_t checked_cell_count(std::span<const std::size_t> extents, std::uint64_t memory_cap)
{
    std::uint64_t cells = 1;
    for (auto e : extents) {
        if (e == 0) {
            return 0;
        }
        if (cells > memory_cap / e) {
            throw ResourceLimitError("dense pmf would exceed the memory cap of " + std::to_string(memory_cap) +
                                     " cells");
        }
        cells *= e;
    }
    return cells;
}

SupportBox support_bounds(std::span<const LocalPMF> pmfs, std::uint64_t memory_cap)
{
    if (pmfs.empty()) {
        throw InvalidInputError("support_bounds needs at least one pmf");
    }
    const std::size_t m = pmfs.front().dims();
    SupportBox box;
    box.offset.assign(m, 0);
    box.extents.assign(m, 1);
    for (const auto& f : pmfs) {
        if (f.dims() != m) {
            throw InvalidInputError("pmfs have mixed dimensionality");
        }
        const auto& fw = f.pair().forward;
        const auto& bw = f.pair().backward;
        for (std::size_t i = 0; i < m; ++i) {
            box.offset[i] += std::min(fw[i], bw[i]);
            box.extents[i] += static_cast<std::size_t>(std::max(fw[i], bw[i]) - std::min(fw[i], bw[i]));
        }
    }
    checked_cell_count(box.extents, memory_cap);
    return box;
}

DensePMF::DensePMF(std::vector<std::int64_t> offset, std::vector<std::size_t> extents, std::vector<double> probs)
    : offset_(std::move(offset)), extents_(std::move(extents)), probs_(std::move(probs))
{
    if (offset_.size() != extents_.size() || offset_.empty()) {
        throw InvalidInputError("dense pmf offset/extent dimensionality mismatch");
    }
    const std::size_t cells = std::accumulate(extents_.begin(), extents_.end(), std::size_t{1},
                                              std::multiplies<>());
    if (cells != probs_.size() || cells == 0) {
        throw InvalidInputError("dense pmf extents do not match probability array size");
    }
}

DensePMF DensePMF::point_mass(std::vector<std::int64_t> at)
{
    std::vector<std::size_t> extents(at.size(), 1);
    return DensePMF(std::move(at), std::move(extents), {1.0});
}

double DensePMF::at(std::span<const std::int64_t> coords) const
{
    if (coords.size() != dims()) {
        throw InvalidInputError("coordinate dimensionality mismatch");
    }
    std::size_t linear = 0;
    for (std::size_t i = 0; i < dims(); ++i) {
        const std::int64_t rel = coords[i] - offset_[i];
        if (rel < 0 || static_cast<std::uint64_t>(rel) >= extents_[i]) {
            return 0.0;
        }
        linear = linear * extents_[i] + static_cast<std::size_t>(rel);
    }
    return probs_[linear];
}

std::vector<std::int64_t> DensePMF::coords_of(std::size_t linear) const
{
    std::vector<std::int64_t> c(dims());
    for (std::size_t i = dims(); i-- > 0;) {
        c[i] = offset_[i] + static_cast<std::int64_t>(linear % extents_[i]);
        linear /= extents_[i];
    }
    return c;
}

void DensePMF::shift(std::span<const std::int64_t> delta)
{
    for (std::size_t i = 0; i < dims(); ++i) {
        offset_[i] += delta[i];
    }
}

double total_mass(const DensePMF& pmf)
{
    double s = 0.0;
    for (double p : pmf.probs()) {
        s += p;
    }
    return s;
}

DensePMF densify(const LocalPMF& pmf)
{
    const SupportBox box = support_bounds(std::span<const LocalPMF>(&pmf, 1));
    DensePMF out(box.offset, box.extents, std::vector<double>(static_cast<std::size_t>(box.cell_count()), 0.0));
    auto& probs = out.mutable_probs();
    auto index_of = [&](const EffectTuple& z) {
        std::size_t linear = 0;
        for (std::size_t i = 0; i < z.dims(); ++i) {
            linear = linear * box.extents[i] + static_cast<std::size_t>(z[i] - box.offset[i]);
        }
        return linear;
    };
    probs[index_of(pmf.pair().forward)] += pmf.mass();
    if (pmf.two_point()) {
        probs[index_of(pmf.pair().backward)] += pmf.mass();
    }
    return out;
}

} // namespace permtest
