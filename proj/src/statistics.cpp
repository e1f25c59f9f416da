#include "permtest/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "permtest/errors.hpp"

namespace permtest {

void validate_record(const EntryRecord& r, const std::string& what)
{
    if (r.length < 1) {
        throw InvalidInputError(what + ": length must be positive");
    }
    if (r.correct < 0 || r.true_positive < 0 || r.incorrect < 0) {
        throw InvalidInputError(what + ": counts must be non-negative");
    }
    if (r.correct > r.length) {
        throw InvalidInputError(what + ": correct (" + std::to_string(r.correct) + ") exceeds length (" +
                                std::to_string(r.length) + ")");
    }
    if (r.true_positive > r.length) {
        throw InvalidInputError(what + ": true_positive (" + std::to_string(r.true_positive) +
                                ") exceeds length (" + std::to_string(r.length) + ")");
    }
}

void validate_dataset(const PairedDataset& ds)
{
    if (ds.u.size() != ds.v.size()) {
        throw AlignmentError(std::min(ds.u.size(), ds.v.size()),
                             "u has " + std::to_string(ds.u.size()) + " entries, v has " +
                                 std::to_string(ds.v.size()));
    }
    if (ds.u.empty()) {
        throw EmptyDatasetError();
    }
    for (std::size_t n = 0; n < ds.u.size(); ++n) {
        validate_record(ds.u[n], "u entry " + std::to_string(n));
        validate_record(ds.v[n], "v entry " + std::to_string(n));
        if (ds.u[n].length != ds.v[n].length) {
            throw AlignmentError(n, "u length " + std::to_string(ds.u[n].length) + " != v length " +
                                        std::to_string(ds.v[n].length));
        }
    }
}

PairedDataset make_dataset(std::vector<EntryRecord> u, std::vector<EntryRecord> v)
{
    PairedDataset ds{std::move(u), std::move(v)};
    validate_dataset(ds);
    return ds;
}

DecomposableStatistic::DecomposableStatistic(std::string name, std::size_t m, EffectFn effects, AggregateFn aggregate,
                                             std::vector<std::int64_t> declared_range, Tails tails,
                                             bool integer_valued)
    : name_(std::move(name)),
      m_(m),
      effects_(std::move(effects)),
      aggregate_(std::move(aggregate)),
      declared_range_(std::move(declared_range)),
      tails_(tails),
      integer_valued_(integer_valued)
{
    if (m_ == 0) {
        throw InvalidStatisticError("statistic must have at least one scoring function");
    }
    if (!effects_ || !aggregate_) {
        throw InvalidStatisticError("statistic needs both an effect and an aggregate function");
    }
    if (declared_range_.size() != m_) {
        throw InvalidStatisticError("declared_range must have one bound per dimension");
    }
    for (auto g : declared_range_) {
        if (g < 0) {
            throw InvalidStatisticError("declared_range bounds must be non-negative");
        }
    }
}

EffectTuple DecomposableStatistic::effects(const EntryRecord& u, const EntryRecord& v) const
{
    EffectTuple z = effects_(u, v);
    if (z.dims() != m_) {
        throw InvalidStatisticError(name_ + ": effect has " + std::to_string(z.dims()) + " components, expected " +
                                    std::to_string(m_));
    }
    for (std::size_t i = 0; i < m_; ++i) {
        if (std::llabs(z[i]) > declared_range_[i]) {
            throw InvalidStatisticError(name_ + ": effect component " + std::to_string(i) + " = " +
                                        std::to_string(z[i]) + " outside declared range +/-" +
                                        std::to_string(declared_range_[i]));
        }
    }
    return z;
}

double DecomposableStatistic::aggregate(std::span<const std::int64_t> sums) const
{
    const double h = aggregate_(sums);
    return tails_ == Tails::two ? std::fabs(h) : h;
}

DecomposableStatistic accuracy_diff_statistic(Tails tails, std::int64_t max_length)
{
    return DecomposableStatistic(
        "acc-diff", 1,
        [](const EntryRecord& u, const EntryRecord& v) { return EffectTuple{u.correct - v.correct}; },
        [](std::span<const std::int64_t> x) { return static_cast<double>(x[0]); }, {max_length}, tails, true);
}

double f1_term(std::int64_t true_positive, std::int64_t incorrect)
{
    if (true_positive == 0 && incorrect == 0) {
        return 0.0;
    }
    const auto tp = static_cast<double>(true_positive);
    return tp / (tp + 0.5 * static_cast<double>(incorrect));
}

DecomposableStatistic f1_diff_statistic(Tails tails, std::int64_t max_length)
{
    // Swapping u and v exchanges components (1,2) with (3,4).
    return DecomposableStatistic(
        "f1-diff", 4,
        [](const EntryRecord& u, const EntryRecord& v) {
            return EffectTuple{u.true_positive, u.incorrect, v.true_positive, v.incorrect};
        },
        [](std::span<const std::int64_t> x) { return f1_term(x[0], x[1]) - f1_term(x[2], x[3]); },
        {max_length, max_length, max_length, max_length}, tails, false);
}

std::vector<LocalEffectPair> local_effects(const DecomposableStatistic& stat, const PairedDataset& dataset)
{
    validate_dataset(dataset);
    std::vector<LocalEffectPair> out;
    out.reserve(dataset.size());
    for (std::size_t n = 0; n < dataset.size(); ++n) {
        out.push_back({stat.effects(dataset.u[n], dataset.v[n]), stat.effects(dataset.v[n], dataset.u[n])});
    }
    return out;
}

std::vector<std::int64_t> forward_sums(std::span<const LocalEffectPair> effects)
{
    if (effects.empty()) {
        throw EmptyDatasetError();
    }
    std::vector<std::int64_t> sums(effects.front().forward.dims(), 0);
    for (const auto& e : effects) {
        for (std::size_t i = 0; i < sums.size(); ++i) {
            sums[i] += e.forward[i];
        }
    }
    return sums;
}

double observed_effect(const DecomposableStatistic& stat, std::span<const LocalEffectPair> effects)
{
    const auto sums = forward_sums(effects);
    return stat.aggregate(sums);
}

} // namespace permtest
