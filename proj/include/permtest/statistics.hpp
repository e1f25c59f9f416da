#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "permtest/pmf.hpp"

namespace permtest {

/// Per-entry evaluation record. Accuracy data fills `correct`; F1 data fills
/// `true_positive` and `incorrect`. `length` is the number of predictions.
struct EntryRecord {
    std::int64_t correct = 0;
    std::int64_t length = 1;
    std::int64_t true_positive = 0;
    std::int64_t incorrect = 0;

    friend bool operator==(const EntryRecord&, const EntryRecord&) = default;
};

/// Throws InvalidInputError naming `what` if the record is inconsistent.
void validate_record(const EntryRecord& r, const std::string& what);

/// Outputs of systems U and V on the same N entries, index-aligned.
struct PairedDataset {
    std::vector<EntryRecord> u;
    std::vector<EntryRecord> v;

    std::size_t size() const noexcept { return u.size(); }
    friend bool operator==(const PairedDataset&, const PairedDataset&) = default;
};

/// Checks N >= 1, equal counts, matching per-entry lengths and record
/// validity. Throws EmptyDatasetError, AlignmentError or InvalidInputError.
void validate_dataset(const PairedDataset& ds);

/// Same as validate_dataset but also returns the dataset.
PairedDataset make_dataset(std::vector<EntryRecord> u, std::vector<EntryRecord> v);

enum class Tails { one, two };

/// Default per-entry effect bound for the built-in statistics.
inline constexpr std::int64_t kDefaultMaxEntryLength = std::int64_t{1} << 20;

/// t(u, v) = h(sum_n g_1(u_n, v_n), ..., sum_n g_m(u_n, v_n)) with integer g_i.
///
/// `tails` wraps the raw aggregate: two-tailed statistics report |h|. Set
/// `integer_valued` when h maps integer sums to integers so threshold
/// comparisons can be exact.
class DecomposableStatistic {
public:
    using EffectFn = std::function<EffectTuple(const EntryRecord& u, const EntryRecord& v)>;
    using AggregateFn = std::function<double(std::span<const std::int64_t> sums)>;

    DecomposableStatistic(std::string name, std::size_t m, EffectFn effects, AggregateFn aggregate,
                          std::vector<std::int64_t> declared_range, Tails tails, bool integer_valued);

    const std::string& name() const noexcept { return name_; }
    std::size_t dims() const noexcept { return m_; }
    Tails tails() const noexcept { return tails_; }
    bool integer_valued() const noexcept { return integer_valued_; }
    const std::vector<std::int64_t>& declared_range() const noexcept { return declared_range_; }

    /// g(u_n, v_n), checked against dims() and declared_range().
    EffectTuple effects(const EntryRecord& u, const EntryRecord& v) const;

    /// h with the tails wrapper applied.
    double aggregate(std::span<const std::int64_t> sums) const;

private:
    std::string name_;
    std::size_t m_;
    EffectFn effects_;
    AggregateFn aggregate_;
    std::vector<std::int64_t> declared_range_;
    Tails tails_;
    bool integer_valued_;
};

/// g = correct(u) - correct(v); h = identity or |.|.
DecomposableStatistic accuracy_diff_statistic(Tails tails, std::int64_t max_length = kDefaultMaxEntryLength);

/// g = (TP(u), incorrect(u), TP(v), incorrect(v));
/// h = x1 / (x1 + x2/2) - x3 / (x3 + x4/2), with 0/0 taken as 0.
DecomposableStatistic f1_diff_statistic(Tails tails, std::int64_t max_length = kDefaultMaxEntryLength);

/// x / (x + y/2) with the 0/0 case defined as 0.
double f1_term(std::int64_t true_positive, std::int64_t incorrect);

/// Element n is (g(u_n, v_n), g(v_n, u_n)).
std::vector<LocalEffectPair> local_effects(const DecomposableStatistic& stat, const PairedDataset& dataset);

/// Component-wise sum of the forward tuples.
std::vector<std::int64_t> forward_sums(std::span<const LocalEffectPair> effects);

/// h(sum of forward tuples).
double observed_effect(const DecomposableStatistic& stat, std::span<const LocalEffectPair> effects);

} // namespace permtest
