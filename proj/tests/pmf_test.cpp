#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "permtest/convolution.hpp"
#include "permtest/errors.hpp"
#include "permtest/pmf.hpp"

using namespace permtest;

TEST(LocalPmf, TwoPointWhenEffectsDiffer)
{
    const auto f = make_local_pmf({{1}, {-1}});
    EXPECT_TRUE(f.two_point());
    EXPECT_EQ(f.probability({1}), 0.5);
    EXPECT_EQ(f.probability({-1}), 0.5);
    EXPECT_EQ(f.probability({0}), 0.0);
}

TEST(LocalPmf, OnePointWhenEffectsEqual)
{
    const auto f = make_local_pmf({{0}, {0}});
    EXPECT_FALSE(f.two_point());
    EXPECT_EQ(f.probability({0}), 1.0);
}

TEST(LocalPmf, FourDimensionalTwoPoint)
{
    const auto f = make_local_pmf({{1, 0, 0, 1}, {0, 1, 1, 0}});
    EXPECT_TRUE(f.two_point());
    EXPECT_EQ(f.probability({1, 0, 0, 1}), 0.5);
    EXPECT_EQ(f.probability({0, 1, 1, 0}), 0.5);
}

TEST(LocalPmf, DimensionMismatchIsRejected)
{
    EXPECT_THROW(make_local_pmf({{1, 2}, {1}}), InvalidInputError);
    EXPECT_THROW(make_local_pmf({{}, {}}), InvalidInputError);
}

TEST(LocalPmf, MassesAreExactlyHalfOrOne)
{
    std::mt19937_64 rng(7);
    for (const auto& p : oracle::random_pairs(rng, 500, 2, -3, 3)) {
        const auto f = make_local_pmf(p);
        const double expected = p.forward == p.backward ? 1.0 : 0.5;
        EXPECT_EQ(f.mass(), expected);
    }
}

TEST(SupportBounds, TwoSymmetricPmfs)
{
    const std::vector<LocalPMF> pmfs{make_local_pmf({{1}, {-1}}), make_local_pmf({{1}, {-1}})};
    const auto box = support_bounds(pmfs);
    EXPECT_EQ(box.offset, std::vector<std::int64_t>{-2});
    EXPECT_EQ(box.extents, std::vector<std::size_t>{5});
}

TEST(SupportBounds, SingleOnePoint)
{
    const std::vector<LocalPMF> pmfs{make_local_pmf({{3}, {3}})};
    const auto box = support_bounds(pmfs);
    EXPECT_EQ(box.offset, std::vector<std::int64_t>{3});
    EXPECT_EQ(box.extents, std::vector<std::size_t>{1});
}

TEST(SupportBounds, MixedPmfsMatchEnumeration)
{
    const std::vector<LocalEffectPair> pairs{{{0}, {2}}, {{-1}, {1}}, {{5}, {5}}};
    const auto pmfs = make_local_pmfs(pairs);
    const auto box = support_bounds(pmfs);
    // Enumerated sums are {4, 6, 6, 8}.
    EXPECT_EQ(box.offset, std::vector<std::int64_t>{4});
    EXPECT_EQ(box.extents, std::vector<std::size_t>{5});
    const auto sums = oracle::enumerate_sums(pairs);
    EXPECT_EQ(sums.begin()->first, oracle::Point{4});
    EXPECT_EQ(sums.rbegin()->first, oracle::Point{8});
}

TEST(SupportBounds, MemoryCapIsEnforced)
{
    const std::vector<LocalPMF> pmfs{make_local_pmf({{0, 0}, {99, 99}})};
    EXPECT_THROW(support_bounds(pmfs, 100 * 100 - 1), ResourceLimitError);
    EXPECT_NO_THROW(support_bounds(pmfs, 100 * 100));
}

TEST(SupportBounds, EmptyAndMixedDimensionsRejected)
{
    EXPECT_THROW(support_bounds(std::vector<LocalPMF>{}), InvalidInputError);
    const std::vector<LocalPMF> mixed{make_local_pmf({{0}, {1}}), make_local_pmf({{0, 1}, {1, 0}})};
    EXPECT_THROW(support_bounds(mixed), InvalidInputError);
}

TEST(SupportBounds, TightAgainstEnumeration)
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> n_dist(1, 12);
    std::uniform_int_distribution<std::size_t> m_dist(1, 2);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = m_dist(rng);
        const auto pairs = oracle::random_pairs(rng, n_dist(rng), m, -4, 4);
        const auto box = support_bounds(make_local_pmfs(pairs));
        const auto sums = oracle::enumerate_sums(pairs);
        std::vector<bool> lo_hit(m, false);
        std::vector<bool> hi_hit(m, false);
        for (const auto& [xi, _] : sums) {
            for (std::size_t d = 0; d < m; ++d) {
                const auto hi = box.offset[d] + static_cast<std::int64_t>(box.extents[d]) - 1;
                ASSERT_GE(xi[d], box.offset[d]);
                ASSERT_LE(xi[d], hi);
                lo_hit[d] = lo_hit[d] || xi[d] == box.offset[d];
                hi_hit[d] = hi_hit[d] || xi[d] == hi;
            }
        }
        for (std::size_t d = 0; d < m; ++d) {
            EXPECT_TRUE(lo_hit[d]) << "trial " << trial << " dim " << d;
            EXPECT_TRUE(hi_hit[d]) << "trial " << trial << " dim " << d;
        }
    }
}

TEST(DensePmf, TotalMassOfSimplePmfs)
{
    EXPECT_EQ(total_mass(DensePMF::point_mass({0})), 1.0);
    EXPECT_EQ(total_mass(densify(make_local_pmf({{1}, {-1}}))), 1.0);
}

TEST(DensePmf, TotalMassAfterConvolutionIsOne)
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto pmfs = make_local_pmfs(oracle::random_pairs(rng, 300, 1, -20, 20));
        const auto dp = convolve_dp(pmfs);
        EXPECT_NEAR(total_mass(dp), 1.0, kMassTolerance);
        ConvolutionEngine fft;
        fft.fft_base_case_threshold = 4;
        const auto ff = convolve_fft(pmfs, fft);
        EXPECT_NEAR(total_mass(ff), 1.0, kMassTolerance);
        for (double p : ff.probs()) {
            ASSERT_GE(p, 0.0);
            ASSERT_LE(p, 1.0);
        }
    }
}

TEST(DensePmf, LookupAndCoordinates)
{
    const DensePMF pmf({-1, 2}, {2, 3}, {0.1, 0.2, 0.3, 0.1, 0.2, 0.1});
    const std::vector<std::int64_t> c{0, 3};
    EXPECT_EQ(pmf.at(c), 0.2);
    EXPECT_EQ(pmf.coords_of(4), c);
    const std::vector<std::int64_t> outside{5, 5};
    EXPECT_EQ(pmf.at(outside), 0.0);
    EXPECT_THROW(DensePMF({0}, {3}, {0.5, 0.5}), InvalidInputError);
}
