#include <gtest/gtest.h>

#include <atomic>
#include <map>

#include "test_support.hpp"

using namespace concentra;
using concentra::testing::iota_values;
using concentra::testing::random_distribution;

namespace {

DiscreteDistribution law(std::initializer_list<Atom> atoms) { return DiscreteDistribution(std::vector<Atom>(atoms)); }

}  // namespace

TEST(Distribution, CanonicalizesSortsAndCoalesces) {
    const auto d = law({{3.0, 0.25}, {1.0, 0.25}, {3.0, 0.5}});
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d.atoms()[0].value, 1.0);
    EXPECT_DOUBLE_EQ(d.atoms()[1].prob, 0.75);
    EXPECT_EQ(d.cumulative().back(), 1.0);
}

TEST(Distribution, DropsZeroProbabilityAtoms) {
    const auto d = law({{0.0, 0.0}, {2.0, 1.0}});
    EXPECT_EQ(d.size(), 1u);
    EXPECT_EQ(d.min(), 2.0);
}

TEST(Distribution, RenormalizesSmallDrift) {
    const auto d = law({{0.0, 0.5 + 4e-10}, {1.0, 0.5}});
    double s = 0.0;
    for (const auto& a : d.atoms()) s += a.prob;
    EXPECT_NEAR(s, 1.0, 1e-15);
}

TEST(Distribution, RejectsBadInput) {
    EXPECT_THROW(law({{0.0, 0.5}, {1.0, 0.4}}), InputError);
    EXPECT_THROW(law({{0.0, -0.1}, {1.0, 1.1}}), InputError);
    EXPECT_THROW(law({{std::nan(""), 1.0}}), InputError);
    EXPECT_THROW(DiscreteDistribution(std::vector<Atom>{}), InputError);
    EXPECT_THROW(law({{0.0, 0.0}}), InputError);
}

TEST(Quantile, LeftQuantileAtAtomBoundary) {
    EXPECT_EQ(quantile(law({{0.0, 0.5}, {1.0, 0.5}}), 0.5), 0.0);
    const auto u = DiscreteDistribution::uniform(iota_values(1, 10));
    EXPECT_EQ(quantile(u, 0.85), 9.0);
    EXPECT_EQ(quantile(u, 0.8), 8.0);
    EXPECT_EQ(quantile(u, 0.05), 1.0);
    EXPECT_EQ(quantile(u, 0.999), 10.0);
}

TEST(Quantile, RejectsLevelsOutsideUnitInterval) {
    const auto d = DiscreteDistribution::constant(1.0);
    EXPECT_THROW(quantile(d, 0.0), DomainError);
    EXPECT_THROW(quantile(d, 1.0), DomainError);
    EXPECT_THROW(quantile(d, -0.2), DomainError);
}

TEST(Quantile, MatchesSortedSampleDefinition) {
    // Oracle: for m equally likely values the left p-quantile is the
    // ceil(m p)-th smallest value.
    Rng rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t m = 1 + uniform_index(rng, 30);
        std::vector<double> xs(m);
        for (auto& x : xs) x = std::round(uniform(rng, -5.0, 5.0));
        const auto d = DiscreteDistribution::uniform(xs);
        std::sort(xs.begin(), xs.end());
        const double p = uniform(rng, 0.001, 0.999);
        const auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(m)));
        const double expected = xs[std::max<std::size_t>(k, 1) - 1];
        // Stay away from exact grid points where rounding decides the side.
        if (std::abs(p * static_cast<double>(m) - std::round(p * static_cast<double>(m))) < 1e-9) continue;
        EXPECT_EQ(quantile(d, p), expected);
    }
}

TEST(RangeWidth, MaxMinusMin) {
    EXPECT_EQ(range_width(law({{-2.0, 0.3}, {5.0, 0.7}})), 7.0);
    EXPECT_EQ(range_width(DiscreteDistribution::constant(4.0)), 0.0);
}

TEST(AntitheticMidpoint, ThreePointExample) {
    const auto t = antithetic_midpoint(law({{0.0, 1.0 / 3}, {1.0, 1.0 / 3}, {5.0, 1.0 / 3}}));
    ASSERT_EQ(t.size(), 2u);
    EXPECT_DOUBLE_EQ(t.atoms()[0].value, 1.0);
    EXPECT_NEAR(t.atoms()[0].prob, 1.0 / 3, 1e-12);
    EXPECT_DOUBLE_EQ(t.atoms()[1].value, 2.5);
    EXPECT_NEAR(t.atoms()[1].prob, 2.0 / 3, 1e-12);
}

TEST(AntitheticMidpoint, SymmetricTwoPointCollapses) {
    const auto t = antithetic_midpoint(law({{0.0, 0.5}, {1.0, 0.5}}));
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t.atoms()[0].value, 0.5);
    EXPECT_EQ(t.atoms()[0].prob, 1.0);
}

TEST(AntitheticMidpoint, ConstantIsFixed) {
    const auto d = DiscreteDistribution::constant(3.0);
    EXPECT_EQ(antithetic_midpoint(d), d);
}

TEST(AntitheticMidpoint, PreservesMeanAndHalvesWidth) {
    Rng rng(2024);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto d = random_distribution(rng, 50);
        const auto t = antithetic_midpoint(d);
        EXPECT_NEAR(t.mean(), d.mean(), 1e-12 * (1.0 + std::abs(d.mean())) + 1e-12);
        EXPECT_LE(range_width(t), range_width(d) / 2 + 1e-12);
    }
}

TEST(AntitheticMidpoint, IsSymmetricAboutMidrangeForSymmetricInput) {
    const auto t = antithetic_midpoint(law({{-3.0, 0.2}, {0.0, 0.6}, {3.0, 0.2}}));
    // (F^-1(U) + F^-1(1-U))/2 of a symmetric law is the center.
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t.atoms()[0].value, 0.0);
}

TEST(AntitheticMidpoint, MatchesMonteCarloLaw) {
    // Oracle: draw U, evaluate (F^-1(U) + F^-1(1-U))/2 directly and compare
    // the empirical law with the exact transform in Kolmogorov distance.
    constexpr std::size_t kDistributions = 1000;
    constexpr std::size_t kSamples = 100000;
    std::vector<double> ks(kDistributions, 0.0);
    std::vector<std::size_t> unmatched(kDistributions, 0);
    parallel_for(kDistributions, concentra::testing::worker_count(), [&](std::size_t i) {
        Rng rng(mix_seed(77, i));
        const auto d = random_distribution(rng, 50);
        const auto t = antithetic_midpoint(d);
        std::vector<double> counts(t.size(), 0.0);
        for (std::size_t s = 0; s < kSamples; ++s) {
            double u = uniform01(rng);
            while (u <= 0.0) u = uniform01(rng);
            const double x = 0.5 * (quantile(d, u) + quantile(d, 1.0 - u));
            const auto& atoms = t.atoms();
            auto it = std::lower_bound(atoms.begin(), atoms.end(), x,
                                       [](const Atom& a, double v) { return a.value < v; });
            // Values must coincide up to rounding of the midpoint.
            if (it != atoms.end() && std::abs(it->value - x) <= 1e-12 * (1.0 + std::abs(x))) {
                counts[static_cast<std::size_t>(it - atoms.begin())] += 1.0;
            } else if (it != atoms.begin() && std::abs((it - 1)->value - x) <= 1e-12 * (1.0 + std::abs(x))) {
                counts[static_cast<std::size_t>(it - atoms.begin()) - 1] += 1.0;
            } else {
                ++unmatched[i];
            }
        }
        double emp = 0.0;
        double worst = 0.0;
        for (std::size_t k = 0; k < t.size(); ++k) {
            emp += counts[k] / static_cast<double>(kSamples);
            worst = std::max(worst, std::abs(emp - t.cumulative()[k]));
        }
        ks[i] = worst;
    });
    for (std::size_t i = 0; i < kDistributions; ++i) {
        EXPECT_EQ(unmatched[i], 0u) << "distribution " << i;
        EXPECT_LE(ks[i], 0.02) << "distribution " << i;
    }
}

TEST(RestrictQuantiles, UpperPartOfUniform) {
    const auto u = DiscreteDistribution::uniform(iota_values(1, 10));
    const auto g = restrict_quantiles(u, 0.8, 1.0);
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(g.atoms()[0].value, 9.0);
    EXPECT_NEAR(g.atoms()[0].prob, 0.5, 1e-12);
    const auto h = restrict_quantiles(u, 0.0, 0.75);
    EXPECT_EQ(h.max(), 8.0);
    EXPECT_NEAR(h.atoms().back().prob, (0.75 - 0.7) / 0.75, 1e-12);
}

TEST(Mixture, CombinesWeights) {
    const std::pair<double, DiscreteDistribution> parts[] = {{0.25, DiscreteDistribution::constant(1.0)},
                                                             {0.75, DiscreteDistribution::constant(3.0)}};
    const auto m = DiscreteDistribution::mixture(parts);
    EXPECT_DOUBLE_EQ(m.mean(), 2.5);
    EXPECT_DOUBLE_EQ(m.cdf(1.0), 0.25);
    EXPECT_DOUBLE_EQ(m.cdf(0.0), 0.0);
    EXPECT_DOUBLE_EQ(m.cdf(10.0), 1.0);
}
