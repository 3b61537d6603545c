#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace concentra;
using concentra::testing::iota_values;
using concentra::testing::random_distribution;

namespace {

ScenarioSet rows(const std::vector<std::vector<double>>& r) {
    const std::size_t m = r.size();
    const std::size_t k = r.front().size();
    std::vector<double> losses;
    for (const auto& row : r) losses.insert(losses.end(), row.begin(), row.end());
    return ScenarioSet(m, k, losses, std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

// Brute force: does any subset of weight 1-p sit at or above its complement in every column?
bool exists_common_tail_event(const ScenarioSet& s, double p) {
    const std::size_t m = s.scenarios();
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
        double w = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            if (mask >> i & 1) w += s.weight(i);
        if (std::abs(w - (1.0 - p)) > 1e-10) continue;
        bool ok = true;
        for (std::size_t j = 0; j < s.positions() && ok; ++j)
            for (std::size_t a = 0; a < m && ok; ++a)
                for (std::size_t b = 0; b < m && ok; ++b)
                    if ((mask >> a & 1) && !(mask >> b & 1) && s.loss(a, j) < s.loss(b, j)) ok = false;
        if (ok) return true;
    }
    return false;
}

}  // namespace

TEST(TailEvent, AntitoneColumnsAreNotConcentrated) {
    const auto s = rows({{4, 1}, {3, 2}, {2, 3}, {1, 4}});
    const auto r = find_common_tail_event(s, 0.5);
    EXPECT_EQ(r.verdict, TailVerdict::NotConcentrated);
    EXPECT_FALSE(r.certificate.has_value());
    EXPECT_FALSE(es_additivity_test(s, 0.5));
    EXPECT_NEAR(es_additivity_gap(s, 0.5), 2.0, 1e-12);
}

TEST(TailEvent, SortedColumnsGiveCertificate) {
    const auto s = rows({{4, 4}, {3, 3}, {2, 2}, {1, 1}});
    const auto r = find_common_tail_event(s, 0.5);
    ASSERT_EQ(r.verdict, TailVerdict::Certified);
    EXPECT_EQ(r.certificate->event, (std::vector<std::size_t>{0, 1}));
    EXPECT_NEAR(r.certificate->weight, 0.5, 1e-12);
    EXPECT_TRUE(is_common_tail_event(s, r.certificate->event, 0.5));
    EXPECT_TRUE(es_additivity_test(s, 0.5));
}

TEST(TailEvent, TiesAtThresholdAreFilled) {
    const auto s = rows({{1, 0}, {1, 0}, {1, 5}, {1, 0}});
    const auto r = find_common_tail_event(s, 0.5);
    ASSERT_EQ(r.verdict, TailVerdict::Certified);
    EXPECT_TRUE(is_common_tail_event(s, r.certificate->event, 0.5));
    EXPECT_NE(std::find(r.certificate->event.begin(), r.certificate->event.end(), 2u), r.certificate->event.end());
}

TEST(TailEvent, WeightsThatCannotHitLevelAreNotRepresentable) {
    // All scenarios tie, but no subset of weights {0.3, 0.3, 0.4} sums to 0.5.
    const ScenarioSet s(3, 2, {1, 1, 1, 1, 1, 1}, {0.3, 0.3, 0.4});
    EXPECT_EQ(find_common_tail_event(s, 0.5).verdict, TailVerdict::NotRepresentable);
}

TEST(TailEvent, AgreesWithBruteForceAndEsAdditivity) {
    Rng rng(31);
    int certified = 0;
    for (int trial = 0; trial < 3000; ++trial) {
        const std::size_t m = 2 + uniform_index(rng, 9);
        const std::size_t k = 2 + uniform_index(rng, 2);
        const std::size_t tail = 1 + uniform_index(rng, m - 1);
        const double p = 1.0 - static_cast<double>(tail) / static_cast<double>(m);
        std::vector<double> losses(m * k);
        for (auto& x : losses) x = static_cast<double>(uniform_index(rng, 4));
        if (uniform01(rng) < 0.5) {
            // Make columns move together to get many concentrated cases.
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 1; j < k; ++j) losses[i * k + j] = losses[i * k] + (uniform01(rng) < 0.2);
        }
        const ScenarioSet s(m, k, losses, std::vector<double>(m, 1.0 / static_cast<double>(m)));
        const auto r = find_common_tail_event(s, p);
        const bool brute = exists_common_tail_event(s, p);
        EXPECT_EQ(r.verdict == TailVerdict::Certified, brute) << "trial " << trial;
        EXPECT_NE(r.verdict, TailVerdict::NotRepresentable);
        if (r.certificate) {
            EXPECT_TRUE(is_common_tail_event(s, r.certificate->event, p));
            ++certified;
        }
        if (k == 2) EXPECT_EQ(es_additivity_test(s, p), brute) << "trial " << trial;
    }
    EXPECT_GT(certified, 300);
}

TEST(TailEvent, CheckedPairsForThreePositions) {
    // Sum is additive only if every sub-portfolio is; here X1 and X2 are
    // antitone while X3 offsets them.
    const auto s = rows({{1, 0, 0}, {0, 1, 0}});
    EXPECT_FALSE(es_additivity_test(s, 0.5));
    EXPECT_EQ(find_common_tail_event(s, 0.5).verdict, TailVerdict::NotConcentrated);
}

TEST(Couple, GridMustAlignWithLevel) {
    const auto d = DiscreteDistribution::uniform(iota_values(1, 10));
    EXPECT_THROW(couple(d, d, 0.8, CouplingStyle::Comonotone, 7), GridError);
    EXPECT_NO_THROW(couple(d, d, 0.8, CouplingStyle::Comonotone, 10));
}

TEST(Couple, AllStylesShareTailEventAndMarginals) {
    Rng rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        const auto dx = random_distribution(rng, 8, -5, 5);
        const auto dy = random_distribution(rng, 8, -5, 5);
        const std::size_t m = 20;
        const double p = 0.05 * static_cast<double>(1 + uniform_index(rng, 19));
        const ScenarioSet base = couple(dx, dy, p, CouplingStyle::Comonotone, m);
        for (auto style : {CouplingStyle::Comonotone, CouplingStyle::TailBlockAntitone, CouplingStyle::TailBlockShuffle}) {
            const auto s = couple(dx, dy, p, style, m, rng());
            EXPECT_EQ(s.marginal(0), base.marginal(0));
            EXPECT_EQ(s.marginal(1), base.marginal(1));
            std::vector<std::size_t> upper;
            for (std::size_t j = lower_block_size(p, m); j < m; ++j) upper.push_back(j);
            EXPECT_TRUE(is_common_tail_event(s, upper, p));
            EXPECT_TRUE(es_additivity_test(s, p, 1e-9));
        }
    }
}

TEST(Couple, GridLawMatchesQuantiles) {
    const auto d = DiscreteDistribution::uniform(iota_values(1, 10));
    const auto s = couple(d, d, 0.8, CouplingStyle::TailBlockAntitone, 10);
    EXPECT_EQ(s.column(0), iota_values(1, 10));
    EXPECT_EQ(s.column(1), (std::vector<double>{8, 7, 6, 5, 4, 3, 2, 1, 10, 9}));
}

TEST(Collapse, UniformExample) {
    const auto d = DiscreteDistribution::uniform(iota_values(1, 10));
    const auto r = collapse(d, 0.8, 1e-6);
    ASSERT_EQ(r.terminal.size(), 2u);
    EXPECT_NEAR(r.terminal.atoms()[0].value, 4.5, 1e-12);
    EXPECT_NEAR(r.terminal.atoms()[0].prob, 0.8, 1e-12);
    EXPECT_NEAR(r.terminal.atoms()[1].value, 9.5, 1e-12);
    EXPECT_NEAR(r.terminal.atoms()[1].prob, 0.2, 1e-12);
    EXPECT_EQ(r.limit, r.terminal);
}

TEST(Collapse, PreservesEsMeanAndRespectsIterationBound) {
    Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const auto d = random_distribution(rng, 40);
        const double p = uniform01(rng) < 0.5 ? 0.5 : 0.9;
        const double eps = 1e-6;
        const auto r = collapse(d, p, eps);
        const double es = expected_shortfall(d, p);
        for (const auto& step : r.trace) {
            EXPECT_NEAR(step.es, es, 1e-10);
            EXPECT_NEAR(step.mean, d.mean(), 1e-10);
        }
        const double L = range_width(d);
        const int bound = L > 0 ? static_cast<int>(std::ceil(std::log2(L / eps))) + 1 : 1;
        EXPECT_LE(r.iterations, bound);
        // Terminal law: within eps of ES on the upper part, of lower ES on the lower part.
        const auto up = restrict_quantiles(r.terminal, p, 1.0);
        const auto lo = restrict_quantiles(r.terminal, 0.0, p);
        EXPECT_LE(up.max() - es, eps);
        EXPECT_LE(es - up.min(), eps);
        const double les = lower_expected_shortfall(d, p);
        EXPECT_LE(lo.max() - les, eps);
        EXPECT_LE(les - lo.min(), eps);
    }
}

TEST(Collapse, WidthsAtLeastHalveEachStep) {
    Rng rng(100);
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = collapse(random_distribution(rng, 30), 0.75, 1e-8);
        for (std::size_t i = 2; i < r.trace.size(); ++i) {
            EXPECT_LE(r.trace[i].upper_width, r.trace[i - 1].upper_width / 2 + 1e-12);
            EXPECT_LE(r.trace[i].lower_width, r.trace[i - 1].lower_width / 2 + 1e-12);
        }
    }
}

TEST(Collapse, RejectsBadArguments) {
    const auto d = DiscreteDistribution::constant(1.0);
    EXPECT_THROW(collapse(d, 1.0, 1e-6), DomainError);
    EXPECT_THROW(collapse(d, 0.5, 0.0), DomainError);
    EXPECT_EQ(collapse(d, 0.5, 1e-6).iterations, 0);
}

TEST(ScenarioSetTest, ValidationAndAccessors) {
    EXPECT_THROW(ScenarioSet(2, 1, {1.0}, {0.5, 0.5}), InputError);
    EXPECT_THROW(ScenarioSet(2, 1, {1.0, 2.0}, {0.5, 0.4}), InputError);
    EXPECT_THROW(ScenarioSet(2, 1, {1.0, 2.0}, {0.5, 0.5}, {"a", "b"}), InputError);
    const ScenarioSet s(2, 2, {1, 2, 3, 4}, {0.25, 0.75});
    EXPECT_EQ(s.labels(), (std::vector<std::string>{"X1", "X2"}));
    EXPECT_EQ(s.row_sums(), (std::vector<double>{3, 7}));
    EXPECT_DOUBLE_EQ(s.total().mean(), 0.25 * 3 + 0.75 * 7);
    EXPECT_EQ(s.combine({2, -1}), (std::vector<double>{0, 2}));
    EXPECT_FALSE(s.equal_weights());
}
