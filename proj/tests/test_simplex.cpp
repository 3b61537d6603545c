#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace concentra;

namespace {

LinearProgram program(std::size_t n, std::vector<double> c) {
    LinearProgram lp;
    lp.num_vars = n;
    lp.objective = std::move(c);
    return lp;
}

}  // namespace

TEST(Simplex, TextbookMaximization) {
    // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  -> (2, 6), 36
    auto lp = program(2, {-3, -5});
    lp.add({1, 0}, Relation::LessEqual, 4);
    lp.add({0, 2}, Relation::LessEqual, 12);
    lp.add({3, 2}, Relation::LessEqual, 18);
    const auto s = solve_lp(lp);
    ASSERT_EQ(s.status, LpStatus::Optimal);
    EXPECT_NEAR(s.objective, -36, 1e-9);
    EXPECT_NEAR(s.x[0], 2, 1e-9);
    EXPECT_NEAR(s.x[1], 6, 1e-9);
}

TEST(Simplex, EqualityAndGreaterEqualRows) {
    // min x + 2y s.t. x + y = 3, x >= 1, y >= 0.5
    auto lp = program(2, {1, 2});
    lp.add({1, 1}, Relation::Equal, 3);
    lp.add({1, 0}, Relation::GreaterEqual, 1);
    lp.add({0, 1}, Relation::GreaterEqual, 0.5);
    const auto s = solve_lp(lp);
    ASSERT_EQ(s.status, LpStatus::Optimal);
    EXPECT_NEAR(s.x[0], 2.5, 1e-9);
    EXPECT_NEAR(s.objective, 3.5, 1e-9);
}

TEST(Simplex, NegativeRightHandSide) {
    // min x s.t. -x <= -2
    auto lp = program(1, {1});
    lp.add({-1}, Relation::LessEqual, -2);
    const auto s = solve_lp(lp);
    ASSERT_EQ(s.status, LpStatus::Optimal);
    EXPECT_NEAR(s.x[0], 2, 1e-12);
}

TEST(Simplex, DetectsInfeasible) {
    auto lp = program(2, {1, 1});
    lp.add({1, 1}, Relation::LessEqual, 1);
    lp.add({1, 1}, Relation::GreaterEqual, 2);
    EXPECT_EQ(solve_lp(lp).status, LpStatus::Infeasible);
}

TEST(Simplex, DetectsUnbounded) {
    auto lp = program(2, {-1, 0});
    lp.add({1, -1}, Relation::LessEqual, 1);
    EXPECT_EQ(solve_lp(lp).status, LpStatus::Unbounded);
}

TEST(Simplex, RedundantEqualityRows) {
    auto lp = program(2, {1, 1});
    lp.add({1, 1}, Relation::Equal, 2);
    lp.add({2, 2}, Relation::Equal, 4);
    const auto s = solve_lp(lp);
    ASSERT_EQ(s.status, LpStatus::Optimal);
    EXPECT_NEAR(s.objective, 2, 1e-12);
}

TEST(Simplex, BealeCyclingExampleTerminates) {
    // Cycles under the largest-coefficient rule; Bland's rule must terminate.
    auto lp = program(4, {-0.75, 150, -0.02, 6});
    lp.add({0.25, -60, -0.04, 9}, Relation::LessEqual, 0);
    lp.add({0.5, -90, -0.02, 3}, Relation::LessEqual, 0);
    lp.add({0, 0, 1, 0}, Relation::LessEqual, 1);
    const auto s = solve_lp(lp);
    ASSERT_EQ(s.status, LpStatus::Optimal);
    EXPECT_NEAR(s.objective, -0.05, 1e-9);
}

TEST(Simplex, MatchesVertexEnumerationOnRandomBoxes) {
    // Oracle: for min c^T x over {x >= 0, A x <= b} in two variables, the
    // optimum sits at an intersection of two active constraints.
    Rng rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::array<double, 3>> cons;  // a0 x + a1 y <= b
        cons.push_back({1, 0, 1 + 5 * uniform01(rng)});
        cons.push_back({0, 1, 1 + 5 * uniform01(rng)});
        for (int r = 0; r < 3; ++r) cons.push_back({uniform(rng, -1, 2), uniform(rng, -1, 2), uniform(rng, 0.5, 6)});
        cons.push_back({-1, 0, 0});
        cons.push_back({0, -1, 0});
        const double c0 = uniform(rng, -1, 1), c1 = uniform(rng, -1, 1);
        auto lp = program(2, {c0, c1});
        for (std::size_t r = 0; r + 2 < cons.size(); ++r) lp.add({cons[r][0], cons[r][1]}, Relation::LessEqual, cons[r][2]);
        const auto s = solve_lp(lp);
        ASSERT_EQ(s.status, LpStatus::Optimal);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < cons.size(); ++a)
            for (std::size_t b = a + 1; b < cons.size(); ++b) {
                const double det = cons[a][0] * cons[b][1] - cons[a][1] * cons[b][0];
                if (std::abs(det) < 1e-12) continue;
                const double x = (cons[a][2] * cons[b][1] - cons[a][1] * cons[b][2]) / det;
                const double y = (cons[a][0] * cons[b][2] - cons[a][2] * cons[b][0]) / det;
                bool feasible = true;
                for (const auto& c : cons) feasible = feasible && c[0] * x + c[1] * y <= c[2] + 1e-9;
                if (feasible) best = std::min(best, c0 * x + c1 * y);
            }
        EXPECT_NEAR(s.objective, best, 1e-8);
    }
}
