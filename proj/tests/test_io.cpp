#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace concentra;

TEST(Io, NumberFormatting) {
    EXPECT_EQ(format_number(2.0), "2");
    EXPECT_EQ(format_number(0.1 + 0.2), "0.3");
    EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
    EXPECT_EQ(json_number(2.0).dump(), "2");
    EXPECT_EQ(json_number(-7.0).dump(), "-7");
    EXPECT_EQ(json_number(0.1 + 0.2).dump(), "0.3");
    EXPECT_EQ(json_number(1.0 / 3.0).dump(), "0.333333333333");
    EXPECT_EQ(json_value(ExtendedReal::plus_infinity()).dump(), "\"+inf\"");
}

TEST(Io, ScenarioCsvRoundTrip) {
    const auto loaded = parse_scenarios_csv("A, B ,Weight\n1,2,0.25\n# comment\n\n3,4,0.75\n");
    EXPECT_FALSE(loaded.weights_defaulted);
    const auto& s = loaded.set;
    EXPECT_EQ(s.labels(), (std::vector<std::string>{"A", "B"}));
    EXPECT_EQ(s.weight(1), 0.75);
    EXPECT_EQ(s.loss(1, 0), 3.0);
    EXPECT_EQ(scenarios_to_csv(s), "A,B,weight\n1,2,0.25\n3,4,0.75\n");
    const auto again = parse_scenarios_csv(scenarios_to_csv(s));
    EXPECT_EQ(again.set.losses(), s.losses());
    EXPECT_EQ(again.set.weights(), s.weights());
}

TEST(Io, ScenarioCsvDefaultsToEqualWeights) {
    const auto loaded = parse_scenarios_csv("X\n1\n2\n3\n4\n");
    EXPECT_TRUE(loaded.weights_defaulted);
    EXPECT_TRUE(loaded.set.equal_weights());
    EXPECT_DOUBLE_EQ(loaded.set.weight(0), 0.25);
}

TEST(Io, MalformedCsvNamesRowAndColumn) {
    try {
        parse_scenarios_csv("X,Y\n1,2\n3,abc\n");
        FAIL() << "expected InputError";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("row 3, column 2"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_scenarios_csv("X,Y\n1\n"), InputError);
    EXPECT_THROW(parse_scenarios_csv("X\nnan\n"), InputError);
    EXPECT_THROW(parse_scenarios_csv(""), InputError);
    EXPECT_THROW(parse_scenarios_csv("X,weight\n1,0.5\n2,0.3\n"), InputError);
}

TEST(Io, DistributionCsv) {
    const auto d = parse_distribution_csv("value,prob\n3,0.5\n1,0.5\n");
    EXPECT_EQ(d.atoms().front().value, 1.0);
    EXPECT_EQ(distribution_to_csv(d), "value,prob\n1,0.5\n3,0.5\n");
    EXPECT_EQ(parse_distribution_csv("1,1\n").size(), 1u);
    EXPECT_THROW(parse_distribution_csv("value,prob\n1,-0.5\n2,1.5\n"), InputError);
    EXPECT_THROW(parse_distribution_csv("value,prob\n1\n"), InputError);
    EXPECT_THROW(parse_distribution_csv("value,prob\n"), InputError);
}

TEST(Io, DistributionAndCopulaJson) {
    const auto d = DiscreteDistribution({{1, 0.25}, {2, 0.75}});
    EXPECT_EQ(to_json(d).dump(), R"([{"value":1,"prob":0.25},{"value":2,"prob":0.75}])");
    EXPECT_EQ(distribution_from_json(to_json(d)), d);
    EXPECT_THROW(distribution_from_json(Json::parse(R"({"value":1})")), InputError);
    const auto c = CheckerboardCopula::block_diagonal(4, 2);
    EXPECT_EQ(copula_from_json(to_json(c)).mass(), c.mass());
    EXPECT_THROW(copula_from_json(Json::parse(R"({"n":2,"mass":[0.5,0,0,0.4]})")), InputError);
    EXPECT_THROW(copula_from_json(Json::parse(R"({"n":-2,"mass":[]})")), InputError);
    EXPECT_THROW(parse_json("{", "config"), InputError);
}

TEST(Io, HarnessReportShape) {
    const auto rf = RiskFunctional::value_at_risk(0.9);
    const auto r = axiom_harness(rf, Axiom::Convexity, 500, 1);
    ASSERT_FALSE(r.passed);
    const auto j = to_json(r);
    EXPECT_EQ(j["axiom"], "Convexity");
    EXPECT_EQ(j["result"], "FAIL");
    ASSERT_TRUE(j.contains("counterexample"));
    const auto again = parse_scenarios_csv(j["counterexample"]["scenarios"].get<std::string>());
    // Written at 12 significant digits.
    const auto& want = r.counterexample->scenarios.losses();
    ASSERT_EQ(again.set.losses().size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i)
        EXPECT_NEAR(again.set.losses()[i], want[i], 1e-11 * std::max(1.0, std::abs(want[i])));
}
