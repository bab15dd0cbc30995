#include <gtest/gtest.h>

#include <random>

#include "rulemine/classify.hpp"
#include "rulemine/corpus.hpp"

using namespace rulemine;

TEST(ClassifyConfidence, Boundaries) {
    EXPECT_EQ(classify_confidence(Percent(1, 1)), RuleClass::must_have);
    EXPECT_EQ(classify_confidence(Percent(19, 20)), RuleClass::must_have);
    EXPECT_EQ(classify_confidence(Percent(9499, 10000)), RuleClass::should_have);
    EXPECT_EQ(classify_confidence(Percent(18, 19)), RuleClass::should_have);
    EXPECT_EQ(classify_confidence(Percent(9, 10)), RuleClass::should_have);
    EXPECT_EQ(classify_confidence(Percent(8999, 10000)), RuleClass::rejected);
    EXPECT_EQ(classify_confidence(Percent(0, 5)), RuleClass::rejected);
}

TEST(ClassifyConfidence, AgreesWithRationalThresholds) {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 10000; ++k) {
        const std::uint64_t d = rng() % 500 + 1, n = rng() % (d + 1);
        const auto c = classify_confidence(Percent(n, d));
        const auto expect = 100 * n >= 95 * d ? RuleClass::must_have
                            : 100 * n >= 90 * d ? RuleClass::should_have
                                                : RuleClass::rejected;
        EXPECT_EQ(c, expect);
    }
}

TEST(PartitionRules, StableAndComplete) {
    std::vector<Rule> rules;
    const std::uint64_t joints[] = {10, 9, 10, 5, 19};
    const std::uint64_t bases[] = {10, 10, 10, 10, 20};
    for (std::uint32_t k = 0; k < 5; ++k)
        rules.emplace_back(Itemset{ItemId{k}}, Itemset{ItemId{10}}, bases[k], joints[k], 20);
    auto tiers = partition_rules(classify(rules));
    ASSERT_EQ(tiers.must.size(), 3u);
    ASSERT_EQ(tiers.should.size(), 1u);
    ASSERT_EQ(tiers.rejected.size(), 1u);
    EXPECT_EQ(tiers.must[0].rule.antecedent()[0], ItemId{0});
    EXPECT_EQ(tiers.must[1].rule.antecedent()[0], ItemId{2});
    EXPECT_EQ(tiers.must[2].rule.antecedent()[0], ItemId{4});
    EXPECT_EQ(tiers.should[0].rule.antecedent()[0], ItemId{1});
}

TEST(PartitionRules, GoldenSetTierCounts) {
    auto counts = study_group_counts();
    auto golden = appendix_b_rules();
    auto schema = appendix_a_schema();
    auto tiers = partition_rules(classify(golden_to_rules(golden, *schema.catalog, counts)));
    EXPECT_EQ(tiers.must.size(), 33u);
    EXPECT_EQ(tiers.should.size(), 35u);
    EXPECT_TRUE(tiers.rejected.empty());
    // Rules 1-33 print at 95.00 or above, 34-68 below.
    for (std::size_t k = 0; k < 33; ++k) EXPECT_EQ(tiers.must[k].rule, golden_to_rules(golden, *schema.catalog, counts)[k]);
}
