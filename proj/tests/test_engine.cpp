#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "rulemine/engine.hpp"

using namespace rulemine;

namespace {

Itemset ids(std::initializer_list<std::uint32_t> xs) {
    std::vector<ItemId> v;
    for (auto x : xs) v.push_back(ItemId{x});
    return Itemset(std::move(v));
}

TransactionDatabase tiny() {
    // rows: {0,1,2} {0,1} {0,2} {1,2} {0,1,2,3}
    auto cat = oracle::binary_catalog(4);
    std::vector<std::vector<std::uint32_t>> rows{{0, 1, 2}, {0, 1}, {0, 2}, {1, 2}, {0, 1, 2, 3}};
    std::vector<Transaction> ts;
    for (std::size_t j = 0; j < rows.size(); ++j) {
        BitVector m(4);
        for (auto i : rows[j]) m.set(i);
        ts.push_back({"r" + std::to_string(j), m});
    }
    return TransactionDatabase(cat, ts);
}

}  // namespace

TEST(CountSupport, Basics) {
    auto db = tiny();
    EXPECT_EQ(count_support(db, Itemset{}), 5u);
    EXPECT_EQ(count_support(db, ids({0})), 4u);
    EXPECT_EQ(count_support(db, ids({0, 1})), 3u);
    EXPECT_EQ(count_support(db, ids({0, 1, 2})), 2u);
    EXPECT_EQ(count_support(db, ids({3})), 1u);
}

TEST(GenerateCandidates, JoinAndPrune) {
    FrequentLevel l2{2, {{ids({0, 1}), 3}, {ids({0, 2}), 3}, {ids({0, 3}), 1}, {ids({1, 2}), 3}}};
    auto c = generate_candidates(l2);
    // {0,1,2} survives; {0,1,3} and {0,2,3} lack {1,3} / {2,3}.
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0], ids({0, 1, 2}));
    FrequentLevel l1{1, {{ids({0}), 1}, {ids({2}), 1}, {ids({5}), 1}}};
    EXPECT_EQ(generate_candidates(l1).size(), 3u);
    EXPECT_TRUE(generate_candidates(FrequentLevel{1, {}}).empty());
}

TEST(MineFrequent, TinyDatabase) {
    auto db = tiny();
    auto levels = mine_frequent(db, 2);
    ASSERT_EQ(levels.size(), 3u);
    EXPECT_EQ(levels[0].itemsets.size(), 3u);  // item 3 is infrequent
    EXPECT_EQ(levels[1].itemsets.size(), 3u);
    ASSERT_EQ(levels[2].itemsets.size(), 1u);
    EXPECT_EQ(levels[2].itemsets[0].items, ids({0, 1, 2}));
    EXPECT_EQ(levels[2].itemsets[0].count, 2u);
}

TEST(MineFrequent, Errors) {
    auto db = tiny();
    EXPECT_THROW(mine_frequent(db, 0), std::invalid_argument);
    TransactionDatabase empty(oracle::binary_catalog(3), {});
    EXPECT_THROW(mine_frequent(empty, 1), Error);
}

TEST(MineFrequent, MinCountAboveSizeGivesNothing) {
    auto db = tiny();
    EXPECT_TRUE(mine_frequent(db, 6).empty());
}

TEST(MineFrequent, LevelsAreSortedAndFilterRespected) {
    std::mt19937_64 rng(2);
    auto db = oracle::random_database(oracle::binary_catalog(10), 40, 0.5, rng);
    auto levels = mine_frequent(db, 3, [](ItemId id) { return id.index % 2 == 0; });
    for (const auto& l : levels) {
        for (std::size_t k = 1; k < l.itemsets.size(); ++k) EXPECT_LT(l.itemsets[k - 1].items, l.itemsets[k].items);
        for (const auto& c : l.itemsets) {
            EXPECT_EQ(c.items.size(), l.k);
            for (auto id : c.items) EXPECT_EQ(id.index % 2, 0u);
        }
    }
}

// Oracle: every subset of the allowed items counted by scanning rows.
TEST(MineFrequent, MatchesBruteForce) {
    std::mt19937_64 rng(20240601);
    for (int round = 0; round < 300; ++round) {
        const std::size_t n = rng() % 12 + 1;
        const std::size_t m = rng() % 50 + 1;
        const double density = 0.1 + 0.8 * std::uniform_real_distribution<double>(0, 1)(rng);
        auto db = oracle::random_database(oracle::binary_catalog(n), m, density, rng);
        const std::uint64_t min_count = rng() % m + 1;
        std::vector<ItemId> allowed;
        for (std::uint32_t i = 0; i < n; ++i) allowed.push_back(ItemId{i});
        ASSERT_EQ(oracle::flatten(mine_frequent(db, min_count)), oracle::all_frequent(db, min_count, allowed))
            << "round " << round;
    }
}

// The admissible predicate prunes exactly the inadmissible sets and their supersets.
TEST(MineFrequent, AdmissibleConstraintMatchesFilteredBruteForce) {
    std::mt19937_64 rng(99);
    for (int round = 0; round < 100; ++round) {
        const std::size_t n = rng() % 10 + 2;
        auto db = oracle::random_database(oracle::binary_catalog(n), rng() % 40 + 1, 0.6, rng);
        const std::size_t cap = rng() % 3 + 1;
        MiningOptions opt;
        opt.admissible = [&](const Itemset& s) {
            std::size_t low = 0;
            for (auto id : s) low += id.index < n / 2;
            return low <= cap;
        };
        std::vector<ItemId> allowed;
        for (std::uint32_t i = 0; i < n; ++i) allowed.push_back(ItemId{i});
        auto expect = oracle::all_frequent(db, 1, allowed);
        std::erase_if(expect, [&](const auto& kv) {
            return !opt.admissible(Itemset(kv.first));
        });
        EXPECT_EQ(oracle::flatten(mine_frequent(db, 1, {}, opt)), expect);
    }
}

TEST(MineFrequent, AntiMonotoneCounts) {
    std::mt19937_64 rng(17);
    for (int round = 0; round < 50; ++round) {
        auto db = oracle::random_database(oracle::binary_catalog(rng() % 12 + 1), rng() % 50 + 1, 0.5, rng);
        auto all = oracle::flatten(mine_frequent(db, 1));
        for (const auto& [items, count] : all) {
            EXPECT_EQ(count, count_support(db, Itemset(items)));
            for (std::size_t drop = 0; items.size() > 1 && drop < items.size(); ++drop) {
                auto sub = items;
                sub.erase(sub.begin() + static_cast<std::ptrdiff_t>(drop));
                ASSERT_TRUE(all.count(sub));
                EXPECT_GE(all.at(sub), count);
            }
        }
    }
}

TEST(MineFrequent, ThreadCountDoesNotChangeResult) {
    std::mt19937_64 rng(4);
    for (int round = 0; round < 20; ++round) {
        auto db = oracle::random_database(oracle::binary_catalog(20), 300, 0.35, rng);
        const auto base = oracle::flatten(mine_frequent(db, 10));
        for (unsigned t : {2u, 3u, 8u}) {
            MiningOptions opt;
            opt.threads = t;
            EXPECT_EQ(oracle::flatten(mine_frequent(db, 10, {}, opt)), base) << t << " threads";
        }
    }
}

TEST(MineFrequent, RowPermutationDoesNotChangeResult) {
    std::mt19937_64 rng(8);
    for (int round = 0; round < 20; ++round) {
        auto db = oracle::random_database(oracle::binary_catalog(9), 60, 0.5, rng);
        auto rows = db.transactions();
        std::shuffle(rows.begin(), rows.end(), rng);
        TransactionDatabase shuffled(db.catalog_ptr(), rows);
        EXPECT_EQ(oracle::flatten(mine_frequent(db, 4)), oracle::flatten(mine_frequent(shuffled, 4)));
    }
}
