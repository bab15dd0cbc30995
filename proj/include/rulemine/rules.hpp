#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "rulemine/datamodel.hpp"
#include "rulemine/engine.hpp"

namespace rulemine {

struct RuleSet {
    std::vector<Rule> rules;
    MiningConfig config;
    std::uint64_t db_size = 0;
};

struct RuleMetrics {
    Percent confidence;  // n_AY / n_A
    Percent coverage;    // n_A / m, the antecedent support
    Percent support;     // n_AY / m, the joint support
};

inline RuleMetrics rule_metrics(std::uint64_t n_antecedent, std::uint64_t n_joint, std::uint64_t db_size) {
    if (n_antecedent == 0) throw std::invalid_argument("rule metrics need a positive antecedent count");
    return {Percent(n_joint, n_antecedent), Percent(n_antecedent, db_size), Percent(n_joint, db_size)};
}

inline RuleMetrics rule_metrics(const Rule& rule) {
    return rule_metrics(rule.antecedent_count(), rule.joint_count(), rule.db_size());
}

namespace detail {

inline std::uint64_t lookup_count(const std::vector<FrequentLevel>& levels, const Itemset& items) {
    const auto& level = levels.at(items.size() - 1).itemsets;
    auto it = std::lower_bound(level.begin(), level.end(), items,
                               [](const CountedItemset& c, const Itemset& key) { return c.items < key; });
    if (it == level.end() || it->items != items) throw std::logic_error("subset of a frequent itemset not found");
    return it->count;
}

}  // namespace detail

// Template-constrained rules A => Y: A drawn from the antecedent class with
// 1 <= |A| <= max_antecedent_size, Y exactly consequent_size items of the consequent
// class. The template is pushed into mining as an anti-monotone itemset constraint.
inline RuleSet derive_rules(const TransactionDatabase& db, const MiningConfig& config) {
    config.validate();
    if (db.size() == 0) throw Error("cannot derive rules from an empty database");
    const auto& catalog = db.catalog();
    if (catalog.items_of_class(config.antecedent_class).empty() ||
        catalog.items_of_class(config.consequent_class).empty())
        throw Error("catalog has no items of the antecedent or consequent class");

    auto class_of = [&](ItemId id) { return catalog.item(id).item_class; };
    MiningOptions options;
    options.threads = config.threads;
    options.admissible = [&](const Itemset& s) {
        std::size_t lhs = 0, rhs = 0;
        for (auto id : s) (class_of(id) == config.antecedent_class ? lhs : rhs)++;
        return lhs <= config.max_antecedent_size && rhs <= config.consequent_size;
    };
    auto filter = [&](ItemId id) {
        auto c = class_of(id);
        return c == config.antecedent_class || c == config.consequent_class;
    };
    const auto levels = mine_frequent(db, config.min_coverage_count, filter, options);

    RuleSet out{{}, config, db.size()};
    for (const auto& level : levels) {
        for (const auto& z : level.itemsets) {
            std::vector<ItemId> lhs, rhs;
            for (auto id : z.items) (class_of(id) == config.antecedent_class ? lhs : rhs).push_back(id);
            if (lhs.empty() || rhs.size() != config.consequent_size) continue;
            Itemset antecedent(std::move(lhs));
            const auto n_a = detail::lookup_count(levels, antecedent);
            if (Percent(z.count, n_a) < config.min_confidence) continue;
            out.rules.emplace_back(std::move(antecedent), Itemset(std::move(rhs)), n_a, z.count, db.size());
        }
    }
    return out;
}

// Confidence descending, then antecedent size, then antecedent ids, then consequent ids.
inline bool canonical_less(const Rule& a, const Rule& b) {
    if (auto c = a.confidence() <=> b.confidence(); c != 0) return c > 0;
    if (a.antecedent().size() != b.antecedent().size()) return a.antecedent().size() < b.antecedent().size();
    if (a.antecedent() != b.antecedent()) return a.antecedent() < b.antecedent();
    return a.consequent() < b.consequent();
}

inline RuleSet canonical_sort(RuleSet set) {
    std::sort(set.rules.begin(), set.rules.end(), canonical_less);
    return set;
}

}  // namespace rulemine
